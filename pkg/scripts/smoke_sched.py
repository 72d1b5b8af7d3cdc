"""Quick check of timeline-walk request arithmetic before the test suite exists."""
import sys

sys.path.insert(0, "src")

from langcrawl.apiface import RateLimiter
from langcrawl.model import UserClass
from langcrawl.sched import Crawler, SchedulerConfig, SimClock
from langcrawl.simnet import World, WorldConfig
from langcrawl.store import Store


def timeline_requests(crawler, mark):
    return sum(
        1 for r in crawler.log[mark:] if r["endpoint"] == "user_timeline"
    )


def visit(crawler, label, expect_tl):
    mark = len(crawler.log)
    assert crawler._step_tweets("stale"), f"{label}: no walk started"
    while crawler._walks["stale"] is not None:
        assert crawler._step_tweets("stale"), f"{label}: walk stalled"
    got = timeline_requests(crawler, mark)
    shows = sum(1 for r in crawler.log[mark:] if r["endpoint"] == "users_show")
    status = "OK " if got == expect_tl else "FAIL"
    print(f"{status} {label}: {got} timeline requests (expected {expect_tl}), {shows} users_show")
    return got == expect_tl


w = World(WorldConfig(seed=11, n_users=1, community_fractions={"el": 1.0}))
w.frozen = True
uid = next(iter(w.users))
store = Store()
store.set_class(uid, UserClass.TRACKED, w.now)
cfg = SchedulerConfig(loops=("tweets",), drain=False, min_staleness=0)
crawler = Crawler(w, store, RateLimiter(), SimClock(w), cfg)

ok = True
w.emit_tweets(uid, 1100)
ok &= visit(crawler, "first visit, 1100 tweets", 6)
assert store.author_tweet_count(uid) == 1100, store.author_tweet_count(uid)

for i in range(3):
    w.emit_tweets(uid, 1000)
    ok &= visit(crawler, f"revisit +1000 (#{i+1})", 5)

w.emit_tweets(uid, 100)
ok &= visit(crawler, "revisit +100", 1)

w.now += 3600
ok &= visit(crawler, "revisit +0", 1)

w.emit_tweets(uid, 450)
ok &= visit(crawler, "revisit +450", 3)

st = store.get_crawl_state(uid)
total = store.author_tweet_count(uid)
truth = len(w.users[uid].tweet_ids)
print(f"stored={total} truth={truth} est_rate={st.est_rate:.1f}/day cap_reached={st.cap_reached}")
assert total == truth, "capture mismatch"
assert not st.cap_reached
sys.exit(0 if ok else 1)
