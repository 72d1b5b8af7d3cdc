"""Classifier fidelity scenario: 60/40 split, 10% mixed, high activity."""
import sys
import time

sys.path.insert(0, "src")

from langcrawl.apiface import RateLimiter
from langcrawl.model import UserClass
from langcrawl.sched import Crawler, SchedulerConfig, SimClock
from langcrawl.simnet import DAY, World, WorldConfig
from langcrawl.store import Store

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 42

t0 = time.time()
wcfg = WorldConfig(
    seed=seed,
    n_users=400,
    community_fractions={"el": 0.6, "en": 0.4},
    mixed_fraction=0.10,
    activity_min=20.0,
    activity_max=50.0,
)
w = World(wcfg)
gt = w.ground_truth()
print(f"world built in {time.time()-t0:.1f}s")

store = Store()
# force-crawl a few majority-community users so the stop rule gets real input
pure_other = [
    u for u in sorted(w.users) if gt.community(u) == "en" and not gt.is_mixed(u)
][:10]
for u in pure_other:
    store.set_class(u, UserClass.TRACKED, w.now)

crawler = Crawler(w, store, RateLimiter(), SimClock(w), SchedulerConfig())
crawler.run(w.cfg.start_time + 30 * DAY)
w.frozen = True
crawler.drain()
print(f"crawl done at {time.time()-t0:.1f}s, {len(crawler.log)} requests")

tp = fp = fn = 0
missed = []
for u in sorted(w.users):
    truth_target = gt.community(u) == "el"
    said_target = store.user_class(u) is UserClass.TARGET
    if said_target and truth_target:
        tp += 1
    elif said_target:
        fp += 1
        missed.append(("FP", u))
    elif truth_target:
        fn += 1
        missed.append(("FN", u))

precision = tp / (tp + fp) if tp + fp else 0.0
recall = tp / (tp + fn) if tp + fn else 0.0
print(f"precision {precision:.4f} ({tp}/{tp+fp})  recall {recall:.4f} ({tp}/{tp+fn})")

bad_stop = 0
for u in pure_other:
    n = store.author_tweet_count(u)
    cls_ = store.user_class(u)
    ok = cls_ is UserClass.STOPPED if n > 500 else True
    if not ok:
        bad_stop += 1
    print(f"  pure-other {u}: {n} stored, class {cls_.value}")
for tag, u in missed[:8]:
    su = w.users[u]
    from langcrawl.lexicons import count_in_ranges, TARGET_SCRIPT_RANGES
    counts = store.author_lang_counts(u)
    total = sum(counts.values())
    pct = counts.get("el", 0) / total if total else 0.0
    print(
        f"  {tag} {u}: mixed={gt.is_mixed(u)} home={gt.community(u)} "
        f"stored={total} el_share={pct:.3f} class={store.user_class(u).value} "
        f"name={su.name!r}"
    )
print("stop-rule violations:", bad_stop)
