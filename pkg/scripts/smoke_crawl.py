"""End-to-end crawl of a small synthetic world: budgets, capture, classes."""
import sys
import time
from collections import Counter, defaultdict

sys.path.insert(0, "src")

from langcrawl.apiface import WINDOW, RateLimiter, DEFAULT_BUDGETS, Endpoint
from langcrawl.model import UserClass
from langcrawl.sched import Crawler, SchedulerConfig, SimClock
from langcrawl.simnet import DAY, World, WorldConfig
from langcrawl.store import Store

days = int(sys.argv[1]) if len(sys.argv) > 1 else 7
n = int(sys.argv[2]) if len(sys.argv) > 2 else 100

wcfg = WorldConfig(seed=5, n_users=n, community_fractions={"el": 0.6, "en": 0.4}, mixed_fraction=0.1)
w = World(wcfg)
store = Store()
crawler = Crawler(w, store, RateLimiter(), SimClock(w), SchedulerConfig())

t0 = time.time()
crawler.run(w.cfg.start_time + days * DAY)
w.frozen = True
crawler.drain()
wall = time.time() - t0

# budget compliance per aligned window
per_window = defaultdict(Counter)
for r in crawler.log:
    per_window[r["at"] // WINDOW][r["endpoint"]] += 1
violations = 0
for win, counts in per_window.items():
    for name, got in counts.items():
        budget = DEFAULT_BUDGETS[Endpoint(name)].max_requests
        if got > budget:
            violations += 1
            print(f"VIOLATION window {win} {name}: {got} > {budget}")

tracked = [
    u for u in w.users if store.user_class(u) in (UserClass.TRACKED, UserClass.TARGET)
]
truth_total = sum(len(w.users[u].tweet_ids) for u in tracked)
stored_total = sum(store.author_tweet_count(u) for u in tracked)
exact = sum(
    1 for u in tracked if store.author_tweet_ids(u) == list(w.users[u].tweet_ids)
)
classes = Counter(store.user_class(u).value for u in w.users)
gt = w.ground_truth()

# classification quality vs ground-truth community
tp = fp = fn = 0
for u in w.users:
    truth_target = gt.community(u) == "el" or gt.is_mixed(u)
    said_target = store.user_class(u) is UserClass.TARGET
    if said_target and truth_target:
        tp += 1
    elif said_target:
        fp += 1
    elif truth_target:
        fn += 1

endpoint_counts = Counter(r["endpoint"] for r in crawler.log)
print(f"world: {n} users, {days} days; {len(tracked)} tracked, truth {truth_total} tweets")
print(f"crawl: {len(crawler.log)} requests in {wall:.1f}s wall, {violations} budget violations")
print(f"stored: {stored_total} tweets, capture {stored_total/truth_total:.4f}, exact users {exact}/{len(tracked)}")
print(f"classes: {dict(classes)}")
print(f"target precision {tp}/{tp+fp}, recall {tp}/{tp+fn}")
print("top endpoints:", endpoint_counts.most_common(6))
