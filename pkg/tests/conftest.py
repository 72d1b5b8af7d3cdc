"""Shared fixtures. The crawled-world fixtures are session scoped and must be
treated as read only; tests that mutate a store build their own."""

from __future__ import annotations

import pytest

from langcrawl.apiface import RateLimiter
from langcrawl.sched import Crawler, SchedulerConfig, SimClock
from langcrawl.simnet import DAY, World, WorldConfig
from langcrawl.store import Store


def crawl_world(
    cfg: WorldConfig,
    days: int,
    scfg: SchedulerConfig | None = None,
    drain: bool = True,
):
    """Run one full crawl: generate, crawl `days`, freeze, drain."""
    world = World(cfg)
    store = Store()
    crawler = Crawler(world, store, RateLimiter(), SimClock(world), scfg)
    crawler.run(world.cfg.start_time + days * DAY)
    world.frozen = True
    if drain:
        crawler.drain()
    return world, store, crawler


@pytest.fixture(scope="session")
def small_crawl():
    """60 users, 5 days, full loop set. Read only."""
    cfg = WorldConfig(
        seed=7,
        n_users=60,
        community_fractions={"el": 0.6, "en": 0.4},
        mixed_fraction=0.1,
        activity_max=30.0,
    )
    return crawl_world(cfg, days=5)
