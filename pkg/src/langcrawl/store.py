"""Embedded document store for crawl output.

One process, in-memory collections, JSON-lines import/export. No external
database: the whole point of the design is that a single machine can hold a
mid-sized language community. Every mutating operation is atomic per key via
one coarse lock, which is all the sequential crawl loops need.
"""
from __future__ import annotations

import bisect
import enum
import json
import threading
from collections import Counter, defaultdict
from pathlib import Path
from typing import Callable, Iterable

from . import model
from .model import (
    ClassTransition,
    CrawlState,
    FavoriteRecord,
    FollowEdge,
    FollowScan,
    GoneRef,
    ListMembership,
    ListRecord,
    ListSubscription,
    Timestamp,
    TrendSnapshot,
    Tweet,
    TweetId,
    UserClass,
    UserId,
    UserSnapshot,
)


class PutSnapshotResult(enum.Enum):
    STORED = "stored"
    SKIPPED_TWEET_COUNT_ONLY = "skipped_tweet_count_only"


class PutTweetResult(enum.Enum):
    INSERTED = "inserted"
    DUPLICATE = "duplicate"
    UPGRADED = "upgraded"


_SNAPSHOT_VOLATILE = ("tweet_count", "observed_at")


def _snapshot_core(s: UserSnapshot) -> tuple:
    rec = model.to_record(s)
    for name in _SNAPSHOT_VOLATILE:
        rec.pop(name)
    return tuple(sorted(rec.items()))


def dumps(rec: dict) -> str:
    """Canonical JSON line: sorted keys, no spaces, UTF-8 kept readable."""
    return json.dumps(rec, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


class Store:
    def __init__(self) -> None:
        self._lock = threading.RLock()
        self.snapshots: dict[UserId, list[UserSnapshot]] = defaultdict(list)
        self.screen_name_index: dict[str, UserId] = {}
        self.tweets: dict[TweetId, Tweet] = {}
        self._author_tweets: dict[UserId, list[TweetId]] = defaultdict(list)
        self._author_langs: dict[UserId, Counter] = defaultdict(Counter)
        self.follow_log: list[FollowEdge] = []
        self.follow_scans: list[FollowScan] = []
        self._friends_ever: dict[UserId, set[UserId]] = defaultdict(set)
        self._followers_ever: dict[UserId, set[UserId]] = defaultdict(set)
        self.lists: dict[int, ListRecord] = {}
        self.memberships: dict[tuple[int, UserId], ListMembership] = {}
        self.subscriptions: dict[tuple[int, UserId], ListSubscription] = {}
        self.favorites: dict[tuple[UserId, TweetId], FavoriteRecord] = {}
        self._favorites_by_author: dict[UserId, set[UserId]] = defaultdict(set)
        self.trends: list[TrendSnapshot] = []
        self.shorturl: dict[str, str] = {}
        self.classes: dict[UserId, UserClass] = {}
        self.class_history: list[ClassTransition] = []
        self.crawl_states: dict[UserId, CrawlState] = {}
        self.gone_refs: dict[UserId, set[TweetId]] = defaultdict(set)
        self.mutations = 0  # bumped on every write; cheap cache invalidation

    # -- users ---------------------------------------------------------------

    def put_snapshot(self, s: UserSnapshot) -> PutSnapshotResult:
        """Append a profile observation unless only tweet_count moved.

        Keeps the lowercase screen-name index injective over latest snapshots:
        when a new snapshot claims a name another user held, the older claimant
        is assumed stale and loses its index entry.
        """
        with self._lock:
            history = self.snapshots[s.id]
            if history and _snapshot_core(history[-1]) == _snapshot_core(s):
                return PutSnapshotResult.SKIPPED_TWEET_COUNT_ONLY
            if history:
                old_key = history[-1].screen_name.lower()
                if self.screen_name_index.get(old_key) == s.id:
                    del self.screen_name_index[old_key]
            self.screen_name_index[s.screen_name.lower()] = s.id
            history.append(s)
            self.mutations += 1
            return PutSnapshotResult.STORED

    def latest_snapshot(self, u: UserId) -> UserSnapshot | None:
        history = self.snapshots.get(u)
        return history[-1] if history else None

    def snapshot_as_of(self, u: UserId, t: Timestamp) -> UserSnapshot | None:
        best = None
        for s in self.snapshots.get(u, ()):
            if s.observed_at <= t:
                best = s
        return best

    def lookup_screen_name(self, name: str) -> UserId | None:
        return self.screen_name_index.get(name.lower())

    # -- tweets ----------------------------------------------------------------

    def put_tweet(self, t: Tweet) -> PutTweetResult:
        with self._lock:
            old = self.tweets.get(t.id)
            if old is not None:
                if old.truncated and not t.truncated:
                    self.tweets[t.id] = t
                    for short, expanded in t.urls:
                        self.shorturl[short] = expanded
                    self.mutations += 1
                    return PutTweetResult.UPGRADED
                return PutTweetResult.DUPLICATE
            self.tweets[t.id] = t
            bisect.insort(self._author_tweets[t.author], t.id)
            self._author_langs[t.author][t.lang] += 1
            for short, expanded in t.urls:
                self.shorturl[short] = expanded
            self.mutations += 1
            return PutTweetResult.INSERTED

    def get_tweet(self, tid: TweetId) -> Tweet | None:
        return self.tweets.get(tid)

    def has_tweet(self, tid: TweetId) -> bool:
        return tid in self.tweets

    def author_tweet_ids(self, u: UserId) -> list[TweetId]:
        return self._author_tweets.get(u, [])

    def author_tweet_count(self, u: UserId) -> int:
        return len(self._author_tweets.get(u, ()))

    def tweet_authors(self) -> list[UserId]:
        """Every user with at least one stored tweet, ascending id."""
        return sorted(self._author_tweets)

    def author_tweets(self, u: UserId) -> list[Tweet]:
        return [self.tweets[tid] for tid in self._author_tweets.get(u, ())]

    def author_lang_counts(self, u: UserId) -> Counter:
        return self._author_langs.get(u, Counter())

    def count_tweets_between(self, u: UserId, lo: TweetId | None, hi: TweetId | None) -> int:
        """Stored tweets of u with lo <= id <= hi. None bounds count nothing."""
        if lo is None or hi is None:
            return 0
        ids = self._author_tweets.get(u, [])
        return bisect.bisect_right(ids, hi) - bisect.bisect_left(ids, lo)

    def author_span(self, u: UserId) -> tuple[int, Timestamp, Timestamp] | None:
        """(count, first created_at, last created_at) over stored tweets of u."""
        ids = self._author_tweets.get(u)
        if not ids:
            return None
        return len(ids), self.tweets[ids[0]].created_at, self.tweets[ids[-1]].created_at

    # -- follow graph ----------------------------------------------------------

    def append_follow(self, e: FollowEdge) -> None:
        with self._lock:
            self.follow_log.append(e)
            self._friends_ever[e.src].add(e.dst)
            self._followers_ever[e.dst].add(e.src)
            self.mutations += 1

    def record_follow_scan(self, scan: FollowScan) -> None:
        with self._lock:
            self.follow_scans.append(scan)
            self.mutations += 1

    def friends_ever(self, u: UserId) -> set[UserId]:
        return self._friends_ever.get(u, set())

    def followers_ever(self, u: UserId) -> set[UserId]:
        return self._followers_ever.get(u, set())

    # -- lists -----------------------------------------------------------------

    def put_list(self, r: ListRecord) -> None:
        with self._lock:
            self.lists[r.id] = r
            self.mutations += 1

    def put_membership(self, m: ListMembership) -> None:
        with self._lock:
            self.memberships.setdefault((m.list_id, m.member), m)
            self.mutations += 1

    def put_subscription(self, s: ListSubscription) -> None:
        with self._lock:
            self.subscriptions.setdefault((s.list_id, s.subscriber), s)
            self.mutations += 1

    # -- favorites ---------------------------------------------------------------

    def put_favorite(self, f: FavoriteRecord) -> bool:
        """Store one like; returns False when (user, tweet) was already known."""
        key = (f.user, f.tweet)
        with self._lock:
            if key in self.favorites:
                return False
            self.favorites[key] = f
            self._favorites_by_author[f.tweet_author].add(f.user)
            self.mutations += 1
            return True

    def has_favorite(self, user: UserId, tweet: TweetId) -> bool:
        return (user, tweet) in self.favorites

    # -- trends / gone refs ------------------------------------------------------

    def put_trend(self, t: TrendSnapshot) -> None:
        with self._lock:
            self.trends.append(t)
            self.mutations += 1

    def add_gone_ref(self, author: UserId, tweet: TweetId) -> None:
        with self._lock:
            self.gone_refs[author].add(tweet)
            self.mutations += 1

    def discard_gone_ref(self, author: UserId, tweet: TweetId) -> None:
        """Withdraw a gone record after a retry resolved the tweet after all."""
        with self._lock:
            refs = self.gone_refs.get(author)
            if refs and tweet in refs:
                refs.discard(tweet)
                if not refs:
                    del self.gone_refs[author]
                self.mutations += 1

    def gone_count(self, author: UserId) -> int:
        return len(self.gone_refs.get(author, ()))

    # -- classes -------------------------------------------------------------------

    def user_class(self, u: UserId) -> UserClass:
        return self.classes.get(u, UserClass.UNKNOWN)

    def set_class(self, u: UserId, new: UserClass, at: Timestamp) -> bool:
        """Record a class transition. No-op (False) when the class is unchanged."""
        with self._lock:
            old = self.user_class(u)
            if old == new:
                return False
            self.classes[u] = new
            self.class_history.append(ClassTransition(user=u, old=old, new=new, at=at))
            self.mutations += 1
            return True

    def users_in_class(self, *classes: UserClass) -> list[UserId]:
        wanted = set(classes)
        return sorted(u for u, c in self.classes.items() if c in wanted)

    # -- bulk read views ---------------------------------------------------------------

    def all_favorites(self) -> list[FavoriteRecord]:
        return [self.favorites[k] for k in sorted(self.favorites)]

    def favoriters_of(self, author: UserId) -> set[UserId]:
        return self._favorites_by_author.get(author, set())

    def members_by_list(self) -> dict[int, set[UserId]]:
        out: dict[int, set[UserId]] = {}
        for list_id, member in self.memberships:
            out.setdefault(list_id, set()).add(member)
        return out

    def all_crawl_states(self) -> list[CrawlState]:
        return [self.crawl_states[u] for u in sorted(self.crawl_states)]

    # -- crawl state -----------------------------------------------------------------

    def get_crawl_state(self, u: UserId) -> CrawlState:
        return self.crawl_states.get(u) or CrawlState(user=u)

    def put_crawl_state(self, state: CrawlState) -> None:
        with self._lock:
            self.crawl_states[state.user] = state
            self.mutations += 1

    # -- import / export ---------------------------------------------------------------

    # collection name -> (iter canonical records, insert record, ids-only projection)
    def _collections(self) -> dict[str, tuple[Callable, Callable, Callable]]:
        return {
            "users": (
                lambda: (
                    model.to_record(s)
                    for u in sorted(self.snapshots)
                    for s in self.snapshots[u]
                ),
                lambda rec: self._raw_snapshot(model.from_record(UserSnapshot, rec)),
                lambda rec: {"id": rec["id"], "observed_at": rec["observed_at"]},
            ),
            "tweets": (
                lambda: (model.to_record(self.tweets[i]) for i in sorted(self.tweets)),
                lambda rec: self.put_tweet(model.from_record(Tweet, rec)),
                lambda rec: {"id": rec["id"], "author": rec["author"]},
            ),
            "follow": (
                lambda: (model.to_record(e) for e in self.follow_log),
                lambda rec: self.append_follow(model.from_record(FollowEdge, rec)),
                lambda rec: rec,
            ),
            "followscans": (
                lambda: (model.to_record(s) for s in self.follow_scans),
                lambda rec: self.record_follow_scan(model.from_record(FollowScan, rec)),
                lambda rec: rec,
            ),
            "lists": (
                lambda: (model.to_record(self.lists[i]) for i in sorted(self.lists)),
                lambda rec: self.put_list(model.from_record(ListRecord, rec)),
                lambda rec: {"id": rec["id"], "owner": rec["owner"]},
            ),
            "memberships": (
                lambda: (
                    model.to_record(self.memberships[k]) for k in sorted(self.memberships)
                ),
                lambda rec: self.put_membership(model.from_record(ListMembership, rec)),
                lambda rec: rec,
            ),
            "subscriptions": (
                lambda: (
                    model.to_record(self.subscriptions[k])
                    for k in sorted(self.subscriptions)
                ),
                lambda rec: self.put_subscription(model.from_record(ListSubscription, rec)),
                lambda rec: rec,
            ),
            "favorites": (
                lambda: (
                    model.to_record(self.favorites[k]) for k in sorted(self.favorites)
                ),
                lambda rec: self.put_favorite(model.from_record(FavoriteRecord, rec)),
                lambda rec: rec,
            ),
            "trends": (
                lambda: (model.to_record(t) for t in self.trends),
                lambda rec: self.put_trend(model.from_record(TrendSnapshot, rec)),
                lambda rec: {"place": rec["place"], "observed_at": rec["observed_at"]},
            ),
            "shorturl": (
                lambda: (
                    {"short": s, "expanded": self.shorturl[s]}
                    for s in sorted(self.shorturl)
                ),
                lambda rec: self.shorturl.__setitem__(rec["short"], rec["expanded"]),
                lambda rec: rec,
            ),
            "classes": (
                lambda: (
                    {"user": u, "class": self.classes[u].value}
                    for u in sorted(self.classes)
                ),
                lambda rec: self.classes.__setitem__(rec["user"], UserClass(rec["class"])),
                lambda rec: rec,
            ),
            "classhistory": (
                lambda: (model.to_record(t) for t in self.class_history),
                lambda rec: self.class_history.append(
                    model.from_record(ClassTransition, rec)
                ),
                lambda rec: rec,
            ),
            "crawlstate": (
                lambda: (
                    model.to_record(self.crawl_states[u])
                    for u in sorted(self.crawl_states)
                ),
                lambda rec: self.put_crawl_state(model.from_record(CrawlState, rec)),
                lambda rec: {"user": rec["user"]},
            ),
            "gonerefs": (
                lambda: (
                    model.to_record(GoneRef(author=a, tweet=t))
                    for a in sorted(self.gone_refs)
                    for t in sorted(self.gone_refs[a])
                ),
                lambda rec: self.add_gone_ref(rec["author"], rec["tweet"]),
                lambda rec: rec,
            ),
        }

    COLLECTIONS = (
        "users",
        "tweets",
        "follow",
        "followscans",
        "lists",
        "memberships",
        "subscriptions",
        "favorites",
        "trends",
        "shorturl",
        "classes",
        "classhistory",
        "crawlstate",
        "gonerefs",
    )

    def _raw_snapshot(self, s: UserSnapshot) -> None:
        # import path: replay history verbatim, bypassing the dedup rule
        self.snapshots[s.id].append(s)
        self.screen_name_index[s.screen_name.lower()] = s.id

    def export_collection(
        self, name: str, path: str | Path, ids_only: bool = False
    ) -> int:
        """Write one collection as JSON lines in canonical key order.

        ids_only drops content fields and keeps identifiers, for exports that
        must not carry text or profile details.
        """
        records, _, project = self._collections()[name]
        n = 0
        with open(path, "w", encoding="utf-8") as fh:
            for rec in records():
                if ids_only:
                    rec = project(rec)
                fh.write(dumps(rec) + "\n")
                n += 1
        return n

    def import_collection(self, name: str, path: str | Path) -> int:
        _, insert, _ = self._collections()[name]
        n = 0
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    insert(json.loads(line))
                    n += 1
        return n

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for name in self.COLLECTIONS:
            self.export_collection(name, directory / f"{name}.jsonl")

    @classmethod
    def load(cls, directory: str | Path) -> "Store":
        directory = Path(directory)
        store = cls()
        for name in cls.COLLECTIONS:
            path = directory / f"{name}.jsonl"
            if path.exists():
                store.import_collection(name, path)
        return store

    # convenience used all over the test suite
    def all_tweets(self) -> Iterable[Tweet]:
        return (self.tweets[i] for i in sorted(self.tweets))
