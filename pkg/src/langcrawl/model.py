"""Domain records shared by the crawler, the store and the miners.

Everything here is an immutable value: records are frozen dataclasses with
tuple fields, timestamps are UTC epoch seconds (int), and ids are positive
64-bit ints. Tweet ids are assigned so that id order equals creation order,
which the paging and interval code relies on throughout.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, fields
from typing import Any, Iterator

UserId = int
TweetId = int
ListId = int
Timestamp = int

MAX_ID = (1 << 64) - 1


class TweetError(ValueError):
    """Base for raw-tweet validation failures."""


class MissingField(TweetError):
    pass


class NonPositiveId(TweetError):
    pass


class SelfReference(TweetError):
    pass


class UserClass(enum.Enum):
    """Crawl status of a user account.

    Unknown: merely referenced, never tracked. Tracked: being crawled but not
    yet classified. Target: confirmed member of the target language community
    (sticky). Stopped: confirmed outsider, never crawled or re-seeded again.
    Suspended/Dead/Protected mirror what the platform reports.
    """

    UNKNOWN = "unknown"
    TRACKED = "tracked"
    TARGET = "target"
    STOPPED = "stopped"
    SUSPENDED = "suspended"
    DEAD = "dead"
    PROTECTED = "protected"


# Classes that must never be (re-)seeded into the tracked set.
UNSEEDABLE = frozenset(
    {UserClass.STOPPED, UserClass.DEAD, UserClass.SUSPENDED, UserClass.PROTECTED}
)


@dataclass(frozen=True, slots=True)
class UserSnapshot:
    """One observation of a user profile at a point in time."""

    id: UserId
    screen_name: str
    name: str
    bio: str
    location: str
    time_zone: str
    ui_lang: str
    profile_url: str
    created_at: Timestamp
    tweet_count: int
    followers_count: int
    friends_count: int
    favourites_count: int
    protected: bool
    verified: bool
    observed_at: Timestamp


@dataclass(frozen=True, slots=True)
class Tweet:
    id: TweetId
    author: UserId
    created_at: Timestamp
    text: str
    lang: str  # "und" when the platform could not tell
    retweet_of: tuple[TweetId, UserId] | None = None
    reply_to: tuple[TweetId, UserId] | None = None
    quote_of: tuple[TweetId, UserId] | None = None
    mentions: tuple[UserId, ...] = ()
    hashtags: tuple[str, ...] = ()
    urls: tuple[tuple[str, str], ...] = ()  # (short, expanded)
    source_client: str = ""
    truncated: bool = False


@dataclass(frozen=True, slots=True)
class FollowEdge:
    src: UserId  # follower
    dst: UserId  # followee
    observed_at: Timestamp


@dataclass(frozen=True, slots=True)
class FollowScan:
    """Marker for one completed friends/followers enumeration.

    kind is "friends" or "followers"; subject is the user whose neighbor set
    was enumerated. Needed to give the append-only edge log scan boundaries.
    """

    kind: str
    subject: UserId
    at: Timestamp


@dataclass(frozen=True, slots=True)
class ListRecord:
    id: ListId
    owner: UserId
    name: str
    member_count: int
    created_at: Timestamp


@dataclass(frozen=True, slots=True)
class ListMembership:
    list_id: ListId
    member: UserId
    observed_at: Timestamp


@dataclass(frozen=True, slots=True)
class ListSubscription:
    list_id: ListId
    subscriber: UserId
    observed_at: Timestamp


@dataclass(frozen=True, slots=True)
class FavoriteRecord:
    user: UserId  # who pressed like
    tweet: TweetId
    tweet_author: UserId
    observed_at: Timestamp


@dataclass(frozen=True, slots=True)
class TrendSnapshot:
    place: str
    observed_at: Timestamp
    trends: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class CrawlState:
    """Per-user crawl bookkeeping. Updated by replacement, never in place."""

    user: UserId
    first_seen_tweet: TweetId | None = None
    last_seen_tweet: TweetId | None = None
    first_crawled_at: Timestamp | None = None
    last_crawled_at: Timestamp | None = None
    cap_reached: bool = False
    profile_fetched_at: Timestamp | None = None
    avatar_fetched_at: Timestamp | None = None  # bookkeeping only, never fetched
    favorites_scanned_at: Timestamp | None = None
    friends_scanned_at: Timestamp | None = None
    followers_scanned_at: Timestamp | None = None
    est_rate: float = 0.0  # tweets per day


@dataclass(frozen=True, slots=True)
class ClassTransition:
    user: UserId
    old: UserClass
    new: UserClass
    at: Timestamp


@dataclass(frozen=True, slots=True)
class GoneRef:
    """A referenced tweet id the platform no longer serves."""

    author: UserId  # the user whose tweet referenced it
    tweet: TweetId


def tweet_refs(t: Tweet) -> list[tuple[str, TweetId, UserId]]:
    """All (kind, tweet id, user id) references carried by one tweet.

    A tweet can be simultaneously a retweet, a reply and a quote; each slot is
    reported independently, so the result holds at most three entries.
    """
    out = []
    if t.retweet_of is not None:
        out.append(("retweet", t.retweet_of[0], t.retweet_of[1]))
    if t.reply_to is not None:
        out.append(("reply", t.reply_to[0], t.reply_to[1]))
    if t.quote_of is not None:
        out.append(("quote", t.quote_of[0], t.quote_of[1]))
    return out


def _check_id(value: Any, what: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise NonPositiveId(f"{what} must be an int, got {value!r}")
    if not 0 < value <= MAX_ID:
        raise NonPositiveId(f"{what} out of range: {value}")
    return value


_REQUIRED = ("id", "author", "created_at", "text", "lang")
_REF_FIELDS = ("retweet_of", "reply_to", "quote_of")


def validate_tweet(raw: dict) -> Tweet:
    """Build a Tweet from a raw dict, rejecting malformed records.

    Raises MissingField if any of id/author/created_at/text/lang is absent,
    NonPositiveId for ids outside (0, 2^64), and SelfReference when a tweet
    points at itself.
    """
    for name in _REQUIRED:
        if raw.get(name) is None:
            raise MissingField(f"tweet record lacks {name!r}")
    tid = _check_id(raw["id"], "tweet id")
    author = _check_id(raw["author"], "author id")
    refs = {}
    for name in _REF_FIELDS:
        ref = raw.get(name)
        if ref is None:
            refs[name] = None
            continue
        ref_tweet = _check_id(ref[0], f"{name} tweet id")
        ref_user = _check_id(ref[1], f"{name} user id")
        if ref_tweet == tid:
            raise SelfReference(f"tweet {tid} {name} itself")
        refs[name] = (ref_tweet, ref_user)
    mentions = tuple(_check_id(m, "mention user id") for m in raw.get("mentions", ()))
    return Tweet(
        id=tid,
        author=author,
        created_at=int(raw["created_at"]),
        text=str(raw["text"]),
        lang=str(raw["lang"]),
        retweet_of=refs["retweet_of"],
        reply_to=refs["reply_to"],
        quote_of=refs["quote_of"],
        mentions=mentions,
        hashtags=tuple(raw.get("hashtags", ())),
        urls=tuple((s, e) for s, e in raw.get("urls", ())),
        source_client=str(raw.get("source_client", "")),
        truncated=bool(raw.get("truncated", False)),
    )


# -- JSON-lines mapping ------------------------------------------------------
#
# Records serialize to flat dicts whose keys are exactly the dataclass field
# names. Tuples become lists, enums their value; from_record reverses both.

def to_record(obj: Any) -> dict:
    out = {}
    for f in fields(obj):
        v = getattr(obj, f.name)
        if isinstance(v, enum.Enum):
            v = v.value
        elif isinstance(v, tuple):
            v = [list(x) if isinstance(x, tuple) else x for x in v]
        out[f.name] = v
    return out


def _tupled(v: Any) -> Any:
    if isinstance(v, list):
        return tuple(_tupled(x) for x in v)
    return v


def from_record(cls: type, rec: dict) -> Any:
    kwargs = {}
    for f in fields(cls):
        v = rec[f.name]
        if f.name in _REF_FIELDS and v is not None:
            v = (v[0], v[1])
        elif isinstance(v, list):
            v = _tupled(v)
        if cls is ClassTransition and f.name in ("old", "new"):
            v = UserClass(v)
        kwargs[f.name] = v
    return cls(**kwargs)


def iter_field_names(cls: type) -> Iterator[str]:
    for f in fields(cls):
        yield f.name
