import json

import pytest
from hypothesis import given, strategies as st

from langcrawl.model import (
    MAX_ID,
    CrawlState,
    FavoriteRecord,
    MissingField,
    NonPositiveId,
    SelfReference,
    Tweet,
    UserClass,
    UserSnapshot,
    from_record,
    to_record,
    validate_tweet,
)

RAW = {
    "id": 10,
    "author": 3,
    "created_at": 1000,
    "text": "hi",
    "lang": "en",
}


def test_validate_tweet_minimal():
    t = validate_tweet(RAW)
    assert t == Tweet(id=10, author=3, created_at=1000, text="hi", lang="en")


def test_validate_tweet_refs_and_entities():
    t = validate_tweet(
        {
            **RAW,
            "reply_to": [4, 9],
            "mentions": [9],
            "hashtags": ["a"],
            "urls": [["t.co/x", "http://x.gr/p"]],
        }
    )
    assert t.reply_to == (4, 9)
    assert t.mentions == (9,)
    assert t.urls == (("t.co/x", "http://x.gr/p"),)


@pytest.mark.parametrize("missing", ["id", "author", "created_at", "text", "lang"])
def test_validate_tweet_missing_field(missing):
    raw = {k: v for k, v in RAW.items() if k != missing}
    with pytest.raises(MissingField):
        validate_tweet(raw)


@pytest.mark.parametrize("bad", [0, -1, MAX_ID + 1])
def test_validate_tweet_id_bounds(bad):
    with pytest.raises(NonPositiveId):
        validate_tweet({**RAW, "id": bad})
    with pytest.raises(NonPositiveId):
        validate_tweet({**RAW, "author": bad})


def test_validate_tweet_max_id_ok():
    assert validate_tweet({**RAW, "id": MAX_ID}).id == MAX_ID


def test_validate_tweet_self_reference():
    for name in ("retweet_of", "reply_to", "quote_of"):
        with pytest.raises(SelfReference):
            validate_tweet({**RAW, name: [10, 3]})


ids = st.integers(min_value=1, max_value=MAX_ID)
refs = st.none() | st.tuples(ids, ids)
texts = st.text(max_size=40)

tweets = st.builds(
    Tweet,
    id=ids,
    author=ids,
    created_at=st.integers(min_value=0, max_value=2**40),
    text=texts,
    lang=st.sampled_from(["el", "en", "und"]),
    retweet_of=refs,
    reply_to=refs,
    quote_of=refs,
    mentions=st.tuples() | st.tuples(ids) | st.tuples(ids, ids),
    hashtags=st.lists(st.text(min_size=1, max_size=8), max_size=3).map(tuple),
    urls=st.lists(st.tuples(texts, texts), max_size=2).map(tuple),
    source_client=texts,
    truncated=st.booleans(),
)


@given(tweets)
def test_tweet_record_round_trip(t):
    rec = json.loads(json.dumps(to_record(t)))
    assert from_record(Tweet, rec) == t


@given(tweets.filter(lambda t: t.id not in {r[0] for r in (t.retweet_of, t.reply_to, t.quote_of) if r}))
def test_validate_accepts_own_records(t):
    assert validate_tweet(to_record(t)) == t


def test_snapshot_round_trip():
    s = UserSnapshot(
        id=1,
        screen_name="Maria",
        name="Μαρία",
        bio="",
        location="Αθήνα",
        time_zone="Athens",
        ui_lang="el",
        profile_url="",
        created_at=5,
        tweet_count=2,
        followers_count=0,
        friends_count=1,
        favourites_count=0,
        protected=False,
        verified=True,
        observed_at=9,
    )
    assert from_record(UserSnapshot, json.loads(json.dumps(to_record(s)))) == s


def test_crawl_state_and_favorite_round_trip():
    st_ = CrawlState(user=4, last_crawled_at=7, est_rate=1.5)
    assert from_record(CrawlState, to_record(st_)) == st_
    fav = FavoriteRecord(user=1, tweet=2, tweet_author=3, observed_at=4)
    assert from_record(FavoriteRecord, to_record(fav)) == fav


def test_user_class_values_round_trip():
    for c in UserClass:
        assert UserClass(c.value) is c
