"""Deterministic synthetic corpora for tests, demos and the bundled fixture.

The "followee-predictive" corpus is built so that inactive users carry no
topical keywords of their own; what they accept is predictable only from the
users they follow and interact with.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from pathlib import Path

from .dataset import Dataset, build_dataset, dump_dataset

TOPIC_CATEGORIES = (
    "sports.football",
    "science-and-technology.internet.mobile",
    "music.pop",
    "film.drama",
    "food.cooking",
)
AMBIGUOUS_KEYWORD = 99
AMBIGUOUS_TOPICS = (1, 4)
START_TIME = 1_320_000_000
DAY = 86400

FIXTURE_CONFIG = """\
# thresholds tuned for a 200-user corpus; support is averaged over every keyword-bearing user
supp_local = 0.025
supp_global = 0.025
conf_local = 0.6
conf_global = 0.6
n_sites = 4
n_polling_sites = 2
seed = 7
"""


def topic_keywords(topic: int) -> list[int]:
    kws = [10 * topic + 1, 10 * topic + 2, 10 * topic + 3]
    if topic in AMBIGUOUS_TOPICS:
        kws.append(AMBIGUOUS_KEYWORD)
    return kws


@dataclass
class FixtureSpec:
    n_users: int = 200
    items_per_topic: int = 6
    n_noise_keywords: int = 60
    records_per_user: tuple[int, int] = (6, 10)
    seed: int = 2012


def make_followee_predictive(spec: FixtureSpec = FixtureSpec()) -> Dataset:
    rng = random.Random(spec.seed)
    n_topics = len(TOPIC_CATEGORIES)
    noise = list(range(500, 500 + spec.n_noise_keywords))

    items = {}
    item_topic = {}
    next_item = 1001
    for t, cat in enumerate(TOPIC_CATEGORIES):
        for _ in range(spec.items_per_topic):
            kws = rng.sample(topic_keywords(t), 2 if t not in AMBIGUOUS_TOPICS else 3)
            items[next_item] = (cat, sorted(kws))
            item_topic[next_item] = t
            next_item += 1

    user_ids = list(range(1, spec.n_users + 1))
    topic = {u: rng.randrange(n_topics) for u in user_ids}
    role = {}
    for u in user_ids:
        r = rng.random()
        role[u] = "active" if r < 0.4 else "inactive" if r < 0.8 else "fake"

    users = {}
    for u in user_ids:
        kws: dict[int, float] = {}
        if role[u] == "active" or (role[u] == "fake" and rng.random() < 0.5):
            for k in topic_keywords(topic[u]):
                kws[k] = rng.uniform(0.8, 1.2)
            kws[rng.choice(noise)] = rng.uniform(0.1, 0.3)
        elif role[u] == "inactive" and rng.random() < 0.5:
            kws[rng.choice(noise)] = 1.0
        tweets = {
            "active": rng.randint(150, 600),
            "inactive": rng.randint(20, 90),
            "fake": rng.randint(0, 400),
        }[role[u]]
        users[u] = (tweets, kws)
    for iid in items:
        users[iid] = (rng.randint(200, 2000), {})

    by_topic_role: dict[tuple[int, str], list[int]] = {}
    for u in user_ids:
        by_topic_role.setdefault((topic[u], role[u]), []).append(u)

    follows = set()
    interactions = []
    for u in user_ids:
        same_active = [v for v in by_topic_role.get((topic[u], "active"), []) if v != u]
        same_inactive = [v for v in by_topic_role.get((topic[u], "inactive"), []) if v != u]
        others = [v for v in user_ids if v != u]
        picks = set()
        if role[u] == "inactive" and same_inactive and rng.random() < 0.4:
            # reach the topic only through a second hop
            mid = rng.choice(same_inactive)
            picks.add(mid)
            if same_active:
                far = rng.choice(same_active)
                follows.add((mid, far))
                interactions.append((u, far, rng.randint(1, 4), rng.randint(0, 3), rng.randint(0, 3)))
        else:
            picks.update(rng.sample(same_active, min(len(same_active), rng.randint(2, 4))))
        picks.update(rng.sample(others, 1))
        for v in sorted(picks):
            follows.add((u, v))
            if role[u] == "fake":
                continue
            interactions.append((u, v, rng.randint(3, 9), rng.randint(2, 8), rng.randint(1, 7)))
        if role[u] == "fake" and rng.random() < 0.5:
            v = rng.choice(sorted(picks))
            interactions.append((u, v, rng.randint(0, 5), rng.randint(0, 5), rng.randint(0, 5)))

    # item popularity: users follow a few items of their topic, skewed towards low ids
    for u in user_ids:
        pool = [i for i in items if item_topic[i] == topic[u]]
        weights = [1.0 / (1 + rank) for rank in range(len(pool))]
        for i in set(rng.choices(pool, weights=weights, k=2)):
            follows.add((u, i))

    records = []
    all_items = sorted(items)
    for u in user_ids:
        followed = {b for a, b in follows if a == u}
        pool_same = [i for i in all_items if item_topic[i] == topic[u] and i not in followed]
        pool_other = [i for i in all_items if item_topic[i] != topic[u]]
        n = rng.randint(*spec.records_per_user)
        for _ in range(n):
            if pool_same and rng.random() < 0.4:
                iid = rng.choice(pool_same)
                result = 1 if rng.random() < 0.85 else -1
            else:
                iid = rng.choice(pool_other)
                result = 1 if rng.random() < 0.05 else -1
            ts = START_TIME + rng.randrange(30 * DAY)
            records.append((u, iid, result, ts))

    return build_dataset(users, items, sorted(follows), interactions, records)


def make_all_fake(n_users: int = 30, n_items: int = 12, seed: int = 5) -> Dataset:
    """Every user falls below the interaction threshold and has no keywords."""
    rng = random.Random(seed)
    items = {1000 + j: (TOPIC_CATEGORIES[j % len(TOPIC_CATEGORIES)], topic_keywords(j % len(TOPIC_CATEGORIES))[:2]) for j in range(n_items)}
    user_ids = list(range(1, n_users + 1))
    users = {u: (rng.randint(0, 300), {}) for u in user_ids}
    follows = set()
    for u in user_ids:
        for i in rng.sample(sorted(items), rng.randint(0, 3)):
            follows.add((u, i))
        v = rng.choice(user_ids)
        if v != u:
            follows.add((u, v))
    interactions = [(u, v, 1, 1, 1) for u, v in sorted(follows) if v in users and rng.random() < 0.5]
    records = [
        (u, rng.choice(sorted(items)), rng.choice((1, -1)), START_TIME + rng.randrange(10 * DAY))
        for u in user_ids for _ in range(4)
    ]
    return build_dataset(users, items, sorted(follows), interactions, records)


def write_fixture(directory: str | os.PathLike, dataset: Dataset | None = None, config_text: str = FIXTURE_CONFIG) -> Path:
    d = Path(directory)
    dump_dataset(dataset if dataset is not None else make_followee_predictive(), d)
    (d / "pipeline.conf").write_text(config_text, encoding="utf-8")
    return d


def bundled_fixture_dir() -> Path:
    return Path(__file__).parent / "data" / "followee_fixture"
