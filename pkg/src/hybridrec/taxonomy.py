"""Active / inactive / fake user classification."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .dataset import Dataset


class UserClass(str, enum.Enum):
    ACTIVE = "active"
    INACTIVE = "inactive"
    FAKE = "fake"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class TaxonomyConfig:
    min_activeness: float = 100
    min_action: int = 20

    def __post_init__(self):
        if self.min_activeness < 0 or self.min_action < 0:
            raise ValueError("taxonomy thresholds must be >= 0")


def interaction_gate(interactions: int, min_action: int) -> float:
    """(1 + sgn(interactions - min_action)) / 2, with sgn(0) = 0.

    Often called ``is_fake`` although 1 means a real user.
    """
    diff = interactions - min_action
    sgn = (diff > 0) - (diff < 0)
    return (1 + sgn) / 2


def activeness(tweets: int, interactions: int, config: TaxonomyConfig = TaxonomyConfig()) -> float:
    return tweets * interaction_gate(interactions, config.min_action)


def class_from_activeness(act: float, config: TaxonomyConfig = TaxonomyConfig()) -> UserClass:
    if act == 0:
        return UserClass.FAKE
    if act >= config.min_activeness:
        return UserClass.ACTIVE
    return UserClass.INACTIVE


def user_activeness(user_id: int, dataset: Dataset, config: TaxonomyConfig = TaxonomyConfig()) -> float:
    if user_id not in dataset.users:
        raise KeyError(f"unknown user id {user_id}")
    return activeness(
        dataset.users[user_id].tweets,
        dataset.outgoing_interactions.get(user_id, 0),
        config,
    )


def classify_user(user_id: int, dataset: Dataset, config: TaxonomyConfig = TaxonomyConfig()) -> UserClass:
    """Interactions are the user's outgoing at + retweet + comment totals."""
    return class_from_activeness(user_activeness(user_id, dataset, config), config)


def classify_all(dataset: Dataset, config: TaxonomyConfig = TaxonomyConfig()) -> dict[int, UserClass]:
    return {uid: classify_user(uid, dataset, config) for uid in dataset.users}


def format_taxonomy(dataset: Dataset, config: TaxonomyConfig = TaxonomyConfig()) -> str:
    lines = []
    for uid in dataset.users:
        act = user_activeness(uid, dataset, config)
        lines.append(f"{uid}\t{class_from_activeness(act, config)}\t{act:g}\n")
    return "".join(lines)
