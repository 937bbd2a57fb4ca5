"""Synthetic group/item datasets for benchmarks and end-to-end checks.

Group widths follow a bundled reference histogram from a multivalued-
dimension workload (mean width close to 4); the top bucket is open-ended
and is drawn uniformly from widths 11..15.  Scaling keeps the shape:
``scale=1000`` keeps roughly one group per thousand.
"""
from __future__ import annotations

import random

from .relmodel import GROUP_PK, ITEM_PK, Relation

# width -> group count at full scale; the open top bucket is separate.
WIDTH_HISTOGRAM = {
    1: 102747,
    2: 185211,
    3: 130781,
    4: 83743,
    5: 69580,
    6: 53660,
    7: 32723,
    8: 20036,
    9: 13506,
    10: 9402,
}
OPEN_BUCKET_COUNT = 39342
OPEN_BUCKET_WIDTHS = (11, 15)

ITEM_LABEL = "ItemLabel"


def scaled_group_widths(scale: int, rng: random.Random) -> list:
    """Group widths at 1/scale of the reference histogram, rounded per bucket."""
    if scale < 1:
        raise ValueError(f"scale must be at least 1, got {scale}")
    widths = []
    for width in sorted(WIDTH_HISTOGRAM):
        widths.extend([width] * round(WIDTH_HISTOGRAM[width] / scale))
    lo, hi = OPEN_BUCKET_WIDTHS
    widths.extend(rng.randint(lo, hi) for _ in range(round(OPEN_BUCKET_COUNT / scale)))
    return widths


def generate_dataset(n_items: int = 700, scale: int = 1000, seed: int = 0,
                     first_item_key: int = 1001):
    """Deterministic (items, bridge) relation pair for a given seed.

    Items get consecutive integer keys starting at ``first_item_key`` (offset
    from 1 so dense indices and external keys can never be confused); each
    group samples its members uniformly without replacement.
    """
    rng = random.Random(seed)
    widths = scaled_group_widths(scale, rng)
    if not widths:
        raise ValueError(f"scale {scale} leaves no groups to generate")
    if max(widths) > n_items:
        raise ValueError(
            f"universe of {n_items} items cannot host a group of {max(widths)}")
    item_keys = [first_item_key + j for j in range(n_items)]
    items = Relation.build(
        (ITEM_PK, ITEM_LABEL),
        [(key, f"item-{key}") for key in item_keys],
        key=(ITEM_PK,),
    )
    rows = []
    for gpk, width in enumerate(widths, start=1):
        for key in rng.sample(item_keys, width):
            rows.append((gpk, key))
    bridge = Relation.build((GROUP_PK, ITEM_PK), rows, key=(GROUP_PK, ITEM_PK))
    return items, bridge
