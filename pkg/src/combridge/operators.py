"""Join operators for rank-encoded group columns.

``rank_inverse_join`` is the unary expansion of a group-key column into one
row per member item.  The two rank-join flavors compose that expansion with
natural joins so a query over the compressed form returns exactly what the
classic three-way join over (group, bridge, item) would, which is itself
provided here as the reference operator.
"""
from __future__ import annotations

from dataclasses import dataclass

from .combinat import binomial, unrank_group
from .errors import (
    CorruptGroupKeyError,
    ReferentialViolationError,
    SchemaError,
    TypeMismatchError,
)
from .relmodel import (
    GROUP_PK,
    ITEM_PK,
    GroupKey,
    ItemUniverse,
    Relation,
    Schema,
    natural_join,
)


@dataclass(frozen=True)
class RankColumnRef:
    """Names the relation column whose values are group keys to expand."""

    relation: Relation
    column: str


def expand_group_key(gk: GroupKey, universe: ItemUniverse) -> tuple:
    """Member item keys of one (h, k) group, in ascending key order."""
    n = universe.n
    if gk.k > n or gk.h > binomial(n, gk.k):
        raise CorruptGroupKeyError(
            f"group key {gk.h}:{gk.k} is impossible for a universe of {n} items")
    return tuple(universe.key_of(d) for d in unrank_group(gk.h, gk.k, n))


def rank_inverse_join(ref: RankColumnRef, universe: ItemUniverse) -> Relation:
    """Expand each distinct (h, k) in the named column into its k member rows.

    Output schema is (ref.column, Item_PK); rows with identical group keys
    contribute one expansion (set semantics).
    """
    rel = ref.relation
    col = rel.index_of(ref.column)
    out = set()
    seen = set()
    for row in rel.rows:
        gk = row[col]
        if not isinstance(gk, GroupKey):
            raise TypeMismatchError(
                f"column {ref.column!r} holds {type(gk).__name__}, expected group keys")
        if gk in seen:
            continue
        seen.add(gk)
        for item in expand_group_key(gk, universe):
            out.add((gk, item))
    return Relation(Schema((ref.column, ITEM_PK), (ref.column, ITEM_PK)), frozenset(out))


def rank_join_grouped(g_rankc: Relation, items: Relation, column: str,
                      universe: ItemUniverse) -> Relation:
    """Pair every group row with every member item row (group-table design).

    Evaluates g_rankc joined with the expansion of its own group-key column
    joined with the item relation.
    """
    if ITEM_PK not in items.attributes:
        raise SchemaError(f"item relation lacks {ITEM_PK!r}")
    expansion = rank_inverse_join(RankColumnRef(g_rankc, column), universe)
    return natural_join(g_rankc, natural_join(expansion, items))


def rank_join_direct(b_rankc: Relation, items: Relation, column: str,
                     universe: ItemUniverse) -> Relation:
    """Expand a bare group-key relation and join it with the item relation.

    ``b_rankc`` must consist of the single group-key column.
    """
    if b_rankc.attributes != (column,):
        raise SchemaError(
            f"direct-design relation must have the single column {column!r}, "
            f"got {list(b_rankc.attributes)}")
    if ITEM_PK not in items.attributes:
        raise SchemaError(f"item relation lacks {ITEM_PK!r}")
    return natural_join(rank_inverse_join(RankColumnRef(b_rankc, column), universe), items)


def classic_three_way_join(g: Relation, b: Relation, i: Relation,
                           strict: bool = True) -> Relation:
    """Reference result: group relation joined through the stored bridge to items.

    With ``strict`` (the default), a bridge row referencing a missing group or
    item raises; permissive mode silently drops such rows, which is what the
    natural joins do anyway.
    """
    for attr, rel, name in ((GROUP_PK, g, "group"), (ITEM_PK, i, "item")):
        if attr not in rel.attributes:
            raise SchemaError(f"{name} relation lacks {attr!r}")
    if set(b.attributes) != {GROUP_PK, ITEM_PK}:
        raise SchemaError(
            f"bridge must have exactly ({GROUP_PK!r}, {ITEM_PK!r}), got {list(b.attributes)}")
    if strict:
        for attr, rel, name in ((GROUP_PK, g, "group"), (ITEM_PK, i, "item")):
            known = set(rel.column(attr))
            for value in b.column(attr):
                if value not in known:
                    raise ReferentialViolationError(
                        f"bridge references {name} key {value!r} that does not exist")
    return natural_join(natural_join(g, b), i)
