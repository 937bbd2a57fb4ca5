"""Minimal in-memory relational core.

Relations are immutable sets of typed rows over a named-attribute schema.
Values are a tagged union realized directly as Python types: ``int``,
``str``, or :class:`GroupKey`.  The module also owns :class:`ItemUniverse`,
the frozen ascending dictionary between external item keys and the dense
indices 1..n that the rank codec works on.
"""
from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from typing import Any, Iterable, Optional, Sequence, Tuple

from .errors import (
    DuplicateKeyError,
    EmptyUniverseError,
    InvalidGroupKeyError,
    SchemaError,
    TypeMismatchError,
    UnknownItemError,
)

# Conventional column names for bridge-shaped relations.
GROUP_PK = "Group_PK"
ITEM_PK = "Item_PK"
GROUP_RANK = "groupRank"

Row = Tuple[Any, ...]


@dataclass(frozen=True, order=True)
class GroupKey:
    """Compressed identity of one group: lexicographic rank h plus size k."""

    h: int
    k: int

    def __post_init__(self):
        if not isinstance(self.h, int) or self.h < 1:
            raise InvalidGroupKeyError(f"h must be a positive integer, got {self.h!r}")
        if not isinstance(self.k, int) or self.k < 1:
            raise InvalidGroupKeyError(f"k must be a positive integer, got {self.k!r}")


def _value_sort_token(value):
    # Total order across the value tags so mixed-type rows still sort.
    if isinstance(value, GroupKey):
        return (2, (value.h, value.k))
    if isinstance(value, int):
        return (0, value)
    return (1, str(value))


@dataclass(frozen=True)
class Schema:
    """Ordered attribute names plus the subset forming the primary key."""

    attributes: Tuple[str, ...]
    key: Tuple[str, ...] = ()

    def __post_init__(self):
        attrs = tuple(self.attributes)
        key = tuple(self.key)
        object.__setattr__(self, "attributes", attrs)
        object.__setattr__(self, "key", key)
        if not attrs:
            raise SchemaError("schema needs at least one attribute")
        seen = set()
        for name in attrs:
            if not isinstance(name, str) or not name:
                raise SchemaError(f"attribute name must be a non-empty string, got {name!r}")
            if name in seen:
                raise SchemaError(f"duplicate attribute {name!r}")
            seen.add(name)
        if len(set(key)) != len(key):
            raise SchemaError(f"duplicate attribute in key {key!r}")
        for name in key:
            if name not in seen:
                raise SchemaError(f"key attribute {name!r} not in schema")

    def index_of(self, attr: str) -> int:
        try:
            return self.attributes.index(attr)
        except ValueError:
            raise SchemaError(f"unknown attribute {attr!r}; have {list(self.attributes)}") from None


@dataclass(frozen=True)
class Relation:
    """Immutable set-semantics relation: schema plus rows."""

    schema: Schema
    rows: frozenset

    def __post_init__(self):
        rows = frozenset(tuple(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        width = len(self.schema.attributes)
        for row in rows:
            if len(row) != width:
                raise SchemaError(f"row {row!r} has {len(row)} values, schema has {width}")
        if self.schema.key:
            idx = [self.schema.index_of(a) for a in self.schema.key]
            seen = {}
            for row in rows:
                kv = tuple(row[i] for i in idx)
                if kv in seen:
                    raise DuplicateKeyError(
                        f"rows {seen[kv]!r} and {row!r} share primary key {kv!r}")
                seen[kv] = row

    @classmethod
    def build(cls, attributes: Sequence[str], rows: Iterable[Sequence[Any]],
              key: Sequence[str] = ()) -> "Relation":
        return cls(Schema(tuple(attributes), tuple(key)), frozenset(tuple(r) for r in rows))

    @property
    def attributes(self) -> Tuple[str, ...]:
        return self.schema.attributes

    def index_of(self, attr: str) -> int:
        return self.schema.index_of(attr)

    def column(self, attr: str) -> list:
        i = self.index_of(attr)
        return [row[i] for row in self.rows]

    def sorted_rows(self) -> list:
        """Rows in canonical order: primary-key attributes first, then the rest."""
        key_idx = [self.index_of(a) for a in self.schema.key]
        order = key_idx + [i for i in range(len(self.attributes)) if i not in key_idx]
        return sorted(self.rows,
                      key=lambda row: tuple(_value_sort_token(row[i]) for i in order))

    def __len__(self) -> int:
        return len(self.rows)


def _column_tags(rel: Relation, attr: str) -> set:
    i = rel.index_of(attr)
    return {type(row[i]) for row in rel.rows}


def natural_join(r: Relation, s: Relation) -> Relation:
    """All combinations of r-rows and s-rows agreeing on every shared attribute.

    With no shared attribute this degenerates to the Cartesian product.
    """
    shared = [a for a in r.attributes if a in s.attributes]
    for attr in shared:
        tags = _column_tags(r, attr) | _column_tags(s, attr)
        if len(tags) > 1:
            names = sorted(t.__name__ for t in tags)
            raise TypeMismatchError(f"shared attribute {attr!r} mixes value tags {names}")
    out_attrs = r.attributes + tuple(a for a in s.attributes if a not in shared)
    r_shared_idx = [r.index_of(a) for a in shared]
    s_shared_idx = [s.index_of(a) for a in shared]
    s_keep_idx = [s.index_of(a) for a in s.attributes if a not in shared]

    by_key: dict = {}
    for row in s.rows:
        by_key.setdefault(tuple(row[i] for i in s_shared_idx), []).append(row)
    out = set()
    for r_row in r.rows:
        for s_row in by_key.get(tuple(r_row[i] for i in r_shared_idx), ()):
            out.add(r_row + tuple(s_row[i] for i in s_keep_idx))
    return Relation(Schema(out_attrs), frozenset(out))


def project(r: Relation, attrs: Sequence[str]) -> Relation:
    """Set-semantics projection; duplicate rows collapse."""
    idx = [r.index_of(a) for a in attrs]
    rows = {tuple(row[i] for i in idx) for row in r.rows}
    key = r.schema.key if r.schema.key and set(r.schema.key) <= set(attrs) else ()
    return Relation(Schema(tuple(attrs), key), frozenset(rows))


def row_set(rel: Relation, attrs: Optional[Sequence[str]] = None) -> frozenset:
    """Rows as tuples in the given attribute order (defaults to the relation's own)."""
    if attrs is None:
        return rel.rows
    idx = [rel.index_of(a) for a in attrs]
    return frozenset(tuple(row[i] for i in idx) for row in rel.rows)


def same_relation(r: Relation, s: Relation) -> bool:
    """Equality as sets of attribute-to-value mappings; column order is ignored."""
    if set(r.attributes) != set(s.attributes):
        return False
    return r.rows == row_set(s, r.attributes)


@dataclass(frozen=True)
class ItemUniverse:
    """Frozen ascending dictionary between external item keys and dense 1..n.

    Dense index order agrees with ascending external-key order, and a content
    digest (``version``) binds compressed artifacts to the exact key list.
    """

    items: Tuple[Any, ...]

    def __post_init__(self):
        items = tuple(self.items)
        if not items:
            raise EmptyUniverseError("an item universe needs at least one item")
        tags = {type(k) for k in items}
        if len(tags) > 1:
            names = sorted(t.__name__ for t in tags)
            raise TypeMismatchError(f"item keys mix value tags {names}")
        items = tuple(sorted(items))
        for a, b in zip(items, items[1:]):
            if a == b:
                raise DuplicateKeyError(f"duplicate item key {a!r}")
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "_forward", {key: j for j, key in enumerate(items, start=1)})

    @property
    def n(self) -> int:
        return len(self.items)

    def index_of(self, key) -> int:
        """Dense index in 1..n of an external item key."""
        try:
            return self._forward[key]
        except (KeyError, TypeError):
            raise UnknownItemError(f"item key {key!r} not in universe of {self.n} items") from None

    def key_of(self, index: int):
        """External item key behind a dense index in 1..n."""
        if not isinstance(index, int) or not 1 <= index <= self.n:
            raise UnknownItemError(f"dense index {index!r} outside 1..{self.n}")
        return self.items[index - 1]

    @property
    def version(self) -> str:
        """Digest of the ordered key list; differs whenever any key differs."""
        body = f"n={self.n}\n" + "".join(f"{key}\n" for key in self.items)
        return hashlib.sha256(body.encode("utf-8")).hexdigest()[:12]


def build_universe(items: Relation, key_attribute: str) -> ItemUniverse:
    """Universe over the distinct values of one item-relation column.

    Dense indices are assigned in ascending external-key order, so the
    universe is independent of row order in ``items``.
    """
    values = items.column(key_attribute)
    if not values:
        raise EmptyUniverseError("cannot build a universe from an empty item relation")
    counts = Counter(values)
    dupes = [key for key, c in counts.items() if c > 1]
    if dupes:
        raise DuplicateKeyError(f"duplicate item key {dupes[0]!r} in column {key_attribute!r}")
    return ItemUniverse(tuple(values))
