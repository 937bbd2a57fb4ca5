"""Lossless rank encoding for many-to-many group/item bridge tables.

Each group of k items over an ordered universe of n is stored as the single
pair (h, k), where h is the group's 1-based lexicographic rank among all
C(n, k) k-combinations.  The package provides the rank codec, a small
relational core, the join operators that reconstruct every answer the classic
three-way join would give, CSV serialization, and a command-line interface.
"""
from .bridgeio import (
    DIRECT,
    GROUPED,
    CompressedBridge,
    CompressionReport,
    compress_bridge,
    compression_stats,
    decompress_bridge,
    parse_group_key,
    read_relation_csv,
    read_universe_manifest,
    report_from_counts,
    serialize_group_key,
    write_relation_csv,
    write_universe_manifest,
)
from .combinat import binomial, enumerate_combinations, rank_group, unrank_group
from .errors import (
    CombridgeError,
    CorruptGroupKeyError,
    DuplicateKeyError,
    EmptyBridgeError,
    EmptyUniverseError,
    FormatError,
    GroupKeyParseError,
    InvalidCombinationError,
    InvalidGroupKeyError,
    InvalidSizeError,
    RankOutOfRangeError,
    ReferentialViolationError,
    SchemaError,
    StaleUniverseError,
    TypeMismatchError,
    UnknownItemError,
)
from .operators import (
    RankColumnRef,
    classic_three_way_join,
    expand_group_key,
    rank_inverse_join,
    rank_join_direct,
    rank_join_grouped,
)
from .relmodel import (
    GROUP_PK,
    GROUP_RANK,
    ITEM_PK,
    GroupKey,
    ItemUniverse,
    Relation,
    Schema,
    build_universe,
    natural_join,
    project,
    row_set,
    same_relation,
)
from .synth import generate_dataset

__version__ = "0.1.0"

__all__ = [
    "DIRECT",
    "GROUPED",
    "GROUP_PK",
    "GROUP_RANK",
    "ITEM_PK",
    "CombridgeError",
    "CompressedBridge",
    "CompressionReport",
    "CorruptGroupKeyError",
    "DuplicateKeyError",
    "EmptyBridgeError",
    "EmptyUniverseError",
    "FormatError",
    "GroupKey",
    "GroupKeyParseError",
    "InvalidCombinationError",
    "InvalidGroupKeyError",
    "InvalidSizeError",
    "ItemUniverse",
    "RankColumnRef",
    "RankOutOfRangeError",
    "ReferentialViolationError",
    "Relation",
    "Schema",
    "SchemaError",
    "StaleUniverseError",
    "TypeMismatchError",
    "UnknownItemError",
    "binomial",
    "build_universe",
    "classic_three_way_join",
    "compress_bridge",
    "compression_stats",
    "decompress_bridge",
    "enumerate_combinations",
    "expand_group_key",
    "generate_dataset",
    "natural_join",
    "parse_group_key",
    "project",
    "rank_group",
    "rank_inverse_join",
    "rank_join_direct",
    "rank_join_grouped",
    "read_relation_csv",
    "read_universe_manifest",
    "report_from_counts",
    "row_set",
    "same_relation",
    "serialize_group_key",
    "unrank_group",
    "write_relation_csv",
    "write_universe_manifest",
]
