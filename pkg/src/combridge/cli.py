"""Command-line surface: compress, expand, join, stats, verify, gen.

All commands read and write the CSV and manifest formats from
:mod:`combridge.bridgeio`.  Exit codes: 0 success, 1 validation failure,
2 I/O or format error.  Diagnostics go to the error stream; parse-stage
failures carry file and line context.
"""
from __future__ import annotations

import functools
import os
import sys

import click

from .bridgeio import (
    DIRECT,
    GROUPED,
    CompressedBridge,
    CompressionReport,
    compress_bridge,
    compression_stats,
    decompress_bridge,
    read_relation_csv,
    read_universe_manifest,
    serialize_group_key,
    write_relation_csv,
    write_universe_manifest,
)
from .errors import CombridgeError, FormatError, SchemaError
from .operators import (
    RankColumnRef,
    classic_three_way_join,
    rank_inverse_join,
    rank_join_direct,
    rank_join_grouped,
)
from .relmodel import (
    GROUP_PK,
    GROUP_RANK,
    ITEM_PK,
    ItemUniverse,
    Relation,
    _value_sort_token,
    build_universe,
    natural_join,
    project,
    row_set,
)
from .synth import generate_dataset

EXIT_VALIDATION = 1
EXIT_FORMAT = 2

MAX_N_ENV = "COMBRIDGE_MAX_N"
DEFAULT_MAX_N = 1_000_000

_IN = click.Path(exists=True, dir_okay=False)
_OUT = click.Path(dir_okay=False, writable=True)
_MODE = click.Choice([GROUPED, DIRECT])


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _cli_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (FormatError, OSError) as exc:
            _fail(EXIT_FORMAT, str(exc))
        except CombridgeError as exc:
            _fail(EXIT_VALIDATION, str(exc))

    return wrapper


def _max_universe_size() -> int:
    raw = os.environ.get(MAX_N_ENV)
    if raw is None:
        return DEFAULT_MAX_N
    try:
        return int(raw)
    except ValueError:
        raise FormatError(f"{MAX_N_ENV} must be an integer, got {raw!r}") from None


def _guard_universe(universe: ItemUniverse) -> ItemUniverse:
    limit = _max_universe_size()
    if universe.n > limit:
        raise CombridgeError(
            f"universe has {universe.n} items, exceeding {MAX_N_ENV}={limit}")
    return universe


def _load_bridge(path) -> Relation:
    rel = read_relation_csv(path)
    for attr in (GROUP_PK, ITEM_PK):
        if attr not in rel.attributes:
            raise SchemaError(f"{path}: bridge lacks column {attr!r}")
    if rel.attributes != (GROUP_PK, ITEM_PK):
        rel = project(rel, (GROUP_PK, ITEM_PK))
    return rel


def _drop_unknown_items(bridge: Relation, universe: ItemUniverse) -> Relation:
    known = set(universe.items)
    idx = bridge.index_of(ITEM_PK)
    kept = {row for row in bridge.rows if row[idx] in known}
    return Relation.build(bridge.attributes, kept)


def _echo_report(report: CompressionReport, human: bool = False) -> None:
    lines = report.as_lines()
    if human:
        pairs = [line.split("=", 1) for line in lines]
        width = max(len(name) for name, _ in pairs)
        for name, value in pairs:
            click.echo(f"{name.ljust(width)}  {value}")
        click.echo("")
    for line in lines:
        click.echo(line)


def _first_divergence(expected: frozenset, actual: frozenset,
                      expected_label: str, actual_label: str):
    def smallest(rows):
        return min(rows, key=lambda row: tuple(_value_sort_token(v) for v in row))

    missing = expected - actual
    extra = actual - expected
    if missing:
        return f"row {smallest(missing)!r} in {expected_label} but not in {actual_label}"
    if extra:
        return f"row {smallest(extra)!r} in {actual_label} but not in {expected_label}"
    return None


@click.group()
@click.version_option(package_name="combridge", prog_name="combridge")
def main():
    """Rank-encode many-to-many group/item bridge tables and query them back."""


@main.command()
@click.argument("items_csv", type=_IN)
@click.argument("bridge_csv", type=_IN)
@click.option("--mode", type=_MODE, default=GROUPED, show_default=True)
@click.option("--out-bridge", type=_OUT, required=True, help="Compressed bridge CSV.")
@click.option("--out-universe", type=_OUT, required=True, help="Universe manifest.")
@click.option("--out-correspondence", type=_OUT, default=None,
              help="Group_PK to groupRank sidecar (direct mode; defaults to "
                   "<out-bridge>.corr.csv).")
@click.option("--strict/--permissive", "strict", default=True, show_default=True,
              help="Whether bridge rows naming unknown items abort or are dropped.")
@_cli_errors
def compress(items_csv, bridge_csv, mode, out_bridge, out_universe,
             out_correspondence, strict):
    """Encode BRIDGE_CSV against ITEMS_CSV and print the size report."""
    items = read_relation_csv(items_csv)
    bridge = _load_bridge(bridge_csv)
    universe = _guard_universe(build_universe(items, ITEM_PK))
    if not strict:
        bridge = _drop_unknown_items(bridge, universe)
    compressed = compress_bridge(bridge, universe, mode)
    write_universe_manifest(universe, out_universe)
    write_relation_csv(compressed.relation, out_bridge)
    if mode == DIRECT:
        sidecar = out_correspondence or f"{out_bridge}.corr.csv"
        write_relation_csv(compressed.group_correspondence(), sidecar)
    _echo_report(compression_stats(bridge, compressed))


@main.command()
@click.argument("compressed_csv", type=_IN)
@click.argument("universe_manifest", type=_IN)
@click.option("--out", type=_OUT, required=True, help="Expanded (groupRank, Item_PK) CSV.")
@_cli_errors
def expand(compressed_csv, universe_manifest, out):
    """Expand each stored (h, k) group key into its member item rows."""
    universe = _guard_universe(read_universe_manifest(universe_manifest))
    rel = read_relation_csv(compressed_csv)
    if GROUP_RANK not in rel.attributes:
        raise SchemaError(f"{compressed_csv}: no {GROUP_RANK!r} column to expand")
    write_relation_csv(rank_inverse_join(RankColumnRef(rel, GROUP_RANK), universe), out)


@main.command()
@click.argument("group_csv", type=_IN)
@click.argument("items_csv", type=_IN)
@click.argument("universe_manifest", type=_IN)
@click.option("--mode", type=_MODE, default=GROUPED, show_default=True)
@click.option("--out", type=_OUT, required=True, help="Rank-join result CSV.")
@_cli_errors
def join(group_csv, items_csv, universe_manifest, mode, out):
    """Rank-join the group-side CSV with ITEMS_CSV through the group keys."""
    group_side = read_relation_csv(group_csv)
    items = read_relation_csv(items_csv)
    universe = _guard_universe(read_universe_manifest(universe_manifest))
    if GROUP_RANK not in group_side.attributes:
        raise SchemaError(f"{group_csv}: no {GROUP_RANK!r} column")
    if ITEM_PK not in items.attributes:
        raise SchemaError(f"{items_csv}: no {ITEM_PK!r} column")
    if GROUP_RANK in items.attributes:
        raise SchemaError(f"name collision: {items_csv} also carries {GROUP_RANK!r}")
    if ITEM_PK in group_side.attributes:
        raise SchemaError(f"name collision: {group_csv} also carries {ITEM_PK!r}")
    shared = (set(group_side.attributes) - {GROUP_RANK}) & (set(items.attributes) - {ITEM_PK})
    if shared:
        raise SchemaError(
            f"name collision: attributes {sorted(shared)} appear in both inputs")
    if mode == GROUPED:
        result = rank_join_grouped(group_side, items, GROUP_RANK, universe)
    else:
        result = rank_join_direct(group_side, items, GROUP_RANK, universe)
    write_relation_csv(result, out)


@main.command()
@click.argument("bridge_csv", type=_IN)
@click.argument("compressed_csv", type=_IN)
@_cli_errors
def stats(bridge_csv, compressed_csv):
    """Print the size report for a bridge and its previously compressed form."""
    bridge = _load_bridge(bridge_csv)
    rel = read_relation_csv(compressed_csv)
    if GROUP_RANK not in rel.attributes:
        raise SchemaError(f"{compressed_csv}: no {GROUP_RANK!r} column")
    mode = GROUPED if GROUP_PK in rel.attributes else DIRECT
    expected = (GROUP_PK, GROUP_RANK) if mode == GROUPED else (GROUP_RANK,)
    if rel.attributes != expected:
        rel = project(rel, expected)
    compressed = CompressedBridge(mode, rel, universe_version="unverified")
    _echo_report(compression_stats(bridge, compressed), human=True)


@main.command()
@click.argument("items_csv", type=_IN)
@click.argument("bridge_csv", type=_IN)
@click.option("--compressed", "compressed_csv", type=_IN, default=None,
              help="Previously written compressed CSV to check against BRIDGE_CSV.")
@click.option("--universe", "universe_manifest", type=_IN, default=None,
              help="Manifest for --compressed (defaults to the universe built "
                   "from ITEMS_CSV).")
@click.option("--mode", type=click.Choice([GROUPED, DIRECT, "both"]),
              default="both", show_default=True)
@click.option("--strict/--permissive", "strict", default=True, show_default=True)
@_cli_errors
def verify(items_csv, bridge_csv, compressed_csv, universe_manifest, mode, strict):
    """Round-trip and join-equivalence checks; exit 1 on the first divergence."""
    items = read_relation_csv(items_csv)
    bridge = _load_bridge(bridge_csv)
    if ITEM_PK not in items.attributes:
        raise SchemaError(f"{items_csv}: no {ITEM_PK!r} column")
    for clash in (GROUP_PK, GROUP_RANK):
        if clash in items.attributes:
            raise SchemaError(f"name collision: {items_csv} carries {clash!r}")
    universe = _guard_universe(build_universe(items, ITEM_PK))
    if not strict:
        bridge = _drop_unknown_items(bridge, universe)
    modes = (GROUPED, DIRECT) if mode == "both" else (mode,)

    checked = []
    direct_reference = None
    for m in modes:
        compressed = compress_bridge(bridge, universe, m)
        correspondence = compressed.group_correspondence()
        back = decompress_bridge(compressed, universe)
        if m == GROUPED:
            expected = bridge.rows
        else:
            direct_reference = back
            members = {}
            gi, ii = bridge.index_of(GROUP_PK), bridge.index_of(ITEM_PK)
            corr = {row[0]: row[1] for row in correspondence.rows}
            for row in bridge.rows:
                members.setdefault(row[gi], set()).add(row[ii])
            expected = frozenset(
                (serialize_group_key(corr[gpk]), item)
                for gpk, its in members.items() for item in its)
        diag = _first_divergence(expected, row_set(back, (GROUP_PK, ITEM_PK)),
                                 "bridge", f"{m} round trip")
        if diag:
            _fail(EXIT_VALIDATION, f"verify: {m} round trip diverged: {diag}")
        checked.append(f"{m} round trip")

        if m == GROUPED:
            classic = classic_three_way_join(
                project(bridge, (GROUP_PK,)), bridge, items, strict=strict)
            ranked = rank_join_grouped(correspondence, items, GROUP_RANK, universe)
            aligned = project(ranked, classic.attributes)
            diag = _first_divergence(classic.rows, row_set(aligned, classic.attributes),
                                     "classic three-way join", "rank join")
        else:
            classic = natural_join(bridge, items)
            ranked = rank_join_direct(compressed.relation, items, GROUP_RANK, universe)
            aligned = project(natural_join(classic, correspondence), ranked.attributes)
            diag = _first_divergence(row_set(aligned, ranked.attributes), ranked.rows,
                                     "classic bridge join", "rank join")
        if diag:
            _fail(EXIT_VALIDATION, f"verify: {m} rank join diverged: {diag}")
        checked.append(f"{m} rank join")

    if compressed_csv is not None:
        file_universe = universe
        if universe_manifest is not None:
            file_universe = _guard_universe(read_universe_manifest(universe_manifest))
        rel = read_relation_csv(compressed_csv)
        if GROUP_RANK not in rel.attributes:
            raise SchemaError(f"{compressed_csv}: no {GROUP_RANK!r} column")
        file_mode = GROUPED if GROUP_PK in rel.attributes else DIRECT
        expected_attrs = (GROUP_PK, GROUP_RANK) if file_mode == GROUPED else (GROUP_RANK,)
        if rel.attributes != expected_attrs:
            rel = project(rel, expected_attrs)
        decoded = decompress_bridge(
            CompressedBridge(file_mode, rel, file_universe.version), file_universe)
        if file_mode == GROUPED:
            expected = bridge.rows
        else:
            if direct_reference is None:
                direct_reference = decompress_bridge(
                    compress_bridge(bridge, universe, DIRECT), universe)
            expected = direct_reference.rows
        diag = _first_divergence(expected, row_set(decoded, (GROUP_PK, ITEM_PK)),
                                 "bridge", compressed_csv)
        if diag:
            _fail(EXIT_VALIDATION, f"verify: first divergence: {diag}")
        checked.append(f"compressed file ({file_mode})")

    click.echo(f"verify: OK ({', '.join(checked)})")


@main.command()
@click.option("--out-items", type=_OUT, required=True, help="Items CSV.")
@click.option("--out-bridge", type=_OUT, required=True, help="Classic bridge CSV.")
@click.option("--n", "n_items", type=int, default=700, show_default=True,
              help="Universe size.")
@click.option("--scale", type=int, default=1000, show_default=True,
              help="Keep one group per SCALE of the reference histogram.")
@click.option("--seed", type=int, default=0, show_default=True)
@_cli_errors
def gen(out_items, out_bridge, n_items, scale, seed):
    """Write a deterministic synthetic items CSV and bridge CSV."""
    try:
        items, bridge = generate_dataset(n_items, scale, seed)
    except ValueError as exc:
        raise CombridgeError(str(exc)) from exc
    write_relation_csv(items, out_items)
    write_relation_csv(bridge, out_bridge)
    groups = len(set(bridge.column(GROUP_PK)))
    click.echo(f"gen: wrote {len(items)} items, {groups} groups, "
               f"{len(bridge)} bridge rows (seed={seed})")


if __name__ == "__main__":
    main()
