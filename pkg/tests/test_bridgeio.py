"""Compression, codecs, file formats, and the size report."""
import itertools
import random
import re
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from combridge.bridgeio import (
    DIRECT,
    GROUPED,
    CompressedBridge,
    compress_bridge,
    compression_stats,
    decompress_bridge,
    exact_group_key_bytes,
    group_key_cost,
    parse_group_key,
    read_relation_csv,
    read_universe_manifest,
    report_from_counts,
    serialize_group_key,
    write_relation_csv,
    write_universe_manifest,
)
from combridge.errors import (
    DuplicateKeyError,
    EmptyBridgeError,
    FormatError,
    GroupKeyParseError,
    InvalidGroupKeyError,
    SchemaError,
    StaleUniverseError,
    UnknownItemError,
)
from combridge.relmodel import (
    GROUP_PK,
    GROUP_RANK,
    ITEM_PK,
    GroupKey,
    ItemUniverse,
    Relation,
    same_relation,
)

C_700_10 = 7297452464858376897230


def make_bridge(pairs):
    return Relation.build((GROUP_PK, ITEM_PK), pairs, key=(GROUP_PK, ITEM_PK))


# Two groups over items 10..50: the first three item keys, then the first two.
FIVE_ITEMS = ItemUniverse((10, 20, 30, 40, 50))
TWO_GROUP_BRIDGE = make_bridge(
    [("G1", 10), ("G1", 20), ("G1", 30), ("G2", 10), ("G2", 20)])


class TestGroupKeyText:
    def test_renders_small_keys(self):
        assert serialize_group_key(GroupKey(1, 3)) == "1:3"
        assert serialize_group_key(GroupKey(10, 2)) == "10:2"

    def test_renders_huge_rank(self):
        assert serialize_group_key(GroupKey(C_700_10, 10)) == f"{C_700_10}:10"

    def test_parses_canonical_text(self):
        assert parse_group_key("1:3") == GroupKey(1, 3)
        assert parse_group_key(f"{C_700_10}:10") == GroupKey(C_700_10, 10)

    @pytest.mark.parametrize("text", ["007:2", "1:03", "1", ":", "1:", "1:2:3",
                                      "0x1:2", " 1:2", "1:2 ", "-1:2"])
    def test_rejects_non_canonical_text(self, text):
        with pytest.raises(GroupKeyParseError):
            parse_group_key(text)

    @pytest.mark.parametrize("text", ["0:3", "3:0", "0:0"])
    def test_rejects_zero_components(self, text):
        with pytest.raises(InvalidGroupKeyError):
            parse_group_key(text)

    @given(h=st.integers(min_value=1, max_value=10**40),
           k=st.integers(min_value=1, max_value=10**6))
    @settings(max_examples=100, deadline=None)
    def test_round_trip(self, h, k):
        assert parse_group_key(serialize_group_key(GroupKey(h, k))) == GroupKey(h, k)


class TestCompressBridge:
    def test_two_groups_compress_to_two_rows(self):
        compressed = compress_bridge(TWO_GROUP_BRIDGE, FIVE_ITEMS, GROUPED)
        assert compressed.relation.rows == {
            ("G1", GroupKey(1, 3)), ("G2", GroupKey(1, 2))}

    def test_direct_mode_keeps_distinct_keys_and_sidecar(self):
        compressed = compress_bridge(TWO_GROUP_BRIDGE, FIVE_ITEMS, DIRECT)
        assert compressed.relation.rows == {(GroupKey(1, 3),), (GroupKey(1, 2),)}
        assert compressed.group_correspondence().rows == {
            ("G1", GroupKey(1, 3)), ("G2", GroupKey(1, 2))}

    def test_single_item_group(self):
        compressed = compress_bridge(make_bridge([(1, 10)]), FIVE_ITEMS)
        assert compressed.relation.rows == {(1, GroupKey(1, 1))}

    def test_identical_memberships_share_a_key(self):
        bridge = make_bridge([(1, 10), (1, 20), (2, 10), (2, 20)])
        compressed = compress_bridge(bridge, FIVE_ITEMS, GROUPED)
        ranks = {gk for _, gk in compressed.relation.rows}
        assert ranks == {GroupKey(1, 2)}
        direct = compress_bridge(bridge, FIVE_ITEMS, DIRECT)
        assert len(direct.relation) == 1

    def test_unknown_item_rejected(self):
        with pytest.raises(UnknownItemError):
            compress_bridge(make_bridge([(1, 99)]), FIVE_ITEMS)

    def test_empty_bridge_rejected(self):
        with pytest.raises(EmptyBridgeError):
            compress_bridge(make_bridge([]), FIVE_ITEMS)

    def test_wrong_schema_rejected(self):
        rel = Relation.build(("a", "b"), [(1, 10)])
        with pytest.raises(SchemaError):
            compress_bridge(rel, FIVE_ITEMS)

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            compress_bridge(TWO_GROUP_BRIDGE, FIVE_ITEMS, "zipped")


class TestDecompressBridge:
    def test_round_trips_the_two_group_bridge(self):
        compressed = compress_bridge(TWO_GROUP_BRIDGE, FIVE_ITEMS, GROUPED)
        assert same_relation(decompress_bridge(compressed, FIVE_ITEMS),
                             TWO_GROUP_BRIDGE)

    def test_single_row_identity(self):
        bridge = make_bridge([(7, 30)])
        compressed = compress_bridge(bridge, FIVE_ITEMS)
        assert same_relation(decompress_bridge(compressed, FIVE_ITEMS), bridge)

    def test_direct_mode_uses_serialized_keys(self):
        compressed = compress_bridge(TWO_GROUP_BRIDGE, FIVE_ITEMS, DIRECT)
        back = decompress_bridge(compressed, FIVE_ITEMS)
        assert back.rows == {("1:3", 10), ("1:3", 20), ("1:3", 30),
                             ("1:2", 10), ("1:2", 20)}

    def test_stale_universe_rejected(self):
        compressed = compress_bridge(TWO_GROUP_BRIDGE, FIVE_ITEMS)
        other = ItemUniverse((10, 20, 30, 40, 50, 60))
        with pytest.raises(StaleUniverseError):
            decompress_bridge(compressed, other)

    def test_round_trip_randomized(self):
        rng = random.Random(99)
        for _ in range(60):
            n = rng.randint(1, 20)
            keys = sorted(rng.sample(range(1000, 2000), n))
            universe = ItemUniverse(tuple(keys))
            rows = set()
            for gpk in range(1, rng.randint(1, 12) + 1):
                for key in rng.sample(keys, rng.randint(1, n)):
                    rows.add((gpk, key))
            bridge = make_bridge(rows)
            compressed = compress_bridge(bridge, universe, GROUPED)
            assert same_relation(decompress_bridge(compressed, universe), bridge)

    def test_round_trip_exhaustive_small_universes(self):
        # every choice of up to three member sets, for tiny universes
        for n in (2, 3):
            keys = tuple(range(10, 10 + 10 * n, 10))
            universe = ItemUniverse(keys)
            subsets = [frozenset(c) for size in range(1, n + 1)
                       for c in itertools.combinations(keys, size)]
            for count in (1, 2, 3):
                for chosen in itertools.combinations(subsets, count):
                    bridge = make_bridge(
                        (gpk, key) for gpk, s in enumerate(chosen, 1) for key in s)
                    compressed = compress_bridge(bridge, universe, GROUPED)
                    assert same_relation(decompress_bridge(compressed, universe),
                                         bridge)

    def test_round_trip_every_single_group_up_to_eight_items(self):
        for n in range(1, 9):
            keys = tuple(range(1, n + 1))
            universe = ItemUniverse(keys)
            for size in range(1, n + 1):
                for subset in itertools.combinations(keys, size):
                    bridge = make_bridge([(1, key) for key in subset])
                    compressed = compress_bridge(bridge, universe, GROUPED)
                    assert same_relation(decompress_bridge(compressed, universe),
                                         bridge)

    def test_round_trip_sampled_multi_group_at_eight_items(self):
        keys = tuple(range(1, 9))
        universe = ItemUniverse(keys)
        subsets = [frozenset(c) for size in range(1, 9)
                   for c in itertools.combinations(keys, size)]
        rng = random.Random(8)
        for _ in range(300):
            chosen = rng.sample(subsets, rng.choice((2, 3)))
            bridge = make_bridge(
                (gpk, key) for gpk, s in enumerate(chosen, 1) for key in s)
            compressed = compress_bridge(bridge, universe, GROUPED)
            assert same_relation(decompress_bridge(compressed, universe), bridge)


def test_distinct_item_sets_never_share_key_text():
    universe = ItemUniverse(tuple(range(1, 7)))
    texts = set()
    count = 0
    for size in range(1, 7):
        for subset in itertools.combinations(range(1, 7), size):
            bridge = make_bridge([(1, key) for key in subset])
            compressed = compress_bridge(bridge, universe, DIRECT)
            (gk,) = next(iter(compressed.relation.rows))
            texts.add(serialize_group_key(gk))
            count += 1
    assert len(texts) == count == 2**6 - 1


class TestCompressionReport:
    def test_two_group_bridge_numbers(self):
        compressed = compress_bridge(TWO_GROUP_BRIDGE, FIVE_ITEMS, GROUPED)
        report = compression_stats(TWO_GROUP_BRIDGE, compressed)
        assert report.classic_rows == 5
        assert report.compressed_rows == 2
        assert report.avg_group_width == Fraction(5, 2)
        assert report.row_ratio == Fraction(5, 2)
        assert report.classic_bytes == 5 * 2 * 4
        assert report.compressed_bytes == 2 * 8
        assert report.exact_key_bytes == 4  # two keys, one byte each for h and k
        assert report.mergeable_duplicates == 0

    def test_single_group_single_item_ratio_one(self):
        bridge = make_bridge([(1, 10)])
        report = compression_stats(bridge, compress_bridge(bridge, FIVE_ITEMS))
        assert report.row_ratio == 1

    def test_duplicate_memberships_flagged(self):
        bridge = make_bridge([(1, 10), (2, 10), (3, 20)])
        report = compression_stats(bridge, compress_bridge(bridge, FIVE_ITEMS))
        assert report.mergeable_duplicates == 1

    def test_oversized_key_charged_exactly(self):
        universe = ItemUniverse(tuple(range(1, 701)))
        bridge = make_bridge([(1, key) for key in range(691, 701)])
        compressed = compress_bridge(bridge, universe)
        gk = next(iter(compressed.relation.column(GROUP_RANK)))
        assert gk == GroupKey(C_700_10, 10)
        assert exact_group_key_bytes(gk) == 11
        assert group_key_cost(gk) == 11
        report = compression_stats(bridge, compressed)
        assert report.oversized_keys == 1
        assert report.compressed_bytes == 11
        assert "exceed the fixed 8 B slot" in report.note

    def test_small_key_fits_fixed_slot(self):
        assert group_key_cost(GroupKey(1, 3)) == 8
        assert exact_group_key_bytes(GroupKey(1, 3)) == 2

    def test_full_scale_counts_reproduce_formula(self):
        report = report_from_counts(classic_rows=2_962_924, compressed_rows=740_731)
        assert report.classic_bytes == 23_703_392
        assert report.compressed_bytes == 5_925_848
        assert report.row_ratio == 4
        assert report.avg_group_width == 4

    def test_note_flags_unreproducible_published_figures(self):
        report = report_from_counts(2_962_924, 740_731)
        assert "189,627,136" in report.note
        assert "32x" in report.note
        assert "not reproducible" in report.note

    def test_machine_lines_parse(self):
        report = report_from_counts(100, 25)
        lines = dict(line.split("=", 1) for line in report.as_lines())
        assert lines["classic_rows"] == "100"
        assert lines["row_ratio"] == "4.0"
        assert lines["row_ratio_exact"] == "4/1"


class TestRelationCsv:
    def test_bridge_file_round_trip(self, tmp_path):
        path = tmp_path / "bridge.csv"
        write_relation_csv(TWO_GROUP_BRIDGE, path)
        back = read_relation_csv(path, key=(GROUP_PK, ITEM_PK))
        assert same_relation(back, TWO_GROUP_BRIDGE)

    def test_header_only_file_is_empty_relation(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("Group_PK,Item_PK\n", encoding="utf-8")
        rel = read_relation_csv(path)
        assert rel.attributes == (GROUP_PK, ITEM_PK)
        assert len(rel) == 0

    def test_group_rank_column_parses_by_name(self, tmp_path):
        path = tmp_path / "comp.csv"
        path.write_text("Group_PK,groupRank\n1,4:2\n", encoding="utf-8")
        rel = read_relation_csv(path)
        assert rel.rows == {(1, GroupKey(4, 2))}

    def test_ragged_row_reports_line(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("a,b\n1,2\n3\n", encoding="utf-8")
        with pytest.raises(FormatError) as err:
            read_relation_csv(path)
        assert err.value.line == 3

    def test_duplicate_header_rejected(self, tmp_path):
        path = tmp_path / "dup.csv"
        path.write_text("a,a\n1,2\n", encoding="utf-8")
        with pytest.raises(FormatError):
            read_relation_csv(path)

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "nothing.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(FormatError):
            read_relation_csv(path)

    def test_key_violation_reports_line(self, tmp_path):
        path = tmp_path / "keyed.csv"
        path.write_text("pk,v\n1,a\n2,b\n1,c\n", encoding="utf-8")
        with pytest.raises(DuplicateKeyError) as err:
            read_relation_csv(path, key=("pk",))
        assert ":4:" in str(err.value)

    def test_leading_zero_number_stays_text(self, tmp_path):
        path = tmp_path / "codes.csv"
        path.write_text("code\n007\n12\n", encoding="utf-8")
        rel = read_relation_csv(path)
        assert rel.rows == {("007",), ("12",)}

    def test_int_hint_rejects_non_canonical(self, tmp_path):
        path = tmp_path / "ints.csv"
        path.write_text("v\n007\n", encoding="utf-8")
        with pytest.raises(FormatError) as err:
            read_relation_csv(path, types={"v": "int"})
        assert err.value.line == 2

    def test_bad_group_key_reports_line(self, tmp_path):
        path = tmp_path / "comp.csv"
        path.write_text("groupRank\n1:2\n07:1\n", encoding="utf-8")
        with pytest.raises(FormatError) as err:
            read_relation_csv(path)
        assert err.value.line == 3

    def test_hint_for_unknown_attribute(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("a\n1\n", encoding="utf-8")
        with pytest.raises(SchemaError):
            read_relation_csv(path, types={"b": "int"})

    def test_writes_are_deterministic(self, tmp_path):
        first, second = tmp_path / "one.csv", tmp_path / "two.csv"
        write_relation_csv(TWO_GROUP_BRIDGE, first)
        write_relation_csv(TWO_GROUP_BRIDGE, second)
        assert first.read_bytes() == second.read_bytes()

    def test_rows_written_in_key_order(self, tmp_path):
        rel = Relation.build(("pk", "v"), [(3, "c"), (1, "a"), (2, "b")], key=("pk",))
        path = tmp_path / "sorted.csv"
        write_relation_csv(rel, path)
        assert path.read_text(encoding="utf-8") == "pk,v\n1,a\n2,b\n3,c\n"

    def test_quoting_round_trip(self, tmp_path):
        rel = Relation.build(("t",), [('say "hi", ok?',), ("two\nlines",)])
        path = tmp_path / "quoted.csv"
        write_relation_csv(rel, path)
        assert same_relation(read_relation_csv(path), rel)

    def test_carriage_return_rejected_on_write(self, tmp_path):
        rel = Relation.build(("t",), [("bad\rvalue",)])
        with pytest.raises(ValueError):
            write_relation_csv(rel, tmp_path / "cr.csv")


_text_values = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",),
                           blacklist_characters="\x00\r"),
    max_size=10)


@st.composite
def typed_relations(draw):
    col_types = draw(st.lists(st.sampled_from(["int", "text", "groupkey"]),
                              min_size=1, max_size=4))
    attrs = [f"c{i}" for i in range(len(col_types))]
    generators = {
        "int": st.integers(min_value=-(2**70), max_value=2**70),
        "text": _text_values,
        "groupkey": st.builds(GroupKey, st.integers(1, 10**30), st.integers(1, 10**6)),
    }
    rows = draw(st.lists(st.tuples(*[generators[t] for t in col_types]), max_size=8))
    return Relation.build(attrs, rows), dict(zip(attrs, col_types))


class TestCsvRoundTripProperties:
    @given(rel_and_types=typed_relations())
    @settings(max_examples=60, deadline=None)
    def test_hinted_round_trip_is_identity(self, rel_and_types, tmp_path_factory):
        rel, types = rel_and_types
        path = tmp_path_factory.mktemp("csv") / "rel.csv"
        write_relation_csv(rel, path)
        assert same_relation(read_relation_csv(path, types=types), rel)

    @given(rows=st.lists(st.tuples(
        st.integers(min_value=-(2**70), max_value=2**70),
        _text_values.filter(lambda s: not re.fullmatch(r"-?[0-9]+", s))),
        max_size=8))
    @settings(max_examples=60, deadline=None)
    def test_unhinted_round_trip_with_distinguishable_text(self, rows, tmp_path_factory):
        rel = Relation.build(("num", "label"), rows)
        path = tmp_path_factory.mktemp("csv") / "rel.csv"
        write_relation_csv(rel, path)
        assert same_relation(read_relation_csv(path), rel)


class TestUniverseManifest:
    def test_round_trip_integer_keys(self, tmp_path):
        path = tmp_path / "uni.txt"
        write_universe_manifest(FIVE_ITEMS, path)
        assert path.read_text(encoding="utf-8") == "n=5\n10\n20\n30\n40\n50\n"
        back = read_universe_manifest(path)
        assert back.items == FIVE_ITEMS.items
        assert back.version == FIVE_ITEMS.version

    def test_round_trip_text_keys(self, tmp_path):
        universe = ItemUniverse(("A10", "B20", "C30"))
        path = tmp_path / "uni.txt"
        write_universe_manifest(universe, path)
        assert read_universe_manifest(path).items == universe.items

    def test_missing_count_header(self, tmp_path):
        path = tmp_path / "uni.txt"
        path.write_text("10\n20\n", encoding="utf-8")
        with pytest.raises(FormatError):
            read_universe_manifest(path)

    def test_count_mismatch(self, tmp_path):
        path = tmp_path / "uni.txt"
        path.write_text("n=3\n10\n20\n", encoding="utf-8")
        with pytest.raises(FormatError):
            read_universe_manifest(path)

    def test_out_of_order_keys_rejected(self, tmp_path):
        path = tmp_path / "uni.txt"
        path.write_text("n=2\n20\n10\n", encoding="utf-8")
        with pytest.raises(FormatError) as err:
            read_universe_manifest(path)
        assert err.value.line == 3

    def test_line_break_in_key_rejected_on_write(self, tmp_path):
        universe = ItemUniverse(("a\nb", "c"))
        with pytest.raises(ValueError):
            write_universe_manifest(universe, tmp_path / "uni.txt")

    def test_zero_item_manifest_rejected(self, tmp_path):
        from combridge.errors import EmptyUniverseError

        path = tmp_path / "uni.txt"
        path.write_text("n=0\n", encoding="utf-8")
        with pytest.raises(EmptyUniverseError):
            read_universe_manifest(path)
