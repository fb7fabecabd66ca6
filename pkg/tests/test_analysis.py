import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import code
from mlgap.analysis import (
    all_orthodromes,
    class_diameter,
    class_geometry,
    class_margin,
    from_classes,
    orthodrome,
    orthodrome_utilization,
    proposition_check,
    sample_orthodromes,
    separated_assignments,
    separation_check,
    utilization_report,
)
from mlgap.core import BinaryCode, Entry, LabeledCodeSet, UsageError, hamming_distance


def brute_diameter(codes):
    return max((hamming_distance(a, b) for a in codes for b in codes), default=0)


def brute_margin(db, cls):
    mine = [e.code for e in db if e.label == cls]
    other = [e.code for e in db if e.label != cls]
    return min(hamming_distance(a, b) for a in mine for b in other)


def labelled(k, pairs):
    return LabeledCodeSet(k, [Entry(code(s), lab) for s, lab in pairs])


class TestDiameterMargin:
    def test_singleton(self):
        db = labelled(4, [("0110", 0), ("0000", 1)])
        assert class_diameter(db, 0) == 0

    def test_antipodal_pair(self):
        db = labelled(4, [("0110", 0), ("1001", 0)])
        assert class_diameter(db, 0) == 4

    def test_three_codes(self):
        db = labelled(4, [("0000", 0), ("1000", 0), ("0100", 0)])
        assert sorted(hamming_distance(a.code, b.code) for a, b in itertools.combinations(db, 2)) == [1, 1, 2]
        assert class_diameter(db, 0) == 2

    def test_unknown_class(self):
        with pytest.raises(UsageError):
            class_diameter(labelled(2, [("01", 0)]), 5)

    def test_shared_code_margin(self):
        db = labelled(3, [("010", 0), ("010", 1)])
        assert class_margin(db, 0) == 0

    def test_antipodal_singletons(self):
        db = labelled(5, [("01101", 0), ("10010", 1)])
        assert class_margin(db, 0) == class_margin(db, 1) == 5

    def test_single_class_margin(self):
        with pytest.raises(UsageError):
            class_margin(labelled(2, [("01", 0)]), 0)

    def test_three_class_instance(self):
        db = labelled(4, [("0000", 0), ("0001", 0), ("1110", 1), ("0111", 2), ("1100", 1)])
        for c in (0, 1, 2):
            assert class_margin(db, c) == brute_margin(db, c)

    @settings(max_examples=50)
    @given(st.integers(0, 2**32 - 1))
    def test_bit_relabelling_invariance(self, seed):
        rng = np.random.default_rng(seed)
        k = 7
        values = rng.integers(0, 2**k, size=12).tolist()
        labels = rng.integers(0, 3, size=12).tolist()
        labels[:3] = [0, 1, 2]
        perm = rng.permutation(k)
        moved = [sum(1 << int(perm[i]) for i in range(k) if (v >> i) & 1) for v in values]
        a = LabeledCodeSet.from_values(k, values, labels)
        b = LabeledCodeSet.from_values(k, moved, labels)
        assert class_geometry(a) == class_geometry(b)
        for c in range(3):
            assert class_diameter(a, c) == brute_diameter([e.code for e in a if e.label == c])
            assert class_margin(a, c) == brute_margin(a, c)


class TestSeparation:
    def test_singletons_hold_but_flag_zero_diameter(self):
        db = labelled(3, [("000", 0), ("111", 1), ("011", 2)])
        assert separation_check(db) == (True, 0)

    def test_intermixed(self):
        db = labelled(3, [("000", 0), ("001", 1), ("011", 0)])
        assert not separation_check(db).holds

    def test_constructed_separated_k6(self):
        # two centers 6 apart, each class = center plus one neighbour
        db = labelled(6, [("000000", 0), ("100000", 0), ("111111", 1), ("011111", 1)])
        geo = class_geometry(db)
        assert [g.diameter for g in geo] == [1, 1]
        assert min(g.margin for g in geo) >= 3
        assert separation_check(db) == (True, 1)

    def test_collapse_case(self):
        db = labelled(6, [("000000", c) for c in [0]] + [("111000", 1), ("000111", 2)] * 3)
        assert all(g.diameter == 0 for g in class_geometry(db))
        assert utilization_report(db).global_utilization == 3 / 64


class TestOrthodrome:
    def test_worked_example(self):
        start = BinaryCode.from_signs([-1, -1, -1, -1])
        o = orthodrome(start, [1, 3, 0, 2])
        expected = [
            [-1, -1, -1, -1], [-1, 1, -1, -1], [-1, 1, -1, 1], [1, 1, -1, 1],
            [1, 1, 1, 1], [1, -1, 1, 1], [1, -1, 1, -1], [-1, -1, 1, -1],
        ]
        assert [c.signs() for c in o.codes] == expected

    def test_single_bit(self):
        o = orthodrome(code("1"), [0])
        assert [c.to_string() for c in o.codes] == ["1", "0"]

    @pytest.mark.parametrize("order", [[0, 1, 1], [0, 1], [0, 1, 3]])
    def test_bad_order(self, order):
        with pytest.raises(UsageError):
            orthodrome(code("000"), order)

    @settings(max_examples=100)
    @given(st.integers(1, 40).flatmap(lambda k: st.tuples(
        st.integers(0, 2**k - 1).map(lambda v: BinaryCode(k, v)), st.permutations(range(k)))))
    def test_invariants(self, args):
        start, order = args
        o = orthodrome(start, order)
        k = start.width
        assert len(o.codes) == 2 * k == len(set(o.codes))
        for i in range(2 * k):
            assert hamming_distance(o.codes[i], o.codes[(i + 1) % (2 * k)]) == 1
        for i in range(k):
            assert o.codes[i + k] == o.codes[i].complement()

    def test_utilization_extremes(self):
        o = orthodrome(code("000"), [0, 1, 2])
        assert orthodrome_utilization(LabeledCodeSet(3, []), o) == 0.0
        full = LabeledCodeSet.from_values(3, list(range(8)), [0] * 8)
        assert orthodrome_utilization(full, o) == 1.0

    def test_utilization_width_mismatch(self):
        o = orthodrome(code("000"), [0, 1, 2])
        with pytest.raises(UsageError):
            orthodrome_utilization(LabeledCodeSet(4, []), o)

    def test_twelve_bit_blocks_of_diameter_one(self):
        # pairs of adjacent codes on one orthodrome, one empty code between classes
        start = BinaryCode(12, 0)
        o = orthodrome(start, range(12))
        codes = o.codes
        entries = []
        label = 0
        for i in range(0, 24, 3):
            entries += [Entry(codes[i], label), Entry(codes[i + 1], label)]
            label += 1
        db = LabeledCodeSet(12, entries)
        sep = separation_check(db)
        assert sep.holds and sep.h_tilde_s == 1
        assert orthodrome_utilization(db, o) == pytest.approx(16 / 24)
        assert orthodrome_utilization(db, o) <= 2 / 3

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_enumeration_covers_codes_evenly(self, k):
        cycles = all_orthodromes(k)
        hits = np.zeros(2**k, dtype=int)
        for c in cycles:
            assert len(c) == 2 * k
            for v in c:
                hits[v] += 1
        assert len(set(hits.tolist())) == 1
        rng = np.random.default_rng(k)
        occ = rng.choice(2**k, size=max(1, 2**k // 3), replace=False).tolist()
        db = LabeledCodeSet.from_values(k, occ, [0] * len(occ))
        rep = utilization_report(db, cycles)
        assert np.mean([u for _, u in rep.per_orthodrome]) == pytest.approx(rep.global_utilization)

    def test_sampling_is_seeded(self):
        a = list(sample_orthodromes(10, 50, 3, chunk=16))
        b = list(sample_orthodromes(10, 50, 3, chunk=16))
        assert a == b and len(a) == 50
        assert list(sample_orthodromes(10, 50, 4, chunk=16)) != a


class TestProposition:
    def test_precondition_unmet(self):
        db = labelled(3, [("000", 0), ("001", 1), ("011", 0)])
        assert proposition_check(db).status == "precondition unmet"
        collapse = labelled(3, [("000", 0), ("111", 1)])
        assert proposition_check(collapse).status == "precondition unmet"
        single = labelled(3, [("000", 0), ("001", 0)])
        assert proposition_check(single).reason == "fewer than two classes"

    def test_separated_assignments_are_valid(self):
        found = list(separated_assignments(3))
        assert found
        for classes in found:
            db = from_classes(3, classes)
            sep = separation_check(db)
            assert sep.holds and sep.h_tilde_s >= 1

    def test_enumeration_is_complete_at_k3(self):
        # brute force: every labelling of the 8 codes with up to 4 classes (0 = empty)
        k, n = 3, 8
        seen = set()
        for lab in itertools.product(range(5), repeat=n):
            groups = {}
            for v, c in enumerate(lab):
                if c:
                    groups.setdefault(c, set()).add(v)
            if len(groups) < 2:
                continue
            key = frozenset(frozenset(g) for g in groups.values())
            if key in seen:
                continue
            seen.add(key)
        valid = set()
        for key in seen:
            db = from_classes(k, sorted(key, key=min))
            sep = separation_check(db)
            if sep.holds and sep.h_tilde_s >= 1:
                valid.add(key)
        assert {frozenset(a) for a in separated_assignments(3)} == valid

    def test_tight_at_k3(self):
        best = max(proposition_check(from_classes(3, a)).max_utilization for a in separated_assignments(3))
        assert best == pytest.approx(2 / 3)

    def test_sampled_above_k4(self):
        db = labelled(6, [("000000", 0), ("100000", 0), ("111111", 1), ("011111", 1)])
        rep = proposition_check(db, orthodrome_budget=500, seed=1)
        assert rep.status == "ok" and not rep.exhaustive and rep.orthodromes_checked == 500
        assert rep.max_utilization <= 2 / 3


class TestUtilization:
    def test_identical_entries(self):
        db = LabeledCodeSet.from_values(5, [7] * 9, [0] * 9)
        rep = utilization_report(db)
        assert rep.distinct_codes == 1 and rep.global_utilization == 2**-5

    def test_full_space(self):
        db = LabeledCodeSet.from_values(4, list(range(16)), [0] * 16)
        assert utilization_report(db).global_utilization == 1.0

    def test_three_hundred_distinct(self):
        rng = np.random.default_rng(0)
        distinct = rng.choice(4096, size=300, replace=False)
        values = np.concatenate([distinct, rng.choice(distinct, size=200)]).tolist()
        db = LabeledCodeSet.from_values(12, values, [0] * len(values))
        rep = utilization_report(db)
        assert rep.distinct_codes == len(set(values)) == 300
        assert rep.global_utilization == 300 / 4096
