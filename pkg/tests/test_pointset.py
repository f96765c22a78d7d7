import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from rankzero.ordinal import OMEGA, Ordinal, fundamental_sequence, parse_ordinal
from rankzero.pointset import (
    Arc,
    Leaf,
    build_rank_set,
    cardinality,
    derive,
    derive_once,
    dumps_tree,
    materialize,
    member,
    rank_of,
    rank_profile,
    singleton_refine,
    tree_from_json,
    tree_to_json,
    union_disjoint,
)
from rankzero.pointset import _children  # structural invariants need the stream


def o(text):
    return parse_ordinal(text)


HOST = Arc(F(1, 8), F(1, 96))


class TestArc:
    def test_validation(self):
        with pytest.raises(ValueError):
            Arc(F(0), F(1, 4))
        with pytest.raises(ValueError):
            Arc(F(0), F(0))

    def test_wraparound_distance(self):
        a = Arc(F(1, 64), F(1, 32))
        assert a.contains(F(63, 64))

    def test_disjointness_is_exact(self):
        a = Arc(F(0), F(1, 16))
        b = Arc(F(1, 8), F(1, 16))  # closed arcs touch at 1/16
        assert not a.strongly_disjoint(b)
        assert a.strongly_disjoint(Arc(F(1, 8) + F(1, 1000), F(1, 16)))


class TestBuild:
    def test_rank_one_is_center_point(self):
        assert build_rank_set(1, 1, HOST) == Leaf(F(1, 8))

    def test_rank_two_angles_increase_to_limit(self):
        tree = build_rank_set(2, 1, HOST)
        angles = materialize(tree, 1, 4)
        assert len(angles) == 4
        assert angles == sorted(angles)
        assert all(a < F(1, 8) for a in angles)

    def test_two_copies_prune_to_two_points(self):
        tree = build_rank_set(3, 2, HOST)
        twice = derive_once(derive_once(tree))
        assert cardinality(twice) == 2
        assert derive_once(twice) is None

    def test_zero_alpha_rejected(self):
        with pytest.raises(ValueError):
            build_rank_set(0, 1, HOST)

    def test_limit_with_copies_rejected(self):
        with pytest.raises(ValueError):
            build_rank_set(OMEGA, 2, HOST)

    def test_child_arcs_disjoint_and_shrinking(self):
        tree = build_rank_set(3, 1, HOST)
        kids = []
        for n, child in _children(tree):
            kids.append(child)
            if n >= 6:
                break
        arcs = [k.arc for k in kids]
        for i in range(len(arcs)):
            for j in range(i + 1, len(arcs)):
                assert arcs[i].strongly_disjoint(arcs[j])
        widths = [a.half_width for a in arcs]
        assert widths == sorted(widths, reverse=True)
        # arcs approach the limit angle without touching it
        gaps = [abs(F(1, 8) - a.center) for a in arcs]
        assert gaps == sorted(gaps, reverse=True)
        assert all(g > a.half_width for g, a in zip(gaps, arcs))

    def test_collapse_rank_recursion(self):
        # constant child ranks: one more than the children
        t4 = build_rank_set(4, 1, HOST)
        child_ranks = [rank_of(c) for _, (_, c) in zip(range(3), _children(t4))]
        assert all(r == o("2") for r in child_ranks)
        assert rank_of(t4) == o("3")
        # enumerated child ranks: supremum, not attained
        tw = build_rank_set(OMEGA, 1, HOST)
        seen = [rank_of(c) for _, (_, c) in zip(range(6), _children(tw))]
        assert rank_of(tw) == OMEGA
        assert max(seen) < OMEGA
        assert len(set(seen)) == len(seen)


class TestDerive:
    def test_leaf_prunes_to_empty(self):
        assert derive_once(Leaf(F(1, 3))) is None

    def test_rank_two_prunes_to_limit(self):
        assert derive_once(build_rank_set(2, 1, HOST)) == Leaf(F(1, 8))

    def test_double_prune_of_rank_three(self):
        tree = build_rank_set(3, 1, HOST)
        assert derive_once(derive_once(tree)) == Leaf(F(1, 8))

    def test_stage_two_of_rank_two_empty(self):
        assert derive(build_rank_set(2, 1, HOST), 2) is None

    def test_limit_stage_singleton(self):
        assert derive(build_rank_set(OMEGA, 1, HOST), OMEGA) == Leaf(F(1, 8))

    def test_three_copies_at_stage_three(self):
        tree = build_rank_set(4, 3, HOST)
        assert cardinality(derive(tree, 3)) == 3
        assert derive(tree, 4) is None

    def test_stage_zero_is_identity(self):
        tree = build_rank_set(3, 1, HOST)
        assert derive(tree, 0) is tree

    @pytest.mark.parametrize("alpha", ["2", "3", "4", "w", "w+2", "w*2", "w^2"])
    def test_iterated_pruning_matches_stages(self, alpha):
        tree = build_rank_set(o(alpha), 1, HOST)
        cur = tree
        for k in range(1, 7):
            cur = derive_once(cur)
            assert cur == derive(tree, k)

    def test_monotone_in_stage(self):
        tree = build_rank_set(o("w+1"), 1, HOST)
        big = derive(tree, o("w"))
        small = derive(tree, 2)
        for angle in materialize(big, 2, 3):
            assert member(small, angle)

    def test_limit_stage_agrees_with_fundamental_chain(self):
        tree = build_rank_set(OMEGA, 1, HOST)
        apex = F(1, 8)
        at_limit = derive(tree, OMEGA)
        assert at_limit == Leaf(apex)
        for n in range(1, 5):
            stage = fundamental_sequence(OMEGA, n)
            assert member(derive(tree, stage), apex)
        # a point of finite rank is eventually eliminated along the chain
        finite_point = materialize(derive(tree, 1), 1, 4)[0]
        assert not member(derive(tree, fundamental_sequence(OMEGA, 9)), finite_point)

    def test_survivor_set_contains_limits(self):
        tree = build_rank_set(2, 1, HOST)
        d = derive(tree, 1)
        assert member(d, F(1, 8))
        assert not member(tree, F(1, 8))


small_alphas = st.sampled_from(["1", "2", "3", "4", "w", "w+1", "w*2"]).map(parse_ordinal)


class TestProperties:
    @given(small_alphas, st.integers(1, 3), st.integers(1, 4))
    @settings(max_examples=40, deadline=None)
    def test_stage_monotonicity(self, alpha, nu, k):
        # containment of later stages in earlier ones holds from stage 1 on;
        # stage 0 is exempt, since the sets avoid their accumulation points
        from rankzero.ordinal import predecessor

        if predecessor(alpha) is None:
            nu = 1
        tree = build_rank_set(alpha, nu, HOST)
        later = derive(tree, k + 1)
        earlier = derive(tree, k)
        for angle in materialize(later, 2, 2):
            assert member(earlier, angle)

    @given(small_alphas, st.integers(1, 2))
    @settings(max_examples=30, deadline=None)
    def test_profile_never_increases(self, alpha, nu):
        from rankzero.ordinal import predecessor

        if predecessor(alpha) is None:
            nu = 1
        tree = build_rank_set(alpha, nu, HOST)
        # the profile constructor itself enforces monotonicity
        rank_profile(tree, [0, 1, 2, alpha])

    @given(small_alphas, st.integers(1, 2), st.integers(1, 3), st.integers(1, 3))
    @settings(max_examples=30, deadline=None)
    def test_materialize_monotone(self, alpha, nu, depth, per):
        from rankzero.ordinal import predecessor

        if predecessor(alpha) is None:
            nu = 1
        tree = build_rank_set(alpha, nu, HOST)
        base = set(materialize(tree, depth, per))
        assert base <= set(materialize(tree, depth + 1, per))
        assert base <= set(materialize(tree, depth, per + 1))


class TestIsolation:
    @pytest.mark.parametrize("alpha,nu", [("2", 1), ("3", 2), ("w", 1), ("w+1", 1)])
    def test_set_avoids_own_accumulation_points(self, alpha, nu):
        tree = build_rank_set(o(alpha), nu, HOST)
        d1 = derive(tree, 1)
        for angle in materialize(tree, 3, 3):
            assert not member(d1, angle)


class TestUnion:
    A1 = Arc(F(1, 8), F(1, 96))
    A2 = Arc(F(3, 8), F(1, 96))

    def test_two_leaves_prune_to_nothing(self):
        u = union_disjoint([(Leaf(self.A1.center), self.A1), (Leaf(self.A2.center), self.A2)])
        assert derive_once(u) is None

    def test_mixed_ranks(self):
        A = build_rank_set(2, 1, self.A1)
        B = build_rank_set(3, 1, self.A2)
        u = union_disjoint([(A, self.A1), (B, self.A2)])
        assert cardinality(derive(u, 1)) == float("inf")
        assert derive(u, 2) == Leaf(F(3, 8))

    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            union_disjoint([(Leaf(F(0)), Arc(F(0), F(1, 16))),
                            (Leaf(F(1, 16)), Arc(F(1, 16), F(1, 16)))])

    def test_tree_outside_declared_arc_rejected(self):
        stray = build_rank_set(2, 1, self.A2)
        with pytest.raises(ValueError):
            union_disjoint([(stray, self.A1)])

    def test_pruning_commutes_with_union(self):
        rng = random.Random(7)
        pool = ["1", "2", "3", "w", "w+1"]
        for _ in range(25):
            alpha_a, alpha_b = o(rng.choice(pool)), o(rng.choice(pool))
            A = build_rank_set(alpha_a, 1, self.A1)
            B = build_rank_set(alpha_b, 1, self.A2)
            u = union_disjoint([(A, self.A1), (B, self.A2)])
            for beta in {Ordinal.from_int(0), Ordinal.from_int(1), alpha_a, alpha_b}:
                lhs = derive(u, beta)
                rhs = union_disjoint(
                    [(derive(A, beta), self.A1), (derive(B, beta), self.A2)]
                )
                assert lhs == rhs


class TestRefine:
    def test_leaf_identity(self):
        leaf = Leaf(F(1, 8))
        assert singleton_refine(leaf, 0, F(1, 8)) is leaf

    def test_two_clusters_pick_one(self):
        tree = build_rank_set(2, 2, HOST)
        limits = sorted(m.limit for m in tree.members)
        refined = singleton_refine(tree, 1, limits[0])
        assert derive(refined, 1) == Leaf(limits[0])

    def test_limit_tree_apex(self):
        tree = build_rank_set(OMEGA, 1, HOST)
        refined = singleton_refine(tree, OMEGA, F(1, 8))
        assert derive(refined, OMEGA) == Leaf(F(1, 8))

    def test_refine_below_collapse_rank(self):
        tree = build_rank_set(OMEGA, 1, HOST)
        refined = singleton_refine(tree, 3, F(1, 8))
        assert derive(refined, 3) == Leaf(F(1, 8))
        assert rank_of(refined) == Ordinal.from_int(3)
        # still a subset of the original
        for angle in materialize(refined, 2, 3):
            assert member(tree, angle)

    def test_refine_into_child(self):
        tree = build_rank_set(3, 1, HOST)
        target = materialize(derive(tree, 1), 1, 3)[0]
        refined = singleton_refine(tree, 1, target)
        assert derive(refined, 1) == Leaf(target)

    def test_bad_target_rejected(self):
        tree = build_rank_set(2, 1, HOST)
        with pytest.raises(ValueError):
            singleton_refine(tree, 1, F(2, 7))


class TestMaterialize:
    def test_leaf(self):
        assert materialize(Leaf(F(1, 8)), 3, 5) == [F(1, 8)]

    def test_grid_count(self):
        assert len(materialize(build_rank_set(3, 1, HOST), 2, 3)) == 9

    def test_monotone_under_inclusion(self):
        tree = build_rank_set(o("w"), 1, HOST)
        small = set(materialize(tree, 2, 3))
        assert small <= set(materialize(tree, 3, 3))
        assert small <= set(materialize(tree, 2, 5))

    def test_all_points_inside_host(self):
        for alpha in ("2", "w", "w^2"):
            for a in materialize(build_rank_set(o(alpha), 1, HOST), 3, 3):
                assert HOST.contains(a)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            materialize(Leaf(F(0)), 0, 1)


class TestProfile:
    def test_non_increasing_enforced(self):
        tree = build_rank_set(3, 2, HOST)
        prof = rank_profile(tree, ["0", "1", "2", "3"])
        cards = [c for _, c in prof.entries]
        assert cards == [float("inf"), float("inf"), 2, 0]

    def test_extra_isolated_point(self):
        prof = rank_profile(Leaf(F(0)), ["0", "1"], extra_isolated=1)
        assert prof.as_dict() == {"0": 2, "1": 0}


class TestJson:
    @pytest.mark.parametrize("alpha,nu", [("1", 1), ("2", 1), ("3", 2), ("w", 1), ("w^2", 1)])
    def test_round_trip_constructions(self, alpha, nu):
        tree = build_rank_set(o(alpha), nu, HOST)
        blob = json.dumps(tree_to_json(tree))
        assert tree_from_json(json.loads(blob)) == tree

    def test_round_trip_derived_and_refined(self):
        tree = build_rank_set(o("w+1"), 1, HOST)
        derived = derive(tree, 2)
        refined = singleton_refine(tree, 3, F(1, 8))
        for t in (derived, refined, None):
            blob = json.dumps(tree_to_json(t))
            assert tree_from_json(json.loads(blob)) == t

    def test_pristine_cluster_uses_compact_schema(self):
        obj = tree_to_json(build_rank_set(2, 1, HOST))
        assert obj["kind"] == "cluster"
        assert set(obj) == {"kind", "limit", "ordinal", "nu", "arc"}

    def test_deterministic_dumps(self):
        tree = build_rank_set(o("w"), 1, HOST)
        assert dumps_tree(tree) == dumps_tree(build_rank_set(o("w"), 1, HOST))
