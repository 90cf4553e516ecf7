"""
CURVE-DESIGNS Automorphism Group Tests
"""

import dataclasses
import json

import pytest
from sympy.combinatorics import Permutation as SympyPermutation
from sympy.combinatorics import PermutationGroup

from curvedesigns.autgroup import (Hypothesis, LinearMap, SearchLimits, alt_membership,
                                   aut_failures, brute_aut, build_aut_report,
                                   expected_stabilizer_order, frobenius_in_block_stabilizers,
                                   frobenius_perm, gl_order, gl_perm_group, multiplication_perm,
                                   primitivity_check, question_5_2, singer_torus,
                                   stabilizer_profile, torus_normalizer)
from curvedesigns.designs import BlockKind, build_design
from curvedesigns.gf2n import FieldError, new_field_ctx
from curvedesigns.permgrp import GuardExceeded, Parity, PermGroup, Permutation, Verdict
from curvedesigns.settings import default_config


def sympy_order(group: PermGroup) -> int:
    return PermutationGroup([SympyPermutation(list(g.images)) for g in group.generators]).order()


@pytest.mark.parametrize("n,order", [(2, 6), (3, 168), (4, 20160)])
def test_gl_orders(n, order):
    assert gl_order(n) == order
    assert gl_perm_group(new_field_ctx(n)).order() == order


def test_stabilizer_order_formula():
    assert [expected_stabilizer_order(n) for n in (2, 3, 4)] == [2, 24, 1344]


def test_linear_maps():
    transvection = LinearMap((1, 0b11, 4))
    assert transvection.apply(0b010) == 0b011
    assert transvection.apply(0b110) == 0b111
    assert LinearMap((1, 2, 4)).permutation().is_identity()
    with pytest.raises(FieldError):
        LinearMap((1, 1, 4))


@pytest.mark.parametrize("n", [2, 3])
def test_parabola_group_is_gl(n):
    ctx = new_field_ctx(n)
    aut = brute_aut(build_design(ctx, BlockKind.PARABOLA))
    assert aut.same_group(gl_perm_group(ctx))


def test_f8_groups(aut_u8, aut_o8, f8):
    assert aut_u8.order() == aut_o8.order() == 168
    assert sympy_order(aut_u8) == sympy_order(aut_o8) == 168
    assert aut_u8.same_group(gl_perm_group(f8))
    assert not aut_o8.same_group(aut_u8)


def test_f4_groups_coincide(f4):
    aut_u = brute_aut(build_design(f4, BlockKind.PARABOLA))
    aut_o = brute_aut(build_design(f4, BlockKind.HYPERBOLA))
    assert aut_u.same_group(PermGroup.symmetric(3))
    assert aut_o.same_group(aut_u)


def test_brute_force_guard():
    design = build_design(new_field_ctx(7), BlockKind.PARABOLA)
    with pytest.raises(GuardExceeded):
        brute_aut(design)


def test_alt_membership(aut_u8, aut_o8, f4):
    assert alt_membership(aut_u8)
    assert alt_membership(aut_o8)
    assert not alt_membership(brute_aut(build_design(f4, BlockKind.PARABOLA)))


def test_primitivity(aut_u8, aut_o8):
    assert primitivity_check(aut_u8)
    assert primitivity_check(aut_o8)
    assert not primitivity_check(PermGroup(7, [Permutation.from_cycles(7, [(0, 1)])]))
    # transitive but imprimitive: blocks {0,1},{2,3}
    assert not primitivity_check(PermGroup(4, [Permutation.from_cycles(4, [(0, 1, 2, 3)])]))


@pytest.mark.parametrize("n", [2, 3, 4, 8, 12, 16])
def test_singer_torus(n):
    ctx = new_field_ctx(n)
    torus = singer_torus(ctx)
    assert torus.order() == ctx.q - 1
    assert torus.is_transitive()


@pytest.mark.parametrize("n", [2, 3, 4, 5, 9])
def test_frobenius(n):
    ctx = new_field_ctx(n)
    theta = frobenius_perm(ctx)
    assert theta.order() == n
    assert theta(0) == 0
    assert frobenius_in_block_stabilizers(ctx)


def test_torus_and_frobenius_in_both_groups(aut_u8, aut_o8, f8):
    for group in (aut_u8, aut_o8):
        assert singer_torus(f8).subgroup_of(group)
        assert frobenius_perm(f8) in group
        assert multiplication_perm(f8, 3) in group


@pytest.mark.parametrize("n,order", [(2, 6), (3, 21)])
def test_torus_normalizer(n, order):
    report = torus_normalizer(new_field_ctx(n))
    assert report.normalizer_order == order
    assert report.enumerated and report.normalizer_count == order
    assert report.all_inside
    assert report.holds


def test_torus_normalizer_without_enumeration():
    report = torus_normalizer(new_field_ctx(10))
    assert report.conjugation_ok
    assert report.theta_order == 10
    assert report.normalizer_order is None and not report.enumerated
    assert report.holds


@pytest.mark.parametrize("kind", ["parabola", "hyperbola"])
def test_f8_stabilizer_profile(kind, aut_u8, aut_o8, f8):
    group = aut_u8 if kind == "parabola" else aut_o8
    profile = stabilizer_profile(f8, kind, group=group)
    assert profile.point_stabilizer_order == profile.block_stabilizer_order == 24
    assert profile.point_stabilizer_orbits == [1, 6]
    assert profile.block_stabilizer_orbits == [3, 4]
    assert profile.point_stabilizer_block_orbits == [3, 4]
    assert profile.conjugacy.verdict is Verdict.CERTIFICATE
    assert profile.holds


def test_f4_stabilizers_are_conjugate(f4):
    profile = stabilizer_profile(f4, BlockKind.PARABOLA)
    assert profile.point_stabilizer_order == 2
    assert profile.conjugacy.verdict is Verdict.WITNESS
    assert profile.holds


def test_group_guard():
    with pytest.raises(GuardExceeded):
        stabilizer_profile(new_field_ctx(5), BlockKind.PARABOLA)


def test_intersection_and_conjugacy_at_n3(aut_u8, aut_o8, f8):
    evidence = question_5_2(f8, aut_u=aut_u8, aut_o=aut_o8)
    assert evidence.in_scope
    assert evidence.intersection_order == evidence.expected_order == 21
    assert evidence.part_i is Hypothesis.CONSISTENT
    assert evidence.normalizer_inside
    assert evidence.sym.verdict is Verdict.WITNESS
    assert evidence.sym.exhaustive
    assert len(evidence.sym.witnesses) == 168
    assert all(w.parity is Parity.ODD for w in evidence.sym.witnesses)
    assert evidence.alt.verdict is Verdict.CERTIFICATE
    assert not evidence.has_inconclusive


def test_intersection_with_other_modulus():
    evidence = question_5_2(new_field_ctx(3, 0b1101))
    assert evidence.intersection_order == 21
    assert evidence.alt.verdict is Verdict.CERTIFICATE


def test_intersection_at_n2(f4):
    evidence = question_5_2(f4)
    assert not evidence.in_scope
    assert evidence.intersection_order == 6


def limits_with(section, key, value) -> SearchLimits:
    settings = default_config()
    settings[section][key] = value
    return SearchLimits.from_settings(settings)


def test_limits_from_settings():
    assert SearchLimits.from_settings(default_config()) == SearchLimits()
    assert SearchLimits.from_settings(default_config(), budget=5).conjugacy_budget == 5


def test_brute_force_guard_from_settings(f8):
    limits = limits_with("guards", "brute_aut_max_degree", 6)
    with pytest.raises(GuardExceeded):
        stabilizer_profile(f8, BlockKind.HYPERBOLA, limits=limits)
    with pytest.raises(GuardExceeded):
        build_aut_report(f8, BlockKind.PARABOLA, limits=limits)
    assert stabilizer_profile(f8, BlockKind.HYPERBOLA, limits=limits, force=True).holds


def test_intersection_guard_from_settings(f8, aut_u8, aut_o8):
    limits = limits_with("guards", "intersection_max_degree", 6)
    with pytest.raises(GuardExceeded):
        question_5_2(f8, aut_u=aut_u8, aut_o=aut_o8, limits=limits)


def test_group_guard_from_settings(f8):
    with pytest.raises(GuardExceeded):
        question_5_2(f8, limits=limits_with("guards", "group_max_n", 2))


def test_short_exhaustive_search_leaves_alt_open(f8, aut_u8, aut_o8):
    limits = limits_with("search", "exhaustive_conjugacy_max_degree", 6)
    evidence = question_5_2(f8, aut_u=aut_u8, aut_o=aut_o8, limits=limits)
    assert evidence.sym.verdict is Verdict.WITNESS
    assert not evidence.sym.exhaustive
    assert all(w.parity is Parity.ODD for w in evidence.sym.witnesses)
    assert evidence.alt.verdict is Verdict.INCONCLUSIVE
    assert evidence.has_inconclusive


def test_report_flags_group_mismatches(f4, f8):
    hyperbola = build_aut_report(f8, BlockKind.HYPERBOLA)
    assert aut_failures(hyperbola) == []
    assert aut_failures(dataclasses.replace(hyperbola, equals_gl=True)) == [
        "Aut(D^o) equals GL(n,2) for n >= 3"]
    parabola = build_aut_report(f8, BlockKind.PARABOLA)
    assert aut_failures(dataclasses.replace(parabola, equals_gl=False)) == [
        "Aut(D^u) differs from GL(n,2)"]
    assert build_aut_report(f4, BlockKind.HYPERBOLA).equals_gl
    assert build_aut_report(f4, BlockKind.HYPERBOLA).failures == []


def test_aut_report_json(f8):
    report = build_aut_report(f8, BlockKind.PARABOLA)
    payload = json.loads(report.to_json())
    assert payload["schema"] == 1
    assert payload["aut_order"] == "168"
    assert payload["equals_gl"] is True
    assert payload["intersection_order"] == "21"
    assert payload["q52_evidence"]["part_i"]["status"] == "consistent"
    assert payload["status"] == "pass"
    assert report.failures == []

    hyperbola = build_aut_report(f8, BlockKind.HYPERBOLA)
    assert hyperbola.equals_gl is False
    assert hyperbola.status == "pass"


def test_aut_report_rejects_complements(f8):
    with pytest.raises(ValueError):
        build_aut_report(f8, BlockKind.COMPLEMENT_PARABOLA)


@pytest.mark.slow
def test_f16_groups(f16):
    aut_u = brute_aut(build_design(f16, BlockKind.PARABOLA))
    aut_o = brute_aut(build_design(f16, BlockKind.HYPERBOLA))
    assert aut_u.same_group(gl_perm_group(f16))
    assert aut_o.order() == 20160
    assert not aut_o.same_group(aut_u)

    for kind, group in ((BlockKind.PARABOLA, aut_u), (BlockKind.HYPERBOLA, aut_o)):
        profile = stabilizer_profile(f16, kind, group=group)
        assert profile.point_stabilizer_order == 1344
        assert profile.block_stabilizer_orbits == [7, 8]
        assert profile.holds

    assert alt_membership(aut_u) and alt_membership(aut_o)

    evidence = question_5_2(f16, aut_u=aut_u, aut_o=aut_o)
    common = sum(1 for g in aut_u.elements() if g in aut_o)
    assert evidence.intersection_order == common == evidence.expected_order == 60
    assert evidence.part_i is Hypothesis.CONSISTENT
    assert evidence.normalizer_inside
    assert evidence.sym.verdict is Verdict.WITNESS
    # both groups lie in Alt, so every conjugator has the parity of the seed isomorphism
    parities = {w.parity for w in evidence.sym.witnesses}
    assert len(parities) == 1
    if parities == {Parity.EVEN}:
        assert evidence.alt.verdict is Verdict.WITNESS
    else:
        assert evidence.alt.verdict is Verdict.INCONCLUSIVE
        assert not evidence.alt.witnesses and not evidence.alt.exhaustive
    assert torus_normalizer(f16).holds
