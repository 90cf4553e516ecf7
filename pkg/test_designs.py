"""
CURVE-DESIGNS Design Tests
Construction, parameter verification, duality and the parabola hyperplane structure
"""

import networkx as nx
import numpy as np
import pytest

from curvedesigns.designs import (BlockKind, DesignError, IncidenceStructure, incidence_bytes,
                                  action_identities_hold, block_intersection_sizes,
                                  build_design, complement, complement_dual_holds, dual,
                                  enumerates_hyperplanes, expected_params, fano_plane,
                                  find_isomorphism, format_block_file, gamma_dual_check,
                                  gamma_dual_holds, hyperbola_block, is_isomorphism,
                                  kernel_in_image, parabola_block, parse_block_file,
                                  reciprocity_holds, split_count, splits,
                                  triple_intersection_holds, verify_design)
from curvedesigns.gf2n import new_field_ctx

CURVES = [BlockKind.PARABOLA, BlockKind.HYPERBOLA]


def values(block):
    """Field values of the block points"""
    return sorted(i + 1 for i in block.points())


def incidence_graph(design: IncidenceStructure) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from((("p", i) for i in range(design.v)), side="point")
    graph.add_nodes_from((("b", k) for k in range(design.b)), side="block")
    for k, block in enumerate(design.blocks):
        graph.add_edges_from((("b", k), ("p", i)) for i in block.points())
    return graph


def networkx_isomorphic(d1, d2) -> bool:
    return nx.is_isomorphic(incidence_graph(d1), incidence_graph(d2),
                            node_match=lambda a, b: a["side"] == b["side"])


# --- blocks -----------------------------------------------------------------------

def test_f8_blocks_of_label_one(f8):
    assert values(hyperbola_block(f8, f8.one)) == [3, 5, 7]
    assert values(parabola_block(f8, f8.one)) == [2, 4, 6]


def test_f4_blocks_are_singletons(f4):
    assert values(hyperbola_block(f4, f4.one)) == [1]
    assert values(parabola_block(f4, f4.one)) == [1]
    parabola = build_design(f4, BlockKind.PARABOLA)
    assert [values(b) for b in parabola.blocks] == [[1], [3], [2]]
    hyperbola = build_design(f4, BlockKind.HYPERBOLA)
    assert all(b.size == 1 for b in hyperbola.blocks)


def test_zero_label_rejected(f8):
    with pytest.raises(DesignError):
        parabola_block(f8, f8.zero)
    with pytest.raises(DesignError):
        hyperbola_block(f8, f8.zero)


def test_splits(f8):
    assert splits(f8, f8.one, f8.element(2))
    assert not splits(f8, f8.one, f8.one)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_blocks_describe_split_quadratics(n):
    ctx = new_field_ctx(n)
    for a in ctx.nonzero():
        hyp = hyperbola_block(ctx, a)
        par = parabola_block(ctx, a)
        for b in ctx.nonzero():
            assert (b.value - 1 in hyp) == splits(ctx, b, a)
            assert (b.value - 1 in par) == splits(ctx, a, b)


# --- parameters ---------------------------------------------------------------------

def test_fano_parameters(parabola8, hyperbola8):
    for design in (parabola8, hyperbola8):
        check = verify_design(design)
        assert check.ok
        assert str(check.params) == "2-(7,3,1)"
        assert (check.params.b, check.params.r) == (7, 3)
        assert check.exhaustive and check.pairs_checked == 21


def test_f16_parameters(f16):
    for kind in CURVES:
        check = verify_design(build_design(f16, kind))
        assert str(check.params) == "2-(15,7,3)"


def test_degenerate_n2(f4):
    check = verify_design(build_design(f4, BlockKind.HYPERBOLA))
    assert check.ok
    assert str(check.params) == "2-(3,1,0)"


@pytest.mark.parametrize("n", [
    2, 3, 4, 5, 6, 7, 8,
    pytest.param(9, marks=pytest.mark.slow),
    pytest.param(10, marks=pytest.mark.slow),
    pytest.param(11, marks=pytest.mark.slow),
])
@pytest.mark.parametrize("kind", CURVES)
def test_curve_design_parameters(n, kind):
    ctx = new_field_ctx(n)
    design = build_design(ctx, kind)
    assert len(set(design.block_masks)) == ctx.q - 1
    check = verify_design(design)
    assert check.ok, check.violation
    assert check.params == expected_params(ctx, kind)


@pytest.mark.slow
@pytest.mark.parametrize("n", [12, 13, 14, 15, 16])
@pytest.mark.parametrize("kind", CURVES)
def test_sampled_parameters_at_large_n(n, kind):
    ctx = new_field_ctx(n)
    design = build_design(ctx, kind)
    first = verify_design(design, sample_pairs=100_000, seed=7)
    assert first.ok, first.violation
    assert not first.exhaustive
    assert first.pairs_checked >= 100_000
    assert first.params == expected_params(ctx, kind)
    second = verify_design(design, sample_pairs=100_000, seed=7)
    assert second.pairs_checked == first.pairs_checked


@pytest.mark.parametrize("kind", CURVES + [BlockKind.COMPLEMENT_HYPERBOLA])
def test_parameters_independent_of_modulus(kind):
    default = new_field_ctx(4)
    other = new_field_ctx(4, 0b11001)
    assert default.modulus != other.modulus
    checks = [verify_design(build_design(ctx, kind)) for ctx in (default, other)]
    assert all(check.ok for check in checks)
    assert checks[0].params == checks[1].params == expected_params(other, kind)


def test_t1_check(parabola8):
    check = verify_design(parabola8, t=1)
    assert check.ok
    assert (check.params.k, check.params.r) == (3, 3)
    with pytest.raises(DesignError):
        verify_design(parabola8, t=3)


def test_pair_violation_has_witness(hyperbola8, swap_points):
    broken = swap_points(hyperbola8)
    check = verify_design(broken)
    assert not check.ok
    assert "pair" in check.violation
    i, j = check.witness
    through = sum(1 for m in broken.block_masks if m >> i & 1 and m >> j & 1)
    assert f"lies on {through} blocks" in check.violation


def test_block_size_violation(parabola8):
    masks = list(parabola8.block_masks)
    missing = next(i for i in range(7) if not masks[2] >> i & 1)
    masks[2] |= 1 << missing
    check = verify_design(IncidenceStructure.from_masks(7, masks))
    assert not check.ok
    assert check.witness == (2,)


# --- complements and duals --------------------------------------------------------

def test_complement_parameters(f8):
    check = verify_design(build_design(f8, BlockKind.COMPLEMENT_HYPERBOLA))
    assert str(check.params) == "2-(7,4,2)"


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7, 8])
def test_complement_blocks_meet_in_quarter(n):
    ctx = new_field_ctx(n)
    comp = build_design(ctx, BlockKind.COMPLEMENT_HYPERBOLA)
    assert block_intersection_sizes(comp) == {ctx.q // 4: comp.b * (comp.b - 1) // 2}
    assert verify_design(comp).params == expected_params(ctx, BlockKind.COMPLEMENT_HYPERBOLA)
    assert list(block_intersection_sizes(build_design(ctx, BlockKind.PARABOLA))) == [ctx.q // 4 - 1]


def test_complement_is_an_involution(hyperbola8):
    twice = complement(complement(hyperbola8))
    assert twice.kind is BlockKind.HYPERBOLA
    assert np.array_equal(twice.incidence, hyperbola8.incidence)


def test_dual_is_an_involution(parabola8):
    twice = dual(dual(parabola8))
    assert np.array_equal(twice.incidence, parabola8.incidence)
    assert [lbl.value for lbl in twice.labels] == [lbl.value for lbl in parabola8.labels]


def test_dual_needs_square_incidence():
    with pytest.raises(DesignError):
        dual(IncidenceStructure.from_masks(3, [0b011, 0b110]))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7, 8])
def test_gamma_duality(n):
    assert gamma_dual_check(new_field_ctx(n))


def test_gamma_duality_negative_control(hyperbola8, parabola8, swap_points):
    assert gamma_dual_holds(hyperbola8, parabola8)
    assert not gamma_dual_holds(swap_points(hyperbola8), parabola8)


def test_gamma_duality_other_modulus():
    assert gamma_dual_check(new_field_ctx(3, 0b1101))
    assert gamma_dual_check(new_field_ctx(4, 0b11001))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7, 8, 9, 10])
def test_reciprocity(n):
    assert reciprocity_holds(new_field_ctx(n))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7, 8])
def test_complement_duality(n):
    assert complement_dual_holds(new_field_ctx(n))


# --- isomorphism --------------------------------------------------------------------

def test_both_designs_are_the_fano_plane(parabola8, hyperbola8):
    fano = fano_plane()
    assert str(verify_design(fano).params) == "2-(7,3,1)"
    for design in (parabola8, hyperbola8):
        sigma = find_isomorphism(design, fano)
        assert sigma is not None
        assert is_isomorphism(design, fano, sigma)


def test_no_isomorphism_onto_complement(parabola8):
    assert find_isomorphism(parabola8, complement(parabola8)) is None


def test_curve_designs_isomorphic_at_n4(f16):
    d_u = build_design(f16, BlockKind.PARABOLA)
    d_o = build_design(f16, BlockKind.HYPERBOLA)
    sigma = find_isomorphism(d_u, d_o)
    assert sigma is not None and is_isomorphism(d_u, d_o, sigma)


def test_isomorphism_agrees_with_networkx(parabola8, hyperbola8, swap_points):
    broken = swap_points(hyperbola8)
    pairs = [(parabola8, hyperbola8), (parabola8, fano_plane()), (parabola8, broken),
             (dual(parabola8), hyperbola8)]
    for d1, d2 in pairs:
        assert (find_isomorphism(d1, d2) is not None) == networkx_isomorphic(d1, d2)


# --- parabola structure --------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7, 8])
def test_parabola_blocks_are_hyperplanes(n):
    assert enumerates_hyperplanes(new_field_ctx(n))


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7, pytest.param(8, marks=pytest.mark.slow)])
def test_triple_intersection(n):
    assert triple_intersection_holds(new_field_ctx(n))


@pytest.mark.parametrize("n", [
    2, 3, 4, 5, 6,
    pytest.param(7, marks=pytest.mark.slow),
    pytest.param(8, marks=pytest.mark.slow),
])
def test_action_identities(n):
    assert action_identities_hold(new_field_ctx(n))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7, 8, 9])
def test_kernel_in_image_iff_n_even(n):
    ctx = new_field_ctx(n)
    assert kernel_in_image(ctx, ctx.one) == (n % 2 == 0)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_split_count(n):
    ctx = new_field_ctx(n)
    for a in ctx.nonzero():
        for b in ctx.nonzero():
            if a != b:
                assert split_count(ctx, a, b) == ctx.q // 4 - 1


# --- block files ---------------------------------------------------------------------

def test_block_file(parabola8):
    text = format_block_file(parabola8)
    lines = text.splitlines()
    assert lines[0] == "7 7 3 0xb parabola"
    assert lines[1] == "1:2,4,6"
    assert len(lines) == 8
    parsed = parse_block_file(text)
    assert parsed.kind is BlockKind.PARABOLA
    assert np.array_equal(parsed.incidence, parabola8.incidence)
    assert parsed.labels == parabola8.labels


def test_custom_block_file():
    text = format_block_file(fano_plane())
    assert text.splitlines()[0] == "7 7 0 0x0 custom"
    assert parse_block_file(text).same_blocks(fano_plane())


@pytest.mark.parametrize("text", [
    "",
    "7 7 3 parabola\n",
    "7 2 3 0xb parabola\n1:2,4,6\n",
    "7 1 3 0xb parabola\n1:2,4,8\n",
    "7 1 3 0xb parabola\n1:2,4,g\n",
    "7 1 3 0xf parabola\n1:2,4,6\n",
    "8 1 3 0xb parabola\n1:2,4,6\n",
])
def test_bad_block_files(text):
    with pytest.raises(DesignError):
        parse_block_file(text)


def test_incidence_size_estimate():
    assert incidence_bytes(new_field_ctx(3)) == 7
    assert incidence_bytes(new_field_ctx(16)) == 65535 * 8192


def test_large_incidence_is_logged(f8, monkeypatch, caplog):
    monkeypatch.setattr("curvedesigns.designs.LARGE_INCIDENCE_BYTES", 4)
    with caplog.at_level("WARNING", logger="curvedesigns.designs"):
        build_design(f8, BlockKind.HYPERBOLA)
    assert "MiB of packed incidence" in caplog.text


def test_verify_benchmark(benchmark):
    design = build_design(new_field_ctx(9), BlockKind.HYPERBOLA)
    check = benchmark(verify_design, design)
    assert check.ok
