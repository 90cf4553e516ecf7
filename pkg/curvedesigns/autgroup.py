"""
CURVE-DESIGNS Automorphism Groups
GL_n(2) acting on F_q^x, brute-force design automorphisms, stabilizer
structure, and the evidence checks comparing Aut(D^u) with Aut(D^o)
"""

from __future__ import annotations

import json
import logging
import math
import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .designs import (BlockKind, IncidenceStructure, IsomorphismSearch, build_design,
                      find_isomorphism)
from .gf2n import FieldCtx, FieldError, gf2_rank
from .permgrp import (DEFAULT_CONJUGACY_BUDGET, DEFAULT_GUARD_DEGREE,
                      EXHAUSTIVE_CONJUGACY_DEGREE, Ambient,
                      ConjugacyReport, GuardExceeded, PermGroup, Permutation,
                      Verdict, check_guard, conjugacy_witnesses, induced_action,
                      intersection, point_stabilizer, schreier_sims, setwise_stabilizer)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_GROUP_MAX_N = 4
NORMALIZER_ORDER_MAX_N = 8


class Hypothesis(Enum):
    CONSISTENT = "consistent"
    INCONSISTENT = "inconsistent"


def gl_order(n: int) -> int:
    return math.prod((1 << n) - (1 << i) for i in range(n))


def expected_stabilizer_order(n: int) -> int:
    """2^(n-1) |GL_(n-1)(2)|"""
    return (1 << (n - 1)) * math.prod((1 << (n - 1)) - (1 << i) for i in range(n - 1))


@dataclass(frozen=True)
class SearchLimits:
    """Feasibility guards and budgets for the group computations"""
    group_max_n: int = DEFAULT_GROUP_MAX_N
    brute_aut_max_degree: int = DEFAULT_GUARD_DEGREE
    intersection_max_degree: int = DEFAULT_GUARD_DEGREE
    conjugacy_budget: int = DEFAULT_CONJUGACY_BUDGET
    exhaustive_conjugacy_max_degree: int = EXHAUSTIVE_CONJUGACY_DEGREE

    @classmethod
    def from_settings(cls, settings: dict, budget: Optional[int] = None) -> SearchLimits:
        guards, search = settings['guards'], settings['search']
        return cls(
            group_max_n=guards['group_max_n'],
            brute_aut_max_degree=guards['brute_aut_max_degree'],
            intersection_max_degree=guards['intersection_max_degree'],
            conjugacy_budget=budget if budget is not None else search['conjugacy_budget'],
            exhaustive_conjugacy_max_degree=search['exhaustive_conjugacy_max_degree'],
        )


DEFAULT_LIMITS = SearchLimits()


def check_group_n(ctx: FieldCtx, force: bool, max_n: int) -> None:
    if ctx.n > max_n:
        if not force:
            raise GuardExceeded(f"group computations at n = {ctx.n} exceed guard n <= {max_n}; use force")
        logger.warning("Forcing group computations at n = %d beyond guard %d", ctx.n, max_n)


# --- linear maps ------------------------------------------------------------------

@dataclass(frozen=True)
class LinearMap:
    """F_2-linear map of F_q given by the images of the basis x^0 .. x^(n-1)"""
    columns: Tuple[int, ...]

    def __post_init__(self):
        n = len(self.columns)
        if any(not 0 <= c < 1 << n for c in self.columns):
            raise FieldError("column outside F_q")
        if gf2_rank(self.columns) != n:
            raise FieldError(f"columns {self.columns} are linearly dependent")

    @property
    def n(self) -> int:
        return len(self.columns)

    def apply(self, x: int) -> int:
        out = 0
        i = 0
        while x:
            if x & 1:
                out ^= self.columns[i]
            x >>= 1
            i += 1
        return out

    def permutation(self) -> Permutation:
        """Action on the point indices of F_q^x (index i is the element i + 1)"""
        return Permutation(tuple(self.apply(i + 1) - 1 for i in range((1 << self.n) - 1)))


def gl_generators(n: int) -> Tuple[LinearMap, LinearMap]:
    """A transvection and the cyclic shift of the polynomial basis"""
    transvection = LinearMap((1, 0b11) + tuple(1 << i for i in range(2, n)))
    shift = LinearMap(tuple(1 << ((i + 1) % n) for i in range(n)))
    return transvection, shift


def gl_perm_group(ctx: FieldCtx) -> PermGroup:
    return PermGroup(ctx.order, [m.permutation() for m in gl_generators(ctx.n)],
                     name=f"GL({ctx.n},2)")


# --- field permutations ------------------------------------------------------------------

def _points(ctx: FieldCtx) -> np.ndarray:
    return np.arange(1, ctx.q, dtype=np.int64)


def multiplication_perm(ctx: FieldCtx, t: int) -> Permutation:
    """nu_t : x -> t x"""
    if not 0 < t < ctx.q:
        raise FieldError("multiplier must be nonzero")
    return Permutation(tuple((ctx.mul_array(t, _points(ctx)) - 1).tolist()))


def frobenius_perm(ctx: FieldCtx) -> Permutation:
    """theta : x -> x^2"""
    return Permutation(tuple((ctx.square_array(_points(ctx)) - 1).tolist()))


def singer_torus(ctx: FieldCtx) -> PermGroup:
    """Multiplications by F_q^x, generated by nu_g for the primitive g"""
    return PermGroup(ctx.order, [multiplication_perm(ctx, ctx.tables.generator)],
                     name=f"T_{ctx.q}")


# --- brute force ---------------------------------------------------------------------

def brute_aut(design: IncidenceStructure, *, force: bool = False,
              max_degree: int = DEFAULT_GUARD_DEGREE) -> PermGroup:
    """Full automorphism group by levelled backtracking.

    Level i looks for automorphisms fixing points 0..i-1 and moving i; one
    search per candidate image not already in the orbit of i under the
    generators found so far. The generators form a strong generating set for
    the base 0..v-1.
    """
    check_guard(design.v, force, max_degree, "brute-force automorphism search")
    start = time.perf_counter()
    search = IsomorphismSearch(design, design)
    gens: List[Permutation] = []
    searches = 0
    for i in reversed(range(design.v)):
        prefix = {p: p for p in range(i)}
        reached = _orbit(gens, i)
        for c in range(i + 1, design.v):
            if c in reached:
                continue
            searches += 1
            images = next(search.search({**prefix, i: c}), None)
            if images is not None:
                gens.append(Permutation(images))
                reached = _orbit(gens, i)
        logger.debug("Level %d: orbit %d, %d generators", i, len(reached), len(gens))
    group = PermGroup(design.v, gens, name=f"Aut({design.kind.value})")
    logger.info("Brute-force Aut of %s design on %d points: order %d, %d searches, %d nodes (%.3fs)",
                design.kind.value, design.v, group.order(), searches, search.nodes,
                time.perf_counter() - start)
    return group


def _orbit(gens: Sequence[Permutation], point: int) -> set:
    seen = {point}
    queue = deque([point])
    while queue:
        a = queue.popleft()
        for g in gens:
            b = g.images[a]
            if b not in seen:
                seen.add(b)
                queue.append(b)
    return seen


# --- normalizer of the torus -----------------------------------------------------------

@dataclass
class NormalizerReport:
    n: int
    torus_order: int
    theta_order: int
    conjugation_ok: bool
    normalizer_order: Optional[int] = None
    enumerated: bool = False
    normalizer_count: Optional[int] = None
    all_inside: Optional[bool] = None

    @property
    def holds(self) -> bool:
        expected = self.n * self.torus_order
        if not self.conjugation_ok or self.theta_order != self.n:
            return False
        if self.normalizer_order is not None and self.normalizer_order != expected:
            return False
        if self.enumerated and (self.normalizer_count != expected or not self.all_inside):
            return False
        return True

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "torus_order": self.torus_order,
            "theta_order": self.theta_order,
            "conjugation_ok": self.conjugation_ok,
            "normalizer_order": self.normalizer_order,
            "enumerated": self.enumerated,
            "normalizer_count": self.normalizer_count,
            "all_inside": self.all_inside,
            "holds": self.holds,
        }


def torus_normalizer(ctx: FieldCtx, *, force: bool = False,
                     max_n: int = DEFAULT_GROUP_MAX_N) -> NormalizerReport:
    """theta nu_g theta^-1 = nu_(g^2) always; for small n also enumerate GL_n(2)
    and count the elements normalizing T"""
    g = ctx.tables.generator
    nu_g = multiplication_perm(ctx, g)
    theta = frobenius_perm(ctx)
    g_squared = int(ctx.square_array(np.array([g]))[0])
    conjugation_ok = theta * nu_g * theta.inverse() == multiplication_perm(ctx, g_squared)
    report = NormalizerReport(n=ctx.n, torus_order=nu_g.order(), theta_order=theta.order(),
                              conjugation_ok=conjugation_ok)

    normalizer = PermGroup(ctx.order, [theta, nu_g], name="<theta,T>")
    if ctx.n <= NORMALIZER_ORDER_MAX_N or force:
        report.normalizer_order = normalizer.order()
    if ctx.n <= max_n or force:
        start = time.perf_counter()
        torus = {multiplication_perm(ctx, t).images for t in range(1, ctx.q)}
        count = 0
        inside = True
        for x in gl_perm_group(ctx).elements():
            if (x * nu_g * x.inverse()).images in torus:
                count += 1
                inside = inside and normalizer.contains(x)
        report.enumerated = True
        report.normalizer_count = count
        report.all_inside = inside
        logger.info("Normalizer of T_%d in GL(%d,2): %d elements (%.3fs)",
                    ctx.q, ctx.n, count, time.perf_counter() - start)
    return report


def torus_normalizer_check(ctx: FieldCtx, **kwargs) -> bool:
    return torus_normalizer(ctx, **kwargs).holds


def frobenius_in_block_stabilizers(ctx: FieldCtx) -> bool:
    """theta fixes the blocks labelled 1 of both designs"""
    theta = frobenius_perm(ctx)
    return all(
        theta.image_mask(m) == m
        for m in (build_design(ctx, BlockKind.PARABOLA).block_masks[0],
                  build_design(ctx, BlockKind.HYPERBOLA).block_masks[0])
    )


# --- stabilizers -------------------------------------------------------------------------

def block_action(group: PermGroup, design: IncidenceStructure) -> PermGroup:
    return induced_action(group, design.block_masks)


def alt_membership(group: PermGroup) -> bool:
    """Every generator is even, so the group lies in Alt"""
    return group.all_even()


def primitivity_check(group: PermGroup, point: int = 0) -> bool:
    """The point stabilizer is maximal: <Stab, u_c> = G for every coset representative u_c"""
    if not group.is_transitive():
        return False
    chain = group.chain_with_base([point])
    stab_gens = [g for g, _ in chain.stab.generators()]
    order = chain.order()
    for c, (u_c, _) in chain.transversal.items():
        if c == point:
            continue
        if schreier_sims(group.degree, stab_gens + [u_c]).order() != order:
            return False
    return True


@dataclass
class StabilizerProfile:
    n: int
    kind: str
    group_order: int
    point_stabilizer_order: int
    block_stabilizer_order: int
    expected_order: int
    point_stabilizer_orbits: List[int]
    block_stabilizer_orbits: List[int]
    point_stabilizer_block_orbits: List[int]
    orbit_stabilizer_ok: bool
    conjugacy: ConjugacyReport

    @property
    def orders_ok(self) -> bool:
        return self.point_stabilizer_order == self.block_stabilizer_order == self.expected_order

    @property
    def expected_orbits(self) -> List[int]:
        half = 1 << (self.n - 1)
        return sorted([half - 1, half])

    @property
    def orbits_ok(self) -> bool:
        return (self.block_stabilizer_orbits == self.expected_orbits
                and self.point_stabilizer_block_orbits == self.expected_orbits)

    @property
    def conjugacy_ok(self) -> bool:
        expected = Verdict.WITNESS if self.n == 2 else Verdict.CERTIFICATE
        return self.conjugacy.verdict is expected

    @property
    def holds(self) -> bool:
        return self.orders_ok and self.orbits_ok and self.orbit_stabilizer_ok and self.conjugacy_ok

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "group_order": str(self.group_order),
            "point_stabilizer_order": str(self.point_stabilizer_order),
            "block_stabilizer_order": str(self.block_stabilizer_order),
            "expected_order": str(self.expected_order),
            "point_stabilizer_orbits": self.point_stabilizer_orbits,
            "block_stabilizer_orbits": self.block_stabilizer_orbits,
            "point_stabilizer_block_orbits": self.point_stabilizer_block_orbits,
            "orbit_stabilizer_ok": self.orbit_stabilizer_ok,
            "conjugacy": self.conjugacy.to_dict(),
            "holds": self.holds,
        }


def stabilizer_profile(ctx: FieldCtx, kind: BlockKind | str, *,
                       group: Optional[PermGroup] = None, force: bool = False,
                       limits: SearchLimits = DEFAULT_LIMITS) -> StabilizerProfile:
    """Stabilizers of the point 1 and of the block labelled 1 in Aut of the design"""
    kind = BlockKind(kind)
    check_group_n(ctx, force, limits.group_max_n)
    design = build_design(ctx, kind)
    if group is None:
        group = (gl_perm_group(ctx) if kind is BlockKind.PARABOLA
                 else brute_aut(design, force=force, max_degree=limits.brute_aut_max_degree))

    block_mask = design.block_masks[0]
    point_stab = point_stabilizer(group, 0)
    block_stab = setwise_stabilizer(group, [i for i in range(design.v) if block_mask >> i & 1])
    on_blocks = block_action(group, design)
    order = group.order()
    orbit_stabilizer_ok = (
        len(group.orbit(0)) * point_stab.order() == order
        and len(on_blocks.orbit(0)) * block_stab.order() == order
    )
    conjugacy = conjugacy_witnesses(point_stab, block_stab, within=group,
                                    budget=limits.conjugacy_budget)
    return StabilizerProfile(
        n=ctx.n,
        kind=kind.value,
        group_order=order,
        point_stabilizer_order=point_stab.order(),
        block_stabilizer_order=block_stab.order(),
        expected_order=expected_stabilizer_order(ctx.n),
        point_stabilizer_orbits=point_stab.orbit_sizes(),
        block_stabilizer_orbits=block_stab.orbit_sizes(),
        point_stabilizer_block_orbits=block_action(point_stab, design).orbit_sizes(),
        orbit_stabilizer_ok=orbit_stabilizer_ok,
        conjugacy=conjugacy,
    )


# --- Aut(D^u) against Aut(D^o) -----------------------------------------------------------

@dataclass
class Q52Evidence:
    """Evidence on Aut(D^u) & Aut(D^o) and on conjugacy of the two groups"""
    n: int
    in_scope: bool
    intersection_order: int
    expected_order: int
    part_i: Hypothesis
    normalizer_inside: bool
    sym: ConjugacyReport
    alt: ConjugacyReport
    seed_isomorphism: Optional[List[int]] = None

    @property
    def has_inconclusive(self) -> bool:
        return Verdict.INCONCLUSIVE in (self.sym.verdict, self.alt.verdict)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "in_scope": self.in_scope,
            "part_i": {
                "status": self.part_i.value,
                "intersection_order": str(self.intersection_order),
                "expected_order": str(self.expected_order),
                "normalizer_inside": self.normalizer_inside,
            },
            "part_ii": {
                "sym": self.sym.to_dict(),
                "alt": self.alt.to_dict(),
                "seed_isomorphism": self.seed_isomorphism,
            },
        }


def question_5_2(ctx: FieldCtx, *, aut_u: Optional[PermGroup] = None,
                 aut_o: Optional[PermGroup] = None, force: bool = False,
                 limits: SearchLimits = DEFAULT_LIMITS) -> Q52Evidence:
    """(i) is Aut(D^u) & Aut(D^o) = <theta, T> of order n(q-1)?
    (ii) are the two groups conjugate in Sym, and in Alt?"""
    check_group_n(ctx, force, limits.group_max_n)
    d_u = build_design(ctx, BlockKind.PARABOLA)
    d_o = build_design(ctx, BlockKind.HYPERBOLA)
    aut_u = aut_u or brute_aut(d_u, force=force, max_degree=limits.brute_aut_max_degree)
    aut_o = aut_o or brute_aut(d_o, force=force, max_degree=limits.brute_aut_max_degree)

    common = intersection(aut_u, aut_o, force=force, max_degree=limits.intersection_max_degree)
    expected = ctx.n * ctx.order
    normalizer_inside = all(
        common.contains(p) for p in
        (frobenius_perm(ctx), multiplication_perm(ctx, ctx.tables.generator))
    )
    part_i = (Hypothesis.CONSISTENT if common.order() == expected and normalizer_inside
              else Hypothesis.INCONSISTENT)

    seed = find_isomorphism(d_u, d_o)
    seeds = [seed] if seed is not None else []
    sym = conjugacy_witnesses(aut_u, aut_o, ambient=Ambient.SYM, budget=limits.conjugacy_budget,
                              seeds=seeds,
                              exhaustive_max_degree=limits.exhaustive_conjugacy_max_degree)
    alt = sym.restricted_to_alt()
    logger.info("Aut(D^u) & Aut(D^o) at n=%d: order %d (%s); Sym %s, Alt %s",
                ctx.n, common.order(), part_i.value, sym.verdict.value, alt.verdict.value)
    return Q52Evidence(
        n=ctx.n,
        in_scope=ctx.n >= 3,
        intersection_order=common.order(),
        expected_order=expected,
        part_i=part_i,
        normalizer_inside=normalizer_inside,
        sym=sym,
        alt=alt,
        seed_isomorphism=list(seed.images) if seed is not None else None,
    )


# --- report ----------------------------------------------------------------------------

@dataclass
class AutReport:
    n: int
    q: int
    modulus: int
    kind: str
    aut_order: int
    gl_order: int
    equals_gl: bool
    parity_all_even: bool
    transitive_on_blocks: bool
    primitive: bool
    torus_inside: bool
    frobenius_inside: bool
    stabilizers: StabilizerProfile
    normalizer: NormalizerReport
    q52_evidence: Q52Evidence
    schema: int = SCHEMA_VERSION
    failures: List[str] = field(default_factory=list)

    @property
    def intersection_order(self) -> int:
        return self.q52_evidence.intersection_order

    @property
    def status(self) -> str:
        if self.failures:
            return "fail"
        if self.q52_evidence.has_inconclusive:
            return "inconclusive"
        return "pass"

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "n": self.n,
            "q": str(self.q),
            "modulus": f"{self.modulus:#x}",
            "kind": self.kind,
            "aut_order": str(self.aut_order),
            "gl_order": str(self.gl_order),
            "equals_gl": self.equals_gl,
            "parity_all_even": self.parity_all_even,
            "transitive_on_blocks": self.transitive_on_blocks,
            "primitive": self.primitive,
            "torus_inside": self.torus_inside,
            "frobenius_inside": self.frobenius_inside,
            "stabilizers": self.stabilizers.to_dict(),
            "normalizer": self.normalizer.to_dict(),
            "intersection_order": str(self.intersection_order),
            "q52_evidence": self.q52_evidence.to_dict(),
            "status": self.status,
            "failures": self.failures,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def build_aut_report(ctx: FieldCtx, kind: BlockKind | str = BlockKind.PARABOLA, *,
                     force: bool = False, limits: SearchLimits = DEFAULT_LIMITS) -> AutReport:
    kind = BlockKind(kind)
    if not kind.is_curve:
        raise ValueError(f"automorphism reports cover hyperbola and parabola designs, not {kind.value}")
    check_group_n(ctx, force, limits.group_max_n)
    start = time.perf_counter()
    d_u = build_design(ctx, BlockKind.PARABOLA)
    d_o = build_design(ctx, BlockKind.HYPERBOLA)
    aut_u = brute_aut(d_u, force=force, max_degree=limits.brute_aut_max_degree)
    aut_o = brute_aut(d_o, force=force, max_degree=limits.brute_aut_max_degree)
    group, design = (aut_u, d_u) if kind is BlockKind.PARABOLA else (aut_o, d_o)

    gl = gl_perm_group(ctx)
    torus = singer_torus(ctx)
    theta = frobenius_perm(ctx)
    stabilizers = stabilizer_profile(ctx, kind, group=group, force=force, limits=limits)
    report = AutReport(
        n=ctx.n,
        q=ctx.q,
        modulus=ctx.modulus,
        kind=kind.value,
        aut_order=group.order(),
        gl_order=gl_order(ctx.n),
        equals_gl=group.same_group(gl),
        parity_all_even=alt_membership(group),
        transitive_on_blocks=block_action(group, design).is_transitive(),
        primitive=primitivity_check(group),
        torus_inside=torus.subgroup_of(aut_u) and torus.subgroup_of(aut_o),
        frobenius_inside=aut_u.contains(theta) and aut_o.contains(theta),
        stabilizers=stabilizers,
        normalizer=torus_normalizer(ctx, force=force, max_n=limits.group_max_n),
        q52_evidence=question_5_2(ctx, aut_u=aut_u, aut_o=aut_o, force=force, limits=limits),
    )

    report.failures = aut_failures(report)
    logger.info("Aut report n=%d %s: %s (%.3fs)", ctx.n, kind.value, report.status,
                time.perf_counter() - start)
    return report


def aut_failures(report: AutReport) -> List[str]:
    """Names of the expected properties the report contradicts"""
    kind = BlockKind(report.kind)
    checks = {
        "aut order differs from |GL(n,2)|": report.aut_order == report.gl_order,
        "Aut(D^u) differs from GL(n,2)": kind is not BlockKind.PARABOLA or report.equals_gl,
        "Aut(D^o) equals GL(n,2) for n >= 3": (kind is not BlockKind.HYPERBOLA or report.n < 3
                                               or not report.equals_gl),
        "odd generator for n >= 3": report.n < 3 or report.parity_all_even,
        "not transitive on blocks": report.transitive_on_blocks,
        "torus outside Aut": report.torus_inside,
        "Frobenius outside Aut": report.frobenius_inside,
        "stabilizer structure": report.stabilizers.holds,
        "torus normalizer": report.normalizer.holds,
    }
    return [name for name, ok in checks.items() if not ok]
