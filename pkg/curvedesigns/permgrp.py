"""
CURVE-DESIGNS Permutation Groups
Deterministic Schreier-Sims, stabilizers, intersections and conjugacy searches
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

Images = Tuple[int, ...]

DEFAULT_GUARD_DEGREE = 63
EXHAUSTIVE_CONJUGACY_DEGREE = 7
DEFAULT_CONJUGACY_BUDGET = 200_000


class PermutationError(ValueError):
    """Malformed permutation, group or permutation file"""


class GuardExceeded(RuntimeError):
    """A feasibility guard was hit and force was not given"""


class Parity(Enum):
    EVEN = "even"
    ODD = "odd"


class Ambient(Enum):
    SYM = "sym"
    ALT = "alt"


class Verdict(Enum):
    WITNESS = "witness"
    CERTIFICATE = "certificate"
    INCONCLUSIVE = "inconclusive"


# --- raw image tuples ---------------------------------------------------------

def _mult(p: Images, r: Images) -> Images:
    """p o r, r applied first"""
    return tuple([p[x] for x in r])


def _inverse(p: Images) -> Images:
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


def _identity(degree: int) -> Images:
    return tuple(range(degree))


# --- Permutation --------------------------------------------------------------

@dataclass(frozen=True)
class Permutation:
    """A bijection of {0..v-1}; images[i] is the image of i"""
    images: Images

    def __post_init__(self):
        images = tuple(int(x) for x in self.images)
        if sorted(images) != list(range(len(images))):
            raise PermutationError(f"not a permutation of 0..{len(images) - 1}: {images}")
        object.__setattr__(self, "images", images)

    @classmethod
    def _trusted(cls, images: Images) -> Permutation:
        perm = object.__new__(cls)
        object.__setattr__(perm, "images", images)
        return perm

    @classmethod
    def identity(cls, degree: int) -> Permutation:
        return cls._trusted(_identity(degree))

    @classmethod
    def from_cycles(cls, degree: int, cycles: Iterable[Sequence[int]]) -> Permutation:
        images = list(range(degree))
        seen = set()
        for cycle in cycles:
            for i, x in enumerate(cycle):
                if x in seen or not 0 <= x < degree:
                    raise PermutationError(f"bad cycle entry {x}")
                seen.add(x)
                images[x] = cycle[(i + 1) % len(cycle)]
        return cls(tuple(images))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: Permutation) -> Permutation:
        return compose(self, other)

    def inverse(self) -> Permutation:
        return Permutation._trusted(_inverse(self.images))

    def is_identity(self) -> bool:
        return all(i == x for i, x in enumerate(self.images))

    def cycles(self) -> List[Tuple[int, ...]]:
        """Non-trivial cycles, each starting at its smallest point"""
        seen = [False] * self.degree
        out = []
        for start in range(self.degree):
            if seen[start]:
                continue
            cycle = []
            x = start
            while not seen[x]:
                seen[x] = True
                cycle.append(x)
                x = self.images[x]
            if len(cycle) > 1:
                out.append(tuple(cycle))
        return out

    def parity(self) -> Parity:
        return parity(self)

    def order(self) -> int:
        return math.lcm(1, *(len(c) for c in self.cycles()))

    def power(self, k: int) -> Permutation:
        base = self if k >= 0 else self.inverse()
        result = _identity(self.degree)
        images = base.images
        k = abs(k)
        while k:
            if k & 1:
                result = _mult(images, result)
            images = _mult(images, images)
            k >>= 1
        return Permutation._trusted(result)

    def image_mask(self, mask: int) -> int:
        """Image of a point set given as a bit mask"""
        out = 0
        while mask:
            low = mask & -mask
            out |= 1 << self.images[low.bit_length() - 1]
            mask ^= low
        return out

    def __repr__(self) -> str:
        cycles = self.cycles()
        if not cycles:
            return f"Permutation(id, degree={self.degree})"
        return "Permutation(" + "".join(str(c).replace(",)", ")") for c in cycles) + ")"


def compose(p: Permutation, r: Permutation) -> Permutation:
    """(p o r)(i) = p(r(i))"""
    if p.degree != r.degree:
        raise PermutationError(f"degree mismatch {p.degree} != {r.degree}")
    return Permutation._trusted(_mult(p.images, r.images))


def parity(p: Permutation) -> Parity:
    transpositions = sum(len(c) - 1 for c in p.cycles())
    return Parity.EVEN if transpositions % 2 == 0 else Parity.ODD


# --- Stabilizer chain -------------------------------------------------------------

class StabilizerChain:
    """One level of a stabilizer chain; `stab` is the next level.

    Each level keeps its own strong generators (those fixing every earlier base
    point but moving this one) and an explicit transversal: for every point b
    of the basic orbit a pair (u_b, u_b^-1) with u_b(base_point) = b.
    """

    def __init__(self, degree: int, base: Sequence[int] = ()):
        self.degree = degree
        self.identity = _identity(degree)
        self.base_point: Optional[int] = None
        self.gens: List[Tuple[Images, Images]] = []
        self.transversal: Dict[int, Tuple[Images, Images]] = {}
        self.stab: Optional[StabilizerChain] = None
        if base:
            self._open(base[0])
            self.stab = StabilizerChain(degree, base[1:])

    def _open(self, point: int) -> None:
        self.base_point = point
        self.transversal = {point: (self.identity, self.identity)}

    def generators(self) -> List[Tuple[Images, Images]]:
        """All strong generators at this level and below"""
        out = []
        level = self
        while level is not None:
            out.extend(level.gens)
            level = level.stab
        return out

    def levels(self) -> Iterator[StabilizerChain]:
        level = self
        while level is not None and level.base_point is not None:
            yield level
            level = level.stab

    @property
    def base(self) -> List[int]:
        return [level.base_point for level in self.levels()]

    def order(self) -> int:
        return math.prod(len(level.transversal) for level in self.levels())

    def sift(self, h: Images) -> Images:
        level = self
        while level is not None and level.base_point is not None:
            entry = level.transversal.get(h[level.base_point])
            if entry is None:
                return h
            h = _mult(entry[1], h)
            level = level.stab
        return h

    def contains(self, g: Images) -> bool:
        return self.sift(g) == self.identity

    def add_gen(self, g: Images) -> bool:
        """Extend the group by g; False when g was already a member"""
        residue = self.sift(g)
        if residue == self.identity:
            return False
        self._add_nonmember(residue)
        return True

    def _add_nonmember(self, g: Images) -> None:
        if self.base_point is None:
            self._open(next(i for i, x in enumerate(g) if i != x))
            self.stab = StabilizerChain(self.degree)
        if g[self.base_point] == self.base_point:
            self.stab._add_nonmember(g)
        else:
            self.gens.append((g, _inverse(g)))
        self._rebuild_transversal()
        self._add_schreier_gens()

    def _rebuild_transversal(self) -> None:
        gens = self.generators()
        transversal = {self.base_point: (self.identity, self.identity)}
        queue = deque([self.base_point])
        while queue:
            a = queue.popleft()
            u_a = transversal[a][0]
            for g, _ in gens:
                b = g[a]
                if b not in transversal:
                    u_b = _mult(g, u_a)
                    transversal[b] = (u_b, _inverse(u_b))
                    queue.append(b)
        self.transversal = transversal

    def _add_schreier_gens(self) -> None:
        for s, _ in self.generators():
            for a, (u_a, _) in list(self.transversal.items()):
                su = _mult(s, u_a)
                schreier = _mult(self.transversal[su[self.base_point]][1], su)
                if schreier != self.identity:
                    self.stab.add_gen(schreier)

    def elements(self) -> Iterator[Images]:
        """Every group element, each exactly once"""
        levels = list(self.levels())

        def walk(depth: int, prefix: Images) -> Iterator[Images]:
            if depth == len(levels):
                yield prefix
                return
            for u_b, _ in levels[depth].transversal.values():
                yield from walk(depth + 1, _mult(prefix, u_b))

        return walk(0, self.identity)


def schreier_sims(degree: int, generators: Iterable[Images],
                  base: Sequence[int] = ()) -> StabilizerChain:
    """Deterministic Schreier-Sims; `base` is a prescribed base prefix"""
    start = time.perf_counter()
    chain = StabilizerChain(degree, base)
    for g in generators:
        chain.add_gen(tuple(g))
    logger.debug("Stabilizer chain on %d points: base %s, order %d (%.3fs)",
                 degree, chain.base, chain.order(), time.perf_counter() - start)
    return chain


# --- Groups ---------------------------------------------------------------------

class PermGroup:
    """A permutation group given by generators, with a lazily built chain"""

    def __init__(self, degree: int, generators: Iterable[Permutation] = (), name: str = ""):
        self.degree = degree
        self.name = name
        gens: List[Permutation] = []
        seen = set()
        for g in generators:
            if g.degree != degree:
                raise PermutationError(f"generator of degree {g.degree} in group of degree {degree}")
            if g.images not in seen and not g.is_identity():
                seen.add(g.images)
                gens.append(g)
        self.generators: List[Permutation] = gens
        self._chain: Optional[StabilizerChain] = None

    @classmethod
    def symmetric(cls, degree: int) -> PermGroup:
        gens = []
        if degree > 1:
            gens.append(Permutation.from_cycles(degree, [(0, 1)]))
            gens.append(Permutation.from_cycles(degree, [tuple(range(degree))]))
        return cls(degree, gens, name=f"Sym({degree})")

    @classmethod
    def alternating(cls, degree: int) -> PermGroup:
        gens = [Permutation.from_cycles(degree, [(0, 1, i)]) for i in range(2, degree)]
        return cls(degree, gens, name=f"Alt({degree})")

    @classmethod
    def from_chain(cls, chain: StabilizerChain, name: str = "") -> PermGroup:
        group = cls(chain.degree, [Permutation._trusted(g) for g, _ in chain.generators()], name)
        group._chain = chain
        return group

    @property
    def chain(self) -> StabilizerChain:
        if self._chain is None:
            self._chain = schreier_sims(self.degree, (g.images for g in self.generators))
        return self._chain

    def chain_with_base(self, base: Sequence[int]) -> StabilizerChain:
        return schreier_sims(self.degree, (g.images for g in self.generators), base)

    def order(self) -> int:
        if self._chain is None and len(self.generators) == 1:
            return self.generators[0].order()
        return self.chain.order()

    def contains(self, g: Permutation) -> bool:
        if g.degree != self.degree:
            return False
        return self.chain.contains(g.images)

    def __contains__(self, g: Permutation) -> bool:
        return self.contains(g)

    def is_trivial(self) -> bool:
        return not self.generators

    def subgroup_of(self, other: PermGroup) -> bool:
        return all(other.contains(g) for g in self.generators)

    def same_group(self, other: PermGroup) -> bool:
        return self.subgroup_of(other) and other.subgroup_of(self)

    def elements(self) -> Iterator[Permutation]:
        return (Permutation._trusted(g) for g in self.chain.elements())

    def orbit(self, point: int) -> List[int]:
        return orbit(self, point)

    def orbits(self) -> List[List[int]]:
        seen = set()
        out = []
        for i in range(self.degree):
            if i not in seen:
                orb = orbit(self, i)
                seen.update(orb)
                out.append(orb)
        return out

    def orbit_sizes(self) -> List[int]:
        return sorted(len(o) for o in self.orbits())

    def is_transitive(self) -> bool:
        return len(orbit(self, 0)) == self.degree if self.degree else True

    def all_even(self) -> bool:
        return all(parity(g) is Parity.EVEN for g in self.generators)

    def __repr__(self) -> str:
        label = self.name or "PermGroup"
        return f"<{label} degree={self.degree} gens={len(self.generators)}>"


def orbit(group: PermGroup, point: int) -> List[int]:
    """Orbit of a point, sorted"""
    seen = {point}
    queue = deque([point])
    images = [g.images for g in group.generators]
    while queue:
        a = queue.popleft()
        for g in images:
            b = g[a]
            if b not in seen:
                seen.add(b)
                queue.append(b)
    return sorted(seen)


def check_guard(degree: int, force: bool, max_degree: int, what: str) -> None:
    if degree > max_degree:
        if not force:
            raise GuardExceeded(f"{what} on degree {degree} exceeds guard {max_degree}; use force")
        logger.warning("Forcing %s on degree %d beyond guard %d", what, degree, max_degree)


def _reduced_generators(gens: Iterable[Images], degree: int) -> List[Permutation]:
    """Drop generators already generated by the earlier ones"""
    chain = StabilizerChain(degree)
    kept = []
    for g in gens:
        if chain.add_gen(g):
            kept.append(Permutation._trusted(g))
    return kept


def point_stabilizer(group: PermGroup, point: int) -> PermGroup:
    chain = group.chain_with_base([point])
    gens = _reduced_generators((g for g, _ in chain.stab.generators()), group.degree)
    return PermGroup(group.degree, gens, name=f"Stab({point})")


def setwise_stabilizer(group: PermGroup, points: Iterable[int]) -> PermGroup:
    """Backtrack through a chain whose base starts with the set"""
    target = frozenset(points)
    start = time.perf_counter()
    chain = group.chain_with_base(sorted(target))
    levels = list(chain.levels())
    found = StabilizerChain(group.degree)
    leaves = 0

    def walk(depth: int, prefix: Images) -> None:
        nonlocal leaves
        if depth == len(levels):
            leaves += 1
            if all(prefix[x] in target for x in target):
                found.add_gen(prefix)
            return
        level = levels[depth]
        inside = level.base_point in target
        for u_b, _ in level.transversal.values():
            p = _mult(prefix, u_b)
            if (p[level.base_point] in target) == inside:
                walk(depth + 1, p)

    walk(0, chain.identity)
    logger.debug("Setwise stabilizer of %d points: order %d after %d leaves (%.3fs)",
                 len(target), found.order(), leaves, time.perf_counter() - start)
    return PermGroup.from_chain(found, name="SetStab")


def intersection(g1: PermGroup, g2: PermGroup, *, force: bool = False,
                 max_degree: int = DEFAULT_GUARD_DEGREE) -> PermGroup:
    """G1 and G2 share a base; walk G1's chain while tracking the G2 coset"""
    if g1.degree != g2.degree:
        raise PermutationError("groups act on different degrees")
    check_guard(g1.degree, force, max_degree, "intersection")
    start = time.perf_counter()
    base1 = g1.chain.base
    c2 = g2.chain_with_base(base1)
    common = c2.base
    c1 = g1.chain_with_base(common)
    c2 = g2.chain_with_base(common)
    levels1 = list(c1.levels())
    levels2 = list(c2.levels())
    # one level per common base point in both chains
    assert [lv.base_point for lv in levels1] == [lv.base_point for lv in levels2] == common
    found = StabilizerChain(g1.degree)

    def walk(depth: int, p1: Images, r2: Images) -> None:
        if depth == len(common):
            if p1 == r2:
                found.add_gen(p1)
            return
        l1, l2 = levels1[depth], levels2[depth]
        beta = l1.base_point
        r2_inv = _inverse(r2)
        for u_b, _ in l1.transversal.values():
            p = _mult(p1, u_b)
            delta = r2_inv[p[beta]]
            entry = l2.transversal.get(delta)
            if entry is not None:
                walk(depth + 1, p, _mult(r2, entry[0]))

    walk(0, c1.identity, c2.identity)
    logger.info("Intersection on %d points: order %d (%.3fs)",
                g1.degree, found.order(), time.perf_counter() - start)
    return PermGroup.from_chain(found, name="Intersection")


def induced_action(group: PermGroup, sets: Sequence[int]) -> PermGroup:
    """Action on a family of point sets given as bit masks"""
    index = {mask: i for i, mask in enumerate(sets)}
    if len(index) != len(sets):
        raise PermutationError("repeated set in induced action")
    gens = []
    for g in group.generators:
        try:
            gens.append(Permutation(tuple(index[g.image_mask(m)] for m in sets)))
        except KeyError:
            raise PermutationError("family of sets is not invariant under the group") from None
    return PermGroup(len(sets), gens, name="induced")


# --- Conjugacy ------------------------------------------------------------------

@dataclass
class Witness:
    permutation: Permutation
    parity: Parity

    def to_dict(self) -> dict:
        return {"images": list(self.permutation.images), "parity": self.parity.value}


@dataclass
class ConjugacyReport:
    """Outcome of a conjugacy search; never more than evidence unless a certificate"""
    ambient: str
    verdict: Verdict
    witnesses: List[Witness] = field(default_factory=list)
    certificate: Optional[str] = None
    exhaustive: bool = False
    nodes: int = 0

    @property
    def parity_counts(self) -> Dict[str, int]:
        counts = Counter(w.parity.value for w in self.witnesses)
        return {p.value: counts.get(p.value, 0) for p in Parity}

    def restricted_to_alt(self) -> ConjugacyReport:
        """Reread a Sym search as evidence about conjugacy inside Alt"""
        if self.ambient == Ambient.ALT.value:
            return self
        even = [w for w in self.witnesses if w.parity is Parity.EVEN]
        if even:
            verdict, cert = Verdict.WITNESS, None
        elif self.verdict is Verdict.CERTIFICATE:
            verdict, cert = Verdict.CERTIFICATE, self.certificate
        elif self.exhaustive:
            verdict, cert = Verdict.CERTIFICATE, "every conjugating permutation is odd"
        else:
            verdict, cert = Verdict.INCONCLUSIVE, None
        return ConjugacyReport(Ambient.ALT.value, verdict, even, cert, self.exhaustive, self.nodes)

    def to_dict(self, max_witnesses: int = 5) -> dict:
        return {
            "ambient": self.ambient,
            "verdict": self.verdict.value,
            "certificate": self.certificate,
            "exhaustive": self.exhaustive,
            "nodes": self.nodes,
            "witness_count": len(self.witnesses),
            "parity_counts": self.parity_counts,
            "witnesses": [w.to_dict() for w in self.witnesses[:max_witnesses]],
        }


def _conjugates_into(tau: Images, tau_inv: Images, gens: Sequence[Images],
                     target: StabilizerChain) -> bool:
    return all(target.contains(_mult(_mult(tau, g), tau_inv)) for g in gens)


def conjugacy_witnesses(g1: PermGroup, g2: PermGroup, *,
                        ambient: Ambient = Ambient.SYM,
                        budget: int = DEFAULT_CONJUGACY_BUDGET,
                        seeds: Iterable[Permutation] = (),
                        within: Optional[PermGroup] = None,
                        exhaustive_max_degree: int = EXHAUSTIVE_CONJUGACY_DEGREE) -> ConjugacyReport:
    """Search for tau with tau G1 tau^-1 = G2.

    With `within` the search runs over that group's elements; otherwise over
    Sym or Alt of the common degree. Small degrees are searched exhaustively,
    larger ones get the seeds plus a budgeted backtrack.
    """
    if g1.degree != g2.degree:
        raise PermutationError("groups act on different degrees")
    degree = g1.degree
    label = "within" if within is not None else ambient.value
    start = time.perf_counter()

    if g1.order() != g2.order():
        return ConjugacyReport(label, Verdict.CERTIFICATE,
                               certificate=f"orders differ: {g1.order()} != {g2.order()}",
                               exhaustive=True)
    if g1.orbit_sizes() != g2.orbit_sizes():
        return ConjugacyReport(label, Verdict.CERTIFICATE,
                               certificate=f"orbit sizes differ: {g1.orbit_sizes()} != {g2.orbit_sizes()}",
                               exhaustive=True)

    gens1 = [g.images for g in g1.generators]
    target = g2.chain
    witnesses: List[Witness] = []
    seen = set()
    nodes = 0

    def admissible(tau: Images) -> bool:
        if within is not None:
            return within.contains(Permutation._trusted(tau))
        return ambient is Ambient.SYM or parity(Permutation._trusted(tau)) is Parity.EVEN

    def test(tau: Images) -> None:
        if tau in seen:
            return
        seen.add(tau)
        if _conjugates_into(tau, _inverse(tau), gens1, target):
            perm = Permutation._trusted(tau)
            witnesses.append(Witness(perm, parity(perm)))

    for seed in itertools.chain([Permutation.identity(degree)], seeds):
        if seed.degree == degree and admissible(seed.images):
            test(seed.images)

    exhaustive = False
    if within is not None:
        if within.order() <= budget:
            for tau in within.chain.elements():
                nodes += 1
                test(tau)
            exhaustive = True
        else:
            for tau in itertools.islice(within.chain.elements(), budget):
                nodes += 1
                test(tau)
    elif degree <= exhaustive_max_degree:
        for tau in itertools.permutations(range(degree)):
            if admissible(tau):
                nodes += 1
                test(tau)
        exhaustive = True
    elif not witnesses:
        nodes, exhaustive = _budgeted_search(g1, g2, budget, admissible, test, witnesses)

    if witnesses:
        verdict, cert = Verdict.WITNESS, None
    elif exhaustive:
        verdict, cert = Verdict.CERTIFICATE, f"no conjugator in {label} (exhaustive)"
    else:
        verdict, cert = Verdict.INCONCLUSIVE, None
    logger.info("Conjugacy search in %s on %d points: %s, %d witnesses, %d nodes (%.3fs)",
                label, degree, verdict.value, len(witnesses), nodes, time.perf_counter() - start)
    return ConjugacyReport(label, verdict, witnesses, cert, exhaustive, nodes)


def _budgeted_search(g1: PermGroup, g2: PermGroup, budget: int, admissible, test,
                     witnesses: List[Witness]) -> Tuple[int, bool]:
    """Backtrack over tau point by point; tau must respect orbit sizes"""
    degree = g1.degree
    size1 = {}
    for orb in g1.orbits():
        for x in orb:
            size1[x] = len(orb)
    size2 = {}
    for orb in g2.orbits():
        for x in orb:
            size2[x] = len(orb)
    candidates = [[c for c in range(degree) if size2[c] == size1[i]] for i in range(degree)]
    tau = [-1] * degree
    used = [False] * degree
    nodes = 0

    def walk(i: int) -> bool:
        nonlocal nodes
        if nodes >= budget:
            return False
        if i == degree:
            images = tuple(tau)
            if admissible(images):
                test(images)
            return not witnesses
        for c in candidates[i]:
            if used[c]:
                continue
            nodes += 1
            tau[i], used[c] = c, True
            keep_going = walk(i + 1)
            tau[i], used[c] = -1, False
            if not keep_going:
                return False
        return True

    completed = walk(0) and nodes < budget
    return nodes, completed and not witnesses


# --- File formats -------------------------------------------------------------------

def format_permutation(p: Permutation) -> str:
    return " ".join(str(x) for x in p.images)


def parse_permutation(line: str) -> Permutation:
    try:
        return Permutation(tuple(int(tok) for tok in line.split()))
    except ValueError as exc:
        raise PermutationError(f"bad permutation line {line!r}: {exc}") from None


def format_group(group: PermGroup) -> str:
    lines = [str(group.degree)] + [format_permutation(g) for g in group.generators]
    return "\n".join(lines) + "\n"


def parse_group(text: str) -> PermGroup:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise PermutationError("empty group file")
    try:
        degree = int(lines[0])
    except ValueError:
        raise PermutationError(f"bad degree line {lines[0]!r}") from None
    return PermGroup(degree, [parse_permutation(ln) for ln in lines[1:]])
