"""
CURVE-DESIGNS Incidence Structures
Hyperbola and parabola block designs over F_{2^n}, their complements and duals,
t-design verification and design isomorphism search
"""

from __future__ import annotations

import logging
import math
import time
from collections import Counter
from dataclasses import asdict, dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .gf2n import FieldCtx, FieldElement, FieldError, gf2_rank, new_field_ctx, trace_array
from .permgrp import Permutation

logger = logging.getLogger(__name__)

# Upper bound on cells per numpy temporary
CHUNK_CELLS = 1 << 22
EXHAUSTIVE_MAX_V = (1 << 11) - 1
DEFAULT_SAMPLE_PAIRS = 100_000
LARGE_INCIDENCE_BYTES = 1 << 28

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)

# Difference set {0, 1, 3} modulo 7
FANO_BLOCKS: Tuple[Tuple[int, ...], ...] = tuple(
    tuple(sorted((i + d) % 7 for d in (0, 1, 3))) for i in range(7)
)


class DesignError(ValueError):
    """Malformed incidence structure or an operation undefined on it"""


class DuplicateBlockError(DesignError):
    """Two generator labels produced the same block"""


class BlockKind(Enum):
    HYPERBOLA = "hyperbola"
    PARABOLA = "parabola"
    COMPLEMENT_HYPERBOLA = "complement-hyperbola"
    COMPLEMENT_PARABOLA = "complement-parabola"
    DUAL = "dual"
    CUSTOM = "custom"

    @property
    def is_curve(self) -> bool:
        return self in (BlockKind.HYPERBOLA, BlockKind.PARABOLA)


_COMPLEMENT_KIND = {
    BlockKind.HYPERBOLA: BlockKind.COMPLEMENT_HYPERBOLA,
    BlockKind.PARABOLA: BlockKind.COMPLEMENT_PARABOLA,
    BlockKind.COMPLEMENT_HYPERBOLA: BlockKind.HYPERBOLA,
    BlockKind.COMPLEMENT_PARABOLA: BlockKind.PARABOLA,
}


# --- bit helpers ----------------------------------------------------------------

def _bits_to_mask(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def _mask_to_row(mask: int, nbytes: int) -> np.ndarray:
    return np.frombuffer(mask.to_bytes(nbytes, "little"), dtype=np.uint8)


def _row_to_mask(row: np.ndarray) -> int:
    return int.from_bytes(row.tobytes(), "little")


def mask_points(mask: int) -> List[int]:
    """Indices of the set bits, ascending"""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def points_mask(points: Iterable[int]) -> int:
    mask = 0
    for i in points:
        mask |= 1 << i
    return mask


def _values_to_mask(ctx: FieldCtx, values: np.ndarray) -> int:
    """Bit mask over F_q^x indices (value - 1) of the nonzero entries"""
    bits = np.zeros(ctx.order, dtype=bool)
    values = np.asarray(values, dtype=np.int64)
    bits[values[values > 0] - 1] = True
    return _bits_to_mask(bits)


def _chunks(total: int, step: int) -> Iterator[slice]:
    step = max(1, step)
    for start in range(0, total, step):
        yield slice(start, min(total, start + step))


# --- types ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Block:
    members: int
    label: Optional[FieldElement] = None

    @property
    def size(self) -> int:
        return self.members.bit_count()

    def points(self) -> List[int]:
        return mask_points(self.members)

    def __contains__(self, i: int) -> bool:
        return bool(self.members >> i & 1)


@dataclass(frozen=True)
class DesignParams:
    t: int
    v: int
    k: int
    lam: int
    b: int
    r: int

    def counting_identities_hold(self) -> bool:
        if self.b * self.k != self.v * self.r:
            return False
        if self.t >= 2 and self.lam * (self.v - 1) != self.r * (self.k - 1):
            return False
        return True

    def to_dict(self) -> dict:
        return asdict(self)

    def __str__(self) -> str:
        return f"{self.t}-({self.v},{self.k},{self.lam})"


@dataclass(frozen=True, eq=False)
class IncidenceStructure:
    """Points 0..v-1 and an ordered list of blocks.

    `incidence` is a packed bit matrix: one uint8 row per block, bit i of the
    little-endian row is point i.
    """
    v: int
    incidence: np.ndarray
    kind: BlockKind
    labels: Tuple[Optional[FieldElement], ...]
    point_labels: Tuple[object, ...]
    ctx: Optional[FieldCtx] = None

    def __post_init__(self):
        nbytes = (self.v + 7) // 8
        if self.incidence.ndim != 2 or self.incidence.shape[1] != nbytes:
            raise DesignError(f"incidence shape {self.incidence.shape} does not fit {self.v} points")
        if len(self.labels) != self.incidence.shape[0]:
            raise DesignError("one label per block required")
        if len(self.point_labels) != self.v:
            raise DesignError("one label per point required")
        spare = nbytes * 8 - self.v
        if spare and np.any(self.incidence[:, -1] >> (8 - spare)):
            raise DesignError("block member outside the point set")
        self.incidence.flags.writeable = False

    @classmethod
    def from_masks(cls, v: int, masks: Sequence[int], kind: BlockKind = BlockKind.CUSTOM,
                   labels: Optional[Sequence[Optional[FieldElement]]] = None,
                   point_labels: Optional[Sequence[object]] = None,
                   ctx: Optional[FieldCtx] = None) -> IncidenceStructure:
        nbytes = (v + 7) // 8
        for m in masks:
            if m < 0 or m >> v:
                raise DesignError(f"block {m:#x} not inside {v} points")
        incidence = np.zeros((len(masks), nbytes), dtype=np.uint8)
        for k, m in enumerate(masks):
            incidence[k] = _mask_to_row(m, nbytes)
        return cls(
            v=v,
            incidence=incidence,
            kind=kind,
            labels=tuple(labels) if labels is not None else (None,) * len(masks),
            point_labels=tuple(point_labels) if point_labels is not None else tuple(range(v)),
            ctx=ctx,
        )

    @property
    def b(self) -> int:
        return self.incidence.shape[0]

    @cached_property
    def block_masks(self) -> Tuple[int, ...]:
        return tuple(_row_to_mask(row) for row in self.incidence)

    @property
    def blocks(self) -> List[Block]:
        return [Block(m, lbl) for m, lbl in zip(self.block_masks, self.labels)]

    def block(self, k: int) -> Block:
        return Block(self.block_masks[k], self.labels[k])

    def incidence_matrix(self, dtype=np.uint8) -> np.ndarray:
        """Unpacked b x v 0/1 matrix"""
        bits = np.unpackbits(self.incidence, axis=1, count=self.v, bitorder="little")
        return bits.astype(dtype, copy=False)

    def columns(self, points: np.ndarray, dtype=np.float32) -> np.ndarray:
        """b x len(points) 0/1 matrix of the selected point columns"""
        points = np.asarray(points, dtype=np.int64)
        packed = self.incidence[:, points >> 3]
        return ((packed >> (points & 7).astype(np.uint8)) & 1).astype(dtype)

    def block_sizes(self) -> np.ndarray:
        sizes = np.empty(self.b, dtype=np.int64)
        for s in _chunks(self.b, CHUNK_CELLS // max(1, self.incidence.shape[1])):
            sizes[s] = _POPCOUNT[self.incidence[s]].sum(axis=1)
        return sizes

    def replication(self) -> np.ndarray:
        """Number of blocks through each point"""
        counts = np.zeros(self.v, dtype=np.int64)
        for s in _chunks(self.b, CHUNK_CELLS // max(1, self.v)):
            counts += np.unpackbits(self.incidence[s], axis=1, count=self.v,
                                    bitorder="little").sum(axis=0)
        return counts

    def same_blocks(self, other: IncidenceStructure) -> bool:
        """Same point count and same block multiset"""
        return self.v == other.v and sorted(self.block_masks) == sorted(other.block_masks)

    def all_points(self) -> int:
        return (1 << self.v) - 1

    def __repr__(self) -> str:
        field_part = f", {self.ctx!r}" if self.ctx is not None else ""
        return f"IncidenceStructure({self.kind.value}, v={self.v}, b={self.b}{field_part})"


@dataclass
class DesignCheck:
    """Outcome of verify_design; a failed check carries a witness"""
    ok: bool
    t: int
    params: Optional[DesignParams]
    exhaustive: bool
    pairs_checked: int = 0
    violation: Optional[str] = None
    witness: Tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "t": self.t,
            "params": self.params.to_dict() if self.params else None,
            "exhaustive": self.exhaustive,
            "pairs_checked": self.pairs_checked,
            "violation": self.violation,
            "witness": list(self.witness),
        }


# --- construction -----------------------------------------------------------------

def _curve_rows(ctx: FieldCtx, kind: BlockKind, labels: np.ndarray) -> np.ndarray:
    """Boolean (len(labels), q) matrix: row j marks the values of the curve map for labels[j]"""
    t = ctx.tables
    m = ctx.order
    q = ctx.q
    labels = np.asarray(labels, dtype=np.int64)
    la = t.log[labels][:, None]
    if kind is BlockKind.HYPERBOLA:
        xs = np.arange(1, q, dtype=np.int64)
        values = xs[None, :] ^ t.exp[(la - t.log[xs][None, :]) % m]
    elif kind is BlockKind.PARABOLA:
        xs = np.arange(q, dtype=np.int64)
        ax = np.where(xs[None, :] == 0, 0, t.exp[(la + t.log[xs][None, :]) % m])
        values = ctx.square_array(xs)[None, :] ^ ax
    else:
        raise DesignError(f"no curve family for kind {kind.value}")
    rows = np.zeros((len(labels), q), dtype=bool)
    rows[np.arange(len(labels))[:, None], values] = True
    return rows


def _curve_block(ctx: FieldCtx, kind: BlockKind, a: FieldElement) -> Block:
    if a.ctx != ctx:
        raise FieldError("label from a different field")
    if not a:
        raise DesignError(f"{kind.value} block needs a nonzero label")
    row = _curve_rows(ctx, kind, np.array([a.value]))[0]
    return Block(_bits_to_mask(row[1:]), a)


def hyperbola_block(ctx: FieldCtx, a: FieldElement) -> Block:
    """{x + a/x : x != 0} with 0 removed"""
    return _curve_block(ctx, BlockKind.HYPERBOLA, a)


def parabola_block(ctx: FieldCtx, a: FieldElement) -> Block:
    """Image of x -> x^2 + ax with 0 removed"""
    return _curve_block(ctx, BlockKind.PARABOLA, a)


def splits(ctx: FieldCtx, b: FieldElement, a: FieldElement) -> bool:
    """Whether x^2 + bx + a has a root in F_q, by exhaustive root search"""
    xs = np.arange(ctx.q, dtype=np.int64)
    values = ctx.square_array(xs) ^ ctx.mul_array(b.value, xs) ^ a.value
    return bool(np.any(values == 0))


def _check_distinct(incidence: np.ndarray) -> None:
    seen: Dict[int, int] = {}
    for k, row in enumerate(incidence):
        h = hash(row.tobytes())
        j = seen.get(h)
        if j is not None and np.array_equal(incidence[j], row):
            raise DuplicateBlockError(f"blocks {j} and {k} coincide")
        seen[h] = k


def incidence_bytes(ctx: FieldCtx) -> int:
    """Size of one packed (q-1) x (q-1) incidence matrix"""
    return ctx.order * ((ctx.order + 7) // 8)


def build_design(ctx: FieldCtx, kind: BlockKind | str = BlockKind.PARABOLA) -> IncidenceStructure:
    """Blocks labelled by a in F_q^x, ascending; points are F_q^x ascending"""
    kind = BlockKind(kind)
    if kind in (BlockKind.COMPLEMENT_HYPERBOLA, BlockKind.COMPLEMENT_PARABOLA):
        return complement(build_design(ctx, _COMPLEMENT_KIND[kind]))
    if not kind.is_curve:
        raise DesignError(f"cannot build a design of kind {kind.value}")

    size = incidence_bytes(ctx)
    if size > LARGE_INCIDENCE_BYTES:
        # complements and duals each hold a second matrix of the same size
        logger.warning("%s design over F_%d needs %.0f MiB of packed incidence",
                       kind.value, ctx.q, size / 2**20)
    start = time.perf_counter()
    v = ctx.order
    incidence = np.empty((v, (v + 7) // 8), dtype=np.uint8)
    labels = np.arange(1, ctx.q, dtype=np.int64)
    for s in _chunks(v, CHUNK_CELLS // ctx.q):
        rows = _curve_rows(ctx, kind, labels[s])
        incidence[s] = np.packbits(rows[:, 1:], axis=1, bitorder="little")
    _check_distinct(incidence)

    nonzero = tuple(ctx.nonzero())
    design = IncidenceStructure(v=v, incidence=incidence, kind=kind, labels=nonzero,
                                point_labels=nonzero, ctx=ctx)
    logger.info("Built %s design over F_%d: %d blocks (%.3fs)",
                kind.value, ctx.q, v, time.perf_counter() - start)
    return design


def complement(design: IncidenceStructure) -> IncidenceStructure:
    """Replace every block by its complement.

    Curve blocks always contain 0, so complementing the full curve against
    F_q never yields 0 and equals complementing the punctured block within the
    point set.
    """
    incidence = np.bitwise_not(design.incidence)
    spare = incidence.shape[1] * 8 - design.v
    if spare:
        incidence[:, -1] &= np.uint8(0xFF >> spare)
    if design.b and not np.any(incidence, axis=1).all():
        raise DesignError("complement contains an empty block")
    kind = _COMPLEMENT_KIND.get(design.kind, BlockKind.CUSTOM)
    return IncidenceStructure(v=design.v, incidence=incidence, kind=kind,
                              labels=design.labels, point_labels=design.point_labels,
                              ctx=design.ctx)


def dual(design: IncidenceStructure) -> IncidenceStructure:
    """Transpose: new point i is old block i, new block j collects the old blocks through point j"""
    if design.b != design.v:
        raise DesignError(f"dual needs a square incidence matrix, got {design.b} x {design.v}")
    v = design.v
    nbytes = (v + 7) // 8
    transposed = np.zeros((v, nbytes), dtype=np.uint8)
    rows_per_step = 8 * max(1, CHUNK_CELLS // (8 * v))
    for s in _chunks(design.b, rows_per_step):
        bits = np.unpackbits(design.incidence[s], axis=1, count=v, bitorder="little")
        packed = np.packbits(bits.T, axis=1, bitorder="little")
        transposed[:, s.start // 8: s.start // 8 + packed.shape[1]] = packed
    labels = tuple(p if isinstance(p, FieldElement) else None for p in design.point_labels)
    point_labels = tuple(lbl if lbl is not None else k for k, lbl in enumerate(design.labels))
    return IncidenceStructure(v=v, incidence=transposed, kind=BlockKind.DUAL,
                              labels=labels, point_labels=point_labels, ctx=design.ctx)


# --- verification ---------------------------------------------------------------------

def _sample_size(pairs: int, v: int) -> int:
    m = math.ceil((1 + math.sqrt(1 + 8 * pairs)) / 2)
    return min(max(m, 2), v)


def _first_bad_pair(design: IncidenceStructure, points: np.ndarray,
                    lam: Optional[int]) -> Tuple[int, Optional[Tuple[int, int, int]]]:
    """Scan pair counts tile by tile; returns (lambda, first violating (i, j, count))"""
    tile = max(1, min(len(points), CHUNK_CELLS // max(1, design.b)))
    for ps in _chunks(len(points), tile):
        left = design.columns(points[ps])
        for qs in _chunks(len(points), tile):
            if qs.stop <= ps.start:
                continue
            gram = left.T @ design.columns(points[qs])
            rows, cols = np.meshgrid(np.arange(ps.start, ps.stop),
                                     np.arange(qs.start, qs.stop), indexing="ij")
            upper = rows < cols
            counts = gram[upper].astype(np.int64)
            if lam is None and counts.size:
                lam = int(counts[0])
            bad = np.flatnonzero(counts != lam)
            if bad.size:
                i, j = rows[upper][bad[0]], cols[upper][bad[0]]
                return lam, (int(points[i]), int(points[j]), int(counts[bad[0]]))
    return lam, None


def verify_design(design: IncidenceStructure, t: int = 2, *, exhaustive: Optional[bool] = None,
                  sample_pairs: int = DEFAULT_SAMPLE_PAIRS, seed: int = 0) -> DesignCheck:
    """Check block-size uniformity, replication and (for t = 2) pair coverage.

    Pair coverage is counted exactly through Gram products of incidence
    columns: over every pair up to EXHAUSTIVE_MAX_V points, otherwise over all
    pairs of a seeded random point sample unless exhaustive is requested.
    """
    if t not in (1, 2):
        raise DesignError(f"only t = 1 and t = 2 are supported, got {t}")
    if design.b == 0 or design.v < t:
        raise DesignError("design has no blocks or too few points")

    sizes = design.block_sizes()
    k = int(sizes[0])
    bad = np.flatnonzero(sizes != k)
    if bad.size:
        j = int(bad[0])
        return DesignCheck(False, t, None, True, violation=f"block {j} has size {sizes[j]}, block 0 has {k}",
                           witness=(j,))

    replication = design.replication()
    r = int(replication[0])
    bad = np.flatnonzero(replication != r)
    if bad.size:
        i = int(bad[0])
        return DesignCheck(False, t, None, True,
                           violation=f"point {i} lies on {replication[i]} blocks, point 0 on {r}",
                           witness=(i,))
    if t == 1:
        return DesignCheck(True, 1, DesignParams(1, design.v, k, r, design.b, r), True)

    if exhaustive is None:
        exhaustive = design.v <= EXHAUSTIVE_MAX_V
    if exhaustive:
        points = np.arange(design.v, dtype=np.int64)
    else:
        rng = np.random.default_rng(seed)
        points = np.sort(rng.choice(design.v, size=_sample_size(sample_pairs, design.v), replace=False))
    pairs = len(points) * (len(points) - 1) // 2

    start = time.perf_counter()
    lam, violation = _first_bad_pair(design, points, None)
    logger.info("Pair coverage over %d pairs (%s) in %.3fs",
                pairs, "exhaustive" if exhaustive else f"sampled, seed {seed}",
                time.perf_counter() - start)
    if violation is not None:
        i, j, count = violation
        return DesignCheck(False, 2, None, exhaustive, pairs,
                           violation=f"pair ({i}, {j}) lies on {count} blocks, expected {lam}",
                           witness=(i, j))

    params = DesignParams(2, design.v, k, lam, design.b, r)
    if not params.counting_identities_hold():
        return DesignCheck(False, 2, None, exhaustive, pairs,
                           violation=f"counting identities fail for {params}")
    return DesignCheck(True, 2, params, exhaustive, pairs)


def expected_params(ctx: FieldCtx, kind: BlockKind | str) -> DesignParams:
    """2-(q-1, q/2-1, q/4-1) for curve designs, 2-(q-1, q/2, q/4) for complements"""
    kind = BlockKind(kind)
    q = ctx.q
    if kind.is_curve:
        return DesignParams(2, q - 1, q // 2 - 1, q // 4 - 1, q - 1, q // 2 - 1)
    if kind in (BlockKind.COMPLEMENT_HYPERBOLA, BlockKind.COMPLEMENT_PARABOLA):
        return DesignParams(2, q - 1, q // 2, q // 4, q - 1, q // 2)
    raise DesignError(f"no closed-form parameters for kind {kind.value}")


# --- isomorphism ------------------------------------------------------------------------

def point_signatures(design: IncidenceStructure) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Per point: sorted sizes of the blocks through it and its sorted pair-degree vector"""
    matrix = design.incidence_matrix(np.int64)
    sizes = matrix.sum(axis=1)
    gram = matrix.T @ matrix
    out = []
    for i in range(design.v):
        through = tuple(np.sort(sizes[matrix[:, i] == 1]).tolist())
        pair_degrees = tuple(np.sort(np.delete(gram[i], i)).tolist())
        out.append((through, pair_degrees))
    return out


class IsomorphismSearch:
    """Backtracking over point images with signature pruning.

    A partial map survives while the multiset of images of source blocks
    restricted to the mapped points equals the multiset of target blocks
    restricted to the image points. A full map surviving this test carries the
    source block multiset onto the target's.
    """

    def __init__(self, source: IncidenceStructure, target: IncidenceStructure):
        self.v = source.v
        self.nodes = 0
        self.source_masks = source.block_masks
        self.target_masks = target.block_masks
        self.viable = (
            source.v == target.v
            and source.b == target.b
            and sorted(source.block_sizes().tolist()) == sorted(target.block_sizes().tolist())
        )
        if not self.viable:
            return
        sig1 = point_signatures(source)
        sig2 = point_signatures(target)
        self.viable = Counter(sig1) == Counter(sig2)
        self.candidates = [[c for c in range(self.v) if sig2[c] == sig1[i]] for i in range(self.v)]
        self.through_source = [[k for k, m in enumerate(self.source_masks) if m >> i & 1]
                               for i in range(self.v)]
        self.through_target = [[k for k, m in enumerate(self.target_masks) if m >> i & 1]
                               for i in range(self.v)]

    def search(self, fixed: Optional[Mapping[int, int]] = None) -> Iterator[Tuple[int, ...]]:
        if not self.viable:
            return
        fixed = dict(fixed or {})
        b = len(self.source_masks)
        sigma = [-1] * self.v
        used = [False] * self.v
        traces1 = [0] * b
        traces2 = [0] * b
        for i, c in fixed.items():
            if used[c] or c not in self.candidates[i]:
                return
            sigma[i], used[c] = c, True
            for k in self.through_source[i]:
                traces1[k] |= 1 << c
            for k in self.through_target[c]:
                traces2[k] |= 1 << c
        if Counter(traces1) != Counter(traces2):
            return
        order = list(fixed) + [i for i in range(self.v) if i not in fixed]
        yield from self._extend(order, len(fixed), sigma, used, traces1, traces2)

    def _extend(self, order, depth, sigma, used, traces1, traces2) -> Iterator[Tuple[int, ...]]:
        if depth == self.v:
            yield tuple(sigma)
            return
        i = order[depth]
        for c in self.candidates[i]:
            if used[c]:
                continue
            self.nodes += 1
            t1 = traces1.copy()
            for k in self.through_source[i]:
                t1[k] |= 1 << c
            t2 = traces2.copy()
            for k in self.through_target[c]:
                t2[k] |= 1 << c
            if Counter(t1) != Counter(t2):
                continue
            sigma[i], used[c] = c, True
            yield from self._extend(order, depth + 1, sigma, used, t1, t2)
            sigma[i], used[c] = -1, False


def isomorphisms(d1: IncidenceStructure, d2: IncidenceStructure,
                 fixed: Optional[Mapping[int, int]] = None) -> Iterator[Permutation]:
    """Every point bijection carrying the blocks of d1 onto those of d2"""
    for images in IsomorphismSearch(d1, d2).search(fixed):
        yield Permutation(images)


def find_isomorphism(d1: IncidenceStructure, d2: IncidenceStructure) -> Optional[Permutation]:
    start = time.perf_counter()
    found = next(isomorphisms(d1, d2), None)
    logger.info("Isomorphism search %s -> %s: %s (%.3fs)", d1.kind.value, d2.kind.value,
                "found" if found is not None else "none", time.perf_counter() - start)
    return found


def is_isomorphism(d1: IncidenceStructure, d2: IncidenceStructure, sigma: Permutation) -> bool:
    if sigma.degree != d1.v or d1.v != d2.v:
        return False
    return sorted(sigma.image_mask(m) for m in d1.block_masks) == sorted(d2.block_masks)


# --- duality checks ---------------------------------------------------------------------

def gamma_dual_holds(hyperbola: IncidenceStructure, parabola: IncidenceStructure) -> bool:
    """gamma sends the dual point labelled a to the point a and must carry
    every dual block (labelled by an old point v) onto the parabola block labelled v"""
    d = dual(hyperbola)
    try:
        point_index = {lbl.value: i for i, lbl in enumerate(parabola.point_labels)}
        block_index = {lbl.value: k for k, lbl in enumerate(parabola.labels)}
        gamma = np.array([point_index[lbl.value] for lbl in d.point_labels])
        order = np.array([block_index[lbl.value] for lbl in d.labels])
    except (AttributeError, KeyError):
        return False
    if d.v != parabola.v or d.b != parabola.b:
        return False
    target = parabola.incidence_matrix()[order][:, gamma]
    return bool(np.array_equal(target, d.incidence_matrix()))


def gamma_dual_check(ctx: FieldCtx) -> bool:
    """The dual of the hyperbola design is the parabola design under gamma"""
    return gamma_dual_holds(build_design(ctx, BlockKind.HYPERBOLA),
                            build_design(ctx, BlockKind.PARABOLA))


def reciprocity_holds(ctx: FieldCtx) -> bool:
    """v in O_a  iff  a in U_v, for all nonzero a and v"""
    hyp = build_design(ctx, BlockKind.HYPERBOLA).incidence_matrix()
    par = build_design(ctx, BlockKind.PARABOLA).incidence_matrix()
    return bool(np.array_equal(hyp, par.T))


def complement_dual_holds(ctx: FieldCtx) -> bool:
    """Dual of the complemented hyperbola design = complemented parabola design"""
    left = dual(build_design(ctx, BlockKind.COMPLEMENT_HYPERBOLA))
    right = build_design(ctx, BlockKind.COMPLEMENT_PARABOLA)
    return bool(np.array_equal(left.incidence, right.incidence))


# --- structure of the parabola blocks ------------------------------------------------

def block_intersection_sizes(design: IncidenceStructure) -> Dict[int, int]:
    """Multiset of |B_i & B_j| over unordered block pairs, as {size: count}"""
    matrix = design.incidence_matrix(np.float32)
    gram = matrix @ matrix.T
    sizes, counts = np.unique(gram[np.triu_indices(design.b, 1)].astype(np.int64),
                              return_counts=True)
    return dict(zip(sizes.tolist(), counts.tolist()))


def pair_closure(design: IncidenceStructure, i: int, j: int) -> int:
    """Intersection of every block through points i and j"""
    closure = design.all_points()
    pair = (1 << i) | (1 << j)
    for m in design.block_masks:
        if m & pair == pair:
            closure &= m
    return closure


def triple_intersection_holds(ctx: FieldCtx) -> bool:
    """Blocks of the parabola design through a and b meet in {a, b, a+b}"""
    par = build_design(ctx, BlockKind.PARABOLA)
    for i in range(par.v):
        for j in range(i + 1, par.v):
            a, b = i + 1, j + 1
            expected = (1 << i) | (1 << j) | (1 << ((a ^ b) - 1))
            if pair_closure(par, i, j) != expected:
                logger.warning("Triple intersection fails for %#x, %#x", a, b)
                return False
    return True


def is_subspace_block(ctx: FieldCtx, mask: int) -> bool:
    """Whether the block with 0 re-inserted is closed under addition"""
    values = [0] + [i + 1 for i in mask_points(mask)]
    return len(values) == 1 << gf2_rank(values)


def hyperplane_masks(ctx: FieldCtx) -> List[int]:
    """The punctured trace hyperplanes {x : Tr(cx) = 0}, one per c in F_q^x"""
    xs = np.arange(1, ctx.q, dtype=np.int64)
    out = []
    for c in range(1, ctx.q):
        traces = trace_array(ctx, ctx.mul_array(c, xs))
        out.append(_bits_to_mask(traces == 0))
    return out


def enumerates_hyperplanes(ctx: FieldCtx) -> bool:
    """The parabola blocks are exactly the q - 1 hyperplanes, each once"""
    par = build_design(ctx, BlockKind.PARABOLA)
    masks = par.block_masks
    if len(set(masks)) != ctx.order:
        return False
    if not all(is_subspace_block(ctx, m) for m in masks):
        return False
    return set(masks) == set(hyperplane_masks(ctx))


def kernel_in_image(ctx: FieldCtx, a: FieldElement) -> bool:
    """ker(x -> x^2 + ax) = {0, a} lies in the image iff a is on the parabola block of a"""
    return parabola_block(ctx, a).members >> (a.value - 1) & 1 == 1


def scale_block(ctx: FieldCtx, mask: int, t: FieldElement) -> int:
    """Image of a block under x -> t x"""
    values = np.array([i + 1 for i in mask_points(mask)], dtype=np.int64)
    return _values_to_mask(ctx, ctx.mul_array(t.value, values))


def action_identities_hold(ctx: FieldCtx) -> bool:
    """t O_a = O_{t^2 a} and t^2 U_a = U_{ta} for all nonzero t and a"""
    hyp = build_design(ctx, BlockKind.HYPERBOLA).block_masks
    par = build_design(ctx, BlockKind.PARABOLA).block_masks
    for t in ctx.nonzero():
        t2 = t * t
        for a in ctx.nonzero():
            if scale_block(ctx, hyp[a.value - 1], t) != hyp[(t2 * a).value - 1]:
                logger.warning("t O_a != O_(t^2 a) at t=%#x a=%#x", t.value, a.value)
                return False
            if scale_block(ctx, par[a.value - 1], t2) != par[(t * a).value - 1]:
                logger.warning("t^2 U_a != U_(ta) at t=%#x a=%#x", t.value, a.value)
                return False
    return True


def split_count(ctx: FieldCtx, a: FieldElement, b: FieldElement) -> int:
    """Number of u in F_q^x for which x^2 + ux + a and x^2 + ux + b both split"""
    rows = _curve_rows(ctx, BlockKind.PARABOLA, np.arange(1, ctx.q, dtype=np.int64))
    return int(np.count_nonzero(rows[:, a.value] & rows[:, b.value]))


def fano_plane() -> IncidenceStructure:
    return IncidenceStructure.from_masks(7, [points_mask(b) for b in FANO_BLOCKS])


# --- block-set files --------------------------------------------------------------------

def _point_value(design: IncidenceStructure, i: int) -> int:
    label = design.point_labels[i]
    return label.value if isinstance(label, FieldElement) else i


def format_block_file(design: IncidenceStructure) -> str:
    """Header `v b n modulus_hex kind`, then `label:points` per block in block order"""
    n, modulus = (design.ctx.n, design.ctx.modulus) if design.ctx else (0, 0)
    lines = [f"{design.v} {design.b} {n} {modulus:#x} {design.kind.value}"]
    for mask, label in zip(design.block_masks, design.labels):
        values = sorted(_point_value(design, i) for i in mask_points(mask))
        head = format(label.value, "x") if label is not None else "-"
        lines.append(head + ":" + ",".join(format(x, "x") for x in values))
    return "\n".join(lines) + "\n"


def parse_block_file(text: str) -> IncidenceStructure:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DesignError("empty block file")
    try:
        v_s, b_s, n_s, mod_s, kind_s = lines[0].split()
        v, b, n, modulus = int(v_s), int(b_s), int(n_s), int(mod_s, 16)
        kind = BlockKind(kind_s)
    except ValueError as exc:
        raise DesignError(f"bad header {lines[0]!r}: {exc}") from None
    if len(lines) - 1 != b:
        raise DesignError(f"header announces {b} blocks, file has {len(lines) - 1}")

    ctx = None
    if n:
        try:
            ctx = new_field_ctx(n, modulus)
        except FieldError as exc:
            raise DesignError(f"bad field in header: {exc}") from None
        if v != ctx.order:
            raise DesignError(f"{v} points do not match F_{ctx.q}")

    masks, labels = [], []
    for line in lines[1:]:
        head, _, body = line.partition(":")
        try:
            values = [int(tok, 16) for tok in body.split(",") if tok]
            label = None if head == "-" else int(head, 16)
        except ValueError:
            raise DesignError(f"bad block line {line!r}") from None
        indices = [x - 1 for x in values] if ctx else values
        if any(not 0 <= i < v for i in indices):
            raise DesignError(f"point out of range in {line!r}")
        masks.append(points_mask(indices))
        if label is not None and ctx is not None:
            if not 0 < label < ctx.q:
                raise DesignError(f"label out of range in {line!r}")
            labels.append(ctx.element(label))
        else:
            labels.append(None)

    point_labels = tuple(ctx.nonzero()) if ctx else None
    return IncidenceStructure.from_masks(v, masks, kind, labels, point_labels, ctx)
