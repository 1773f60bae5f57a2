"""Piecewise-constant circle colorings, rectangle sets in the 2-torus, exact
pattern probabilities, and seeded Monte Carlo estimates of the progression
functional.

The circle is [0, 1) with half-open cells [j/D, (j+1)/D); all constructions
here share a single rational cell width 1/D, which is what makes the pattern
probability computable exactly: writing x = (p+s)/D, y = (q+t)/D with integer
p, q and s, t in [0, 1), the cell of x + a*y is (p + a*q + floor(s + a*t))
mod D, and the floor vector is constant on a fixed rational polygonal
decomposition of the (s, t) unit square that does not depend on (p, q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .colorings import Coloring
from .errors import BudgetExceededError, FormatError
from .patterns import (
    PatternSpec,
    a_binomial_system,
    enumerate_pairings,
    zero_sum_subsets,
)
from .sets import ResidueSet

__all__ = [
    "TorusColoring",
    "TorusSet",
    "Estimate",
    "ConstantField",
    "SlabIndicator",
    "DiagonalStrip",
    "interlace_k",
    "interlace_m",
    "pattern_cells",
    "pattern_probability_exact",
    "pattern_probability_mc",
    "build_torus_set",
    "lambda_tilde_mc",
    "lambda_tilde_certificate",
    "torus_coloring_to_text",
    "torus_coloring_from_text",
    "torus_set_to_text",
    "torus_set_from_text",
]

INTERLACE_CELL_CAP = 100_000
EXACT_WORK_CAP = 2_500_000_000
MC_BATCH = 1_000_000


@dataclass(frozen=True)
class TorusColoring:
    """Coloring of the circle, constant on [j/D, (j+1)/D) for j = 0..D-1."""

    cell_colors: tuple[int, ...]

    def __post_init__(self):
        cc = tuple(int(c) for c in self.cell_colors)
        object.__setattr__(self, "cell_colors", cc)
        if not cc or min(cc) < 1:
            raise ValueError("cell colors must be positive ids")

    @property
    def D(self) -> int:
        return len(self.cell_colors)

    @property
    def r(self) -> int:
        return max(self.cell_colors)

    @cached_property
    def as_array(self) -> np.ndarray:
        return np.asarray(self.cell_colors, dtype=np.int32)

    def color_at(self, x: Fraction) -> int:
        j = math.floor((x % 1) * self.D)
        return self.cell_colors[j]


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo estimate; stderr is the sample standard deviation divided
    by sqrt(sample_count)."""

    mean: float
    stderr: float
    samples: int
    seed: int


# ---------------------------------------------------------------------------
# interlacings


def interlace_k(phi: Coloring, k: int, cell_cap: int = INTERLACE_CELL_CAP) -> TorusColoring:
    """Cut the circle into k blocks and fill each with k interlaced copies of
    phi, every copy on its own palette: cell j of D = k^2 N gets color
    (a*k + c)*r + phi(b) where j = a*kN + b*k + c.

    A pattern whose colors match forces matching block and phase digits, which
    in turn forces the phi positions to form a matching progression; with a
    pattern-free phi only cell collisions remain, so the pattern probability
    is O(1/N).
    """
    if k < 3:
        raise ValueError("k must be at least 3")
    n_amb = phi.n
    r = phi.r
    D = k * k * n_amb
    if D > cell_cap:
        raise BudgetExceededError(f"D = {D} exceeds cell cap {cell_cap}")
    cells = []
    for j in range(D):
        a, rem = divmod(j, k * n_amb)
        b, c = divmod(rem, k)
        cells.append((a * k + c) * r + phi.colors[b])
    return TorusColoring(tuple(cells))


def interlace_m(phi: Coloring, m: int, cell_cap: int = INTERLACE_CELL_CAP) -> TorusColoring:
    """Interlace m palette-disjoint copies of a cyclic phi: cell j of D = mN
    gets color phi(j // m) + r * (j mod m)."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if phi.ambient != "cyclic":
        raise ValueError("interlace_m needs a cyclic coloring")
    D = m * phi.n
    if D > cell_cap:
        raise BudgetExceededError(f"D = {D} exceeds cell cap {cell_cap}")
    r = phi.r
    cells = [phi.colors[j // m] + r * (j % m) for j in range(D)]
    return TorusColoring(tuple(cells))


# ---------------------------------------------------------------------------
# exact pattern probability


def pattern_cells(spec: PatternSpec) -> list[tuple[tuple[int, ...], Fraction]]:
    """Decompose the (s, t) unit square by the lines s + a_i t = integer into
    regions of constant floor vector (floor(s + a_i t))_i.

    Returns (floor_vector, area) pairs with exact rational areas summing to 1.
    Regions between consecutive lines inside a strip of constant line order
    are trapezoids, so width times midpoint gap integrates them exactly.
    """
    offsets = spec.normalized().a
    lines = [(a, c) for a in sorted(set(offsets)) if a > 0 for c in range(1, a + 1)]
    breaks = {Fraction(0), Fraction(1)}
    for idx, (ai, ci) in enumerate(lines):
        for val in (Fraction(ci, ai), Fraction(ci - 1, ai)):
            if 0 <= val <= 1:
                breaks.add(val)
        for aj, cj in lines[idx + 1 :]:
            if ai == aj:
                continue
            t = Fraction(ci - cj, ai - aj)
            if 0 <= t <= 1:
                breaks.add(t)
    cuts = sorted(breaks)
    cells: dict[tuple[int, ...], Fraction] = {}
    for t0, t1 in zip(cuts, cuts[1:]):
        tm = (t0 + t1) / 2
        heights = {Fraction(0), Fraction(1)}
        for a, c in lines:
            s = c - a * tm
            if 0 < s < 1:
                heights.add(s)
        hs = sorted(heights)
        width = t1 - t0
        for lo, hi in zip(hs, hs[1:]):
            sm = (lo + hi) / 2
            g = tuple(math.floor(sm + a * tm) for a in offsets)
            cells[g] = cells.get(g, Fraction(0)) + width * (hi - lo)
    assert sum(cells.values()) == 1
    return sorted(cells.items())


def _predicate_clauses(spec, predicate, subset):
    """Clause list evaluated as an OR; each clause is ("pairs", pairs) meaning
    all listed index pairs share a color, or ("equal", idx) meaning all listed
    positions share a color."""
    k = spec.k
    if predicate == "binomial":
        clauses = []
        if k % 2 == 0:
            clauses += [("pairs", p.pairs) for p in enumerate_pairings(spec)]
        clauses += [
            ("equal", idx) for idx in zero_sum_subsets(a_binomial_system(spec), 3)
        ]
        return clauses
    if predicate == "symmetric":
        if k % 2:
            raise ValueError("symmetric predicate needs even k")
        return [("pairs", tuple((i, k - 1 - i) for i in range(k // 2)))]
    if predicate == "mono":
        idx = tuple(subset) if subset is not None else tuple(range(k))
        if len(idx) < 2:
            raise ValueError("mono predicate needs at least 2 positions")
        return [("equal", idx)]
    raise ValueError(f"unknown predicate {predicate!r}")


def _eval_clauses(clauses, cols):
    mask = None
    for kind, data in clauses:
        if kind == "pairs":
            m = cols[data[0][0]] == cols[data[0][1]]
            for i, j in data[1:]:
                m &= cols[i] == cols[j]
        else:
            m = cols[data[0]] == cols[data[1]]
            for i in data[2:]:
                m &= cols[data[0]] == cols[i]
        mask = m if mask is None else (mask | m)
    return mask


def pattern_probability_exact(
    Phi: TorusColoring,
    spec: PatternSpec,
    predicate: str = "binomial",
    subset=None,
    work_cap: int = EXACT_WORK_CAP,
    chunk: int = 512,
) -> Fraction:
    """Exact probability over uniform (x, y) on the torus that the colors of
    x + a_1 y, ..., x + a_k y satisfy the predicate.

    Exactness: the (p, q) grid part is a finite count (integers) and the
    (s, t) part contributes the rational cell areas from ``pattern_cells``,
    which are (p, q)-independent.  The work cap bounds D^2 times the cell
    count; exceeding it raises rather than truncating.
    """
    offsets = spec.normalized().a
    D = Phi.D
    cells = pattern_cells(spec)
    if D * D * len(cells) > work_cap:
        raise BudgetExceededError(
            f"exact decomposition needs D^2 * cells = {D * D * len(cells)} > {work_cap}"
        )
    clauses = _predicate_clauses(spec, predicate, subset)
    if not clauses:
        return Fraction(0)
    colors = Phi.as_array
    q = np.arange(D, dtype=np.int64)[None, :]
    total = Fraction(0)
    for start in range(0, D, chunk):
        p = np.arange(start, min(D, start + chunk), dtype=np.int64)[:, None]
        bases = [(p + a * q) % D for a in offsets]
        for g, area in cells:
            cols = []
            for i in range(len(offsets)):
                idx = bases[i] + g[i]
                if g[i] < D:
                    np.subtract(idx, D, out=idx, where=idx >= D)
                else:
                    idx %= D
                cols.append(colors[idx])
            mask = _eval_clauses(clauses, cols)
            cnt = int(mask.sum())
            if cnt:
                total += area * cnt
    return total / (D * D)


def pattern_probability_mc(
    Phi: TorusColoring,
    spec: PatternSpec,
    predicate: str = "binomial",
    samples: int = 1_000_000,
    seed: int = 0,
    subset=None,
    batch: int = MC_BATCH,
) -> Estimate:
    """Monte Carlo estimate of the same probability, for cross-checking."""
    offsets = spec.normalized().a
    clauses = _predicate_clauses(spec, predicate, subset)
    colors = Phi.as_array
    D = Phi.D
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < samples:
        nb = min(batch, samples - done)
        x = rng.random(nb)
        y = rng.random(nb)
        cols = []
        for a in offsets:
            z = (x + a * y) % 1.0
            cols.append(colors[np.minimum((z * D).astype(np.int64), D - 1)])
        mask = _eval_clauses(clauses, cols)
        hits += int(mask.sum())
        done += nb
    mean = hits / samples
    var = (hits - samples * mean * mean) / max(samples - 1, 1)
    return Estimate(mean, math.sqrt(max(var, 0.0) / samples), samples, seed)


# ---------------------------------------------------------------------------
# torus sets


@dataclass(frozen=True)
class TorusSet:
    """Union of rectangles {(x, y): y in J_{Phi(x)}} with J_j = [s_j/m,
    s_j/m + width); every vertical slice is one interval, so the first
    marginal is exactly ``width``."""

    base: TorusColoring
    m: int
    width: Fraction
    slots: tuple[int, ...]

    def __post_init__(self):
        slots = tuple(int(s) for s in self.slots)
        object.__setattr__(self, "slots", slots)
        object.__setattr__(self, "width", Fraction(self.width))
        if len(slots) != self.base.r:
            raise ValueError("need one y-interval per color")
        if not (0 < self.width <= Fraction(1, self.m)):
            raise ValueError("width must lie in (0, 1/m]")
        if any(not 0 <= s < self.m for s in slots):
            raise ValueError("slots must be residues mod m")

    @property
    def first_marginal(self) -> Fraction:
        return self.width

    @cached_property
    def _slot_starts(self) -> np.ndarray:
        color_slot = np.zeros(self.base.r + 1, dtype=np.float64)
        for j, s in enumerate(self.slots, start=1):
            color_slot[j] = s / self.m
        return color_slot

    def contains_exact(self, x: Fraction, y: Fraction) -> bool:
        j = self.base.color_at(x)
        start = Fraction(self.slots[j - 1], self.m)
        return (Fraction(y) - start) % 1 < self.width

    def exact_value_at(self, x: Fraction, y: Fraction) -> Fraction:
        return Fraction(int(self.contains_exact(x, y)))

    def evaluate_batch(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        D = self.base.D
        cells = np.minimum(((xs % 1.0) * D).astype(np.int64), D - 1)
        cols = self.base.as_array[cells]
        starts = self._slot_starts[cols]
        return (((ys - starts) % 1.0) < float(self.width)).astype(np.float64)


class ConstantField:
    """F constant equal to alpha."""

    def __init__(self, alpha):
        self.alpha = Fraction(alpha)

    def evaluate_batch(self, xs, ys):
        return np.full(np.shape(xs), float(self.alpha))

    def exact_value_at(self, x, y):
        return self.alpha


class SlabIndicator:
    """F(x, y) = 1 iff y mod 1 < alpha; constant first marginal alpha with
    x-independent slices."""

    def __init__(self, alpha):
        self.alpha = Fraction(alpha)

    def evaluate_batch(self, xs, ys):
        return ((ys % 1.0) < float(self.alpha)).astype(np.float64)

    def contains_exact(self, x, y):
        return Fraction(y) % 1 < self.alpha

    def exact_value_at(self, x, y):
        return Fraction(int(self.contains_exact(x, y)))


class DiagonalStrip:
    """F(x, y) = 1 iff (y - x) mod 1 < alpha; constant first marginal alpha
    with slices that move with x."""

    def __init__(self, alpha):
        self.alpha = Fraction(alpha)

    def evaluate_batch(self, xs, ys):
        return (((ys - xs) % 1.0) < float(self.alpha)).astype(np.float64)

    def contains_exact(self, x, y):
        return (Fraction(y) - Fraction(x)) % 1 < self.alpha

    def exact_value_at(self, x, y):
        return Fraction(int(self.contains_exact(x, y)))


def build_torus_set(Phi: TorusColoring, S: ResidueSet, k: int, width: Fraction | None = None) -> TorusSet:
    """Assign color j the y-interval starting at s_j/m, width 1/(2^k m) by
    default; S must provide at least r residues (taken in sorted order)."""
    if len(S) < Phi.r:
        raise ValueError(f"need at least {Phi.r} residues, got {len(S)}")
    if width is None:
        width = Fraction(1, (2**k) * S.modulus)
    return TorusSet(Phi, S.modulus, Fraction(width), S.elements[: Phi.r])


# ---------------------------------------------------------------------------
# the progression functional


def _solution_weights(system):
    pos = sum(x for x in system.e if x > 0)
    neg = -sum(x for x in system.e if x < 0)
    return pos, neg


def lambda_tilde_mc(
    F,
    spec: PatternSpec,
    samples: int,
    seed: int = 0,
    batch: int = MC_BATCH,
) -> Estimate:
    """Unbiased estimate of the progression functional of F along the solution
    torus of the spec's binomial system.

    Sampling: x_i = x0 + a_i x1 with (x0, x1) uniform; y_1..y_{k-1} uniform
    and y_k drawn uniformly among the |e_k| circle solutions of
    e_k y_k = -sum_{i<k} e_i y_i.  Deterministic for a fixed seed.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    system = a_binomial_system(spec)
    offsets = spec.normalized().a
    e = system.e
    k = system.k
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        nb = min(batch, samples - done)
        x0 = rng.random(nb)
        x1 = rng.random(nb)
        ys = [rng.random(nb) for _ in range(k - 1)]
        acc = np.zeros(nb)
        for ei, yi in zip(e[:-1], ys):
            acc += ei * yi
        branch = rng.integers(0, abs(e[-1]), size=nb)
        yk = (((-acc) % 1.0) + branch) / e[-1] % 1.0
        ys.append(yk)
        prod = np.ones(nb)
        for a, yi in zip(offsets, ys):
            prod *= F.evaluate_batch((x0 + a * x1) % 1.0, yi)
        total += float(prod.sum())
        total_sq += float((prod * prod).sum())
        done += nb
    mean = total / samples
    var = (total_sq - samples * mean * mean) / max(samples - 1, 1)
    return Estimate(mean, math.sqrt(max(var, 0.0) / samples), samples, seed)


def lambda_tilde_certificate(
    Phi: TorusColoring,
    S: ResidueSet,
    spec: PatternSpec,
    width: Fraction | None = None,
) -> Fraction:
    """Rigorous upper bound epsilon * width^(k-1) on the progression
    functional of the torus set built from (Phi, S), with epsilon the exact
    binomial-pattern probability of Phi.

    Soundness needs the rounding step: the slab widths must be small enough
    that a circle solution of the binomial system pins the slot residues to a
    solution mod m, i.e. width * m * max(sum of positive e_i, -sum of
    negative e_i) <= 1/2.  Violations raise instead of returning an
    unsound bound.
    """
    system = a_binomial_system(spec)
    k = spec.k
    m = S.modulus
    if width is None:
        width = Fraction(1, (2**k) * m)
    width = Fraction(width)
    pos, neg = _solution_weights(system)
    if width * m * max(pos, neg) > Fraction(1, 2):
        raise ValueError(
            "width too large for a sound certificate with this system; "
            f"need width*m*{max(pos, neg)} <= 1/2"
        )
    eps = pattern_probability_exact(Phi, spec, "binomial")
    return eps * width ** (k - 1)


# ---------------------------------------------------------------------------
# file formats


def torus_coloring_to_text(tc: TorusColoring) -> str:
    body = " ".join(str(c) for c in tc.cell_colors)
    return f"{tc.D} {tc.r}\n{body}\n"


def torus_coloring_from_text(text: str) -> TorusColoring:
    lines = [ln.strip() for ln in text.strip().splitlines()]
    if len(lines) < 2:
        raise FormatError("expected 2 lines (sizes, cells)", len(lines))
    try:
        D, r = (int(tok) for tok in lines[0].split())
    except ValueError:
        raise FormatError(f"expected 'D r', got {lines[0]!r}", 1) from None
    cells = [int(tok) for ln in lines[1:] for tok in ln.split()]
    if len(cells) != D:
        raise FormatError(f"header says D={D}, got {len(cells)} cells", 2)
    tc = TorusColoring(tuple(cells))
    if tc.r != r:
        raise FormatError(f"header says r={r}, max color is {tc.r}", 1)
    return tc


def torus_set_to_text(ts: TorusSet, coloring_path: str) -> str:
    w = ts.width
    slots = " ".join(str(s) for s in ts.slots)
    return f"{coloring_path}\n{ts.m} {w.numerator}/{w.denominator}\n{slots}\n"


def torus_set_from_text(text: str, load_coloring) -> TorusSet:
    """Parse a torus-set file; ``load_coloring`` maps the referenced path to a
    TorusColoring."""
    lines = [ln.strip() for ln in text.strip().splitlines()]
    if len(lines) < 3:
        raise FormatError("expected 3 lines (coloring path, 'm w', slots)", len(lines))
    base = load_coloring(lines[0])
    try:
        m_tok, w_tok = lines[1].split()
        m = int(m_tok)
        num, den = (int(x) for x in w_tok.split("/"))
        width = Fraction(num, den)
    except ValueError:
        raise FormatError(f"expected 'm num/den', got {lines[1]!r}", 2) from None
    slots = tuple(int(tok) for tok in lines[2].split())
    return TorusSet(base, m, width, slots)
