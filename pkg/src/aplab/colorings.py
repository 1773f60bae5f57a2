"""Colorings of Z/NZ and of integer intervals, with pattern verifiers and search.

Verifiers return None when the coloring avoids the pattern family and a
Witness locating the lexicographically least violation otherwise.  Scans are
vectorized over the start point with numpy; the test suite cross-checks them
against independent naive loop implementations.

Ambients: "cyclic" quantifies progression differences over nonzero residues;
"interval" quantifies over progressions that fit inside [0, N).  In the
cyclic ambient points of a progression may coincide when N shares factors
with the differences; that is allowed, the only nontriviality condition is
d != 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np

from .errors import BudgetExceededError, FormatError
from .patterns import (
    PatternSpec,
    a_binomial_system,
    enumerate_pairings,
    is_symmetric,
    zero_sum_subsets,
)

__all__ = [
    "CYCLIC",
    "INTERVAL",
    "Coloring",
    "Witness",
    "SearchResult",
    "Z22_COLORING",
    "verify_symmetric_ap_free",
    "verify_sym_a_ap_free",
    "verify_mono_pattern_free",
    "verify_binomial_pattern_free",
    "verify_abab_abba_free",
    "verify_abab_abba_free_lattice",
    "digit_square_coloring",
    "mod_behrend_coloring",
    "tensor_power",
    "product_coloring",
    "search_coloring",
    "coloring_to_text",
    "coloring_from_text",
]

CYCLIC = "cyclic"
INTERVAL = "interval"

# 3-coloring of Z/22Z with no symmetrically colored 4-term progression
# (recoverable with search_coloring; kept as a regression anchor).
Z22_COLORING = "1333221232131211333233"

TENSOR_CELL_CAP = 10**6
EXHAUSTIVE_N_CAP = 64

_B36 = "0123456789abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class Coloring:
    """A coloring of Z/NZ or of the interval [0, N).

    Color ids are exactly 1..r with every id used; constructors that produce
    sparse ids must relabel first (see ``Coloring.from_raw``).
    """

    ambient: str
    colors: tuple[int, ...]

    def __post_init__(self):
        colors = tuple(int(c) for c in self.colors)
        object.__setattr__(self, "colors", colors)
        if self.ambient not in (CYCLIC, INTERVAL):
            raise ValueError(f"unknown ambient {self.ambient!r}")
        if not colors:
            raise ValueError("coloring must be nonempty")
        used = set(colors)
        if min(used) < 1 or max(used) != len(used):
            raise ValueError("color ids must be exactly 1..r with all used")

    @property
    def n(self) -> int:
        return len(self.colors)

    @property
    def r(self) -> int:
        return max(self.colors)

    @cached_property
    def as_array(self) -> np.ndarray:
        return np.asarray(self.colors, dtype=np.int32)

    @classmethod
    def from_raw(cls, ambient, ids) -> "Coloring":
        """Relabel arbitrary hashable labels to dense 1..r by first occurrence."""
        mapping: dict = {}
        out = []
        for x in ids:
            if x not in mapping:
                mapping[x] = len(mapping) + 1
            out.append(mapping[x])
        return cls(ambient, tuple(out))


@dataclass(frozen=True)
class Witness:
    """A concrete pattern violation; re-evaluating the predicate on ``points``
    reproduces it."""

    kind: str
    n: int | None
    d: int | None
    points: tuple[int, ...]
    colors: tuple[int, ...]
    detail: dict = field(default_factory=dict, compare=False)


# ---------------------------------------------------------------------------
# file format: line 1 ambient, line 2 "N r", line 3 colors
# (base-36 digits, one per position, when r <= 35; else whitespace-separated)


def coloring_to_text(c: Coloring) -> str:
    if c.r <= 35:
        body = "".join(_B36[x] for x in c.colors)
    else:
        body = " ".join(str(x) for x in c.colors)
    return f"{c.ambient}\n{c.n} {c.r}\n{body}\n"


def coloring_from_text(text: str) -> Coloring:
    lines = [ln.strip() for ln in text.strip().splitlines()]
    if len(lines) < 3:
        raise FormatError("expected 3 lines (ambient, sizes, colors)", len(lines))
    ambient = lines[0].split()[-1].lower()
    if ambient not in (CYCLIC, INTERVAL):
        raise FormatError(f"unknown ambient {lines[0]!r}", 1)
    try:
        n, r = (int(tok) for tok in lines[1].split())
    except ValueError:
        raise FormatError(f"expected 'N r', got {lines[1]!r}", 2) from None
    body = lines[2]
    if " " in body or r > 35:
        ids = [int(tok) for tok in body.split()]
    else:
        try:
            ids = [int(ch, 36) for ch in body]
        except ValueError:
            raise FormatError("invalid base-36 color digit", 3) from None
    if len(ids) != n:
        raise FormatError(f"expected {n} colors, got {len(ids)}", 3)
    col = Coloring(ambient, tuple(ids))
    if col.r != r:
        raise FormatError(f"header says r={r} but {col.r} colors used", 2)
    return col


# ---------------------------------------------------------------------------
# scan engine


def _iter_color_tuples(coloring: Coloring, offsets, signed=False):
    """Yield (d, ns, cols) with ns the valid start points for difference d and
    cols[i] the colors at n + offsets[i]*d.

    offsets must be normalized (first entry 0, increasing).  Cyclic ambient
    scans d over 1..N-1, which already covers negated differences; interval
    scans d >= 1, plus d <= -1 when ``signed`` is set (needed for predicates
    that are not reversal-invariant).
    """
    col = coloring.as_array
    n_amb = coloring.n
    amax = offsets[-1]
    if coloring.ambient == CYCLIC:
        base = np.arange(n_amb, dtype=np.int64)
        for d in range(1, n_amb):
            cols = [col[(base + o * d) % n_amb] for o in offsets]
            yield d, base, cols
        return
    ds = list(range(1, (n_amb - 1) // amax + 1)) if amax <= n_amb - 1 else []
    if signed:
        ds = ds + [-d for d in ds]
    for d in ds:
        if d > 0:
            ns = np.arange(0, n_amb - amax * d, dtype=np.int64)
        else:
            ns = np.arange(amax * (-d), n_amb, dtype=np.int64)
        cols = [col[ns + o * d] for o in offsets]
        yield d, ns, cols


def _first_true(ns, mask):
    return int(ns[int(np.argmax(mask))])


def _witness_at(coloring, offsets, n, d, kind, detail=None):
    if coloring.ambient == CYCLIC:
        pts = tuple((n + o * d) % coloring.n for o in offsets)
    else:
        pts = tuple(n + o * d for o in offsets)
    cols = tuple(coloring.colors[p] for p in pts)
    return Witness(kind, n, d, pts, cols, detail or {})


def _normalized_offsets(pattern) -> tuple[int, ...]:
    if isinstance(pattern, PatternSpec):
        return pattern.normalized().a
    k = int(pattern)
    if k < 3:
        raise ValueError("k must be at least 3")
    return tuple(range(k))


def verify_symmetric_ap_free(coloring: Coloring, k: int) -> Witness | None:
    """No k-term progression with d != 0 whose i-th and (k-1-i)-th points share
    a color for every i < k/2.  k must be even."""
    if k % 2 or k < 4:
        raise ValueError("k must be even and at least 4")
    return _scan_symmetric(coloring, tuple(range(k)), "symmetric-ap")


def verify_sym_a_ap_free(coloring: Coloring, spec: PatternSpec) -> Witness | None:
    """Symmetric-coloring check along a-progressions for a symmetric spec."""
    if not is_symmetric(spec):
        raise ValueError("spec must be symmetric (even k, constant a_i + a_{k+1-i})")
    return _scan_symmetric(coloring, spec.normalized().a, "symmetric-a-ap")


def _scan_symmetric(coloring, offsets, kind):
    k = len(offsets)
    pairs = [(i, k - 1 - i) for i in range(k // 2)]
    best = None
    for d, ns, cols in _iter_color_tuples(coloring, offsets):
        mask = cols[pairs[0][0]] == cols[pairs[0][1]]
        for i, j in pairs[1:]:
            mask &= cols[i] == cols[j]
        if mask.any():
            cand = (_first_true(ns, mask), d)
            if best is None or cand < best:
                best = cand
    if best is None:
        return None
    return _witness_at(coloring, offsets, best[0], best[1], kind)


def verify_binomial_pattern_free(coloring: Coloring, spec: PatternSpec) -> Witness | None:
    """No a-progression with d != 0 that either (a) matches colors under some
    coefficient-negating pairing of the spec, or (b) is monochromatic on some
    zero-sum coefficient subset of size >= 3.

    All pairings and all zero-sum subsets are checked.  For interval colorings
    the difference is scanned over both signs, since clause predicates need
    not be reversal-invariant for asymmetric specs.
    """
    offsets = spec.normalized().a
    k = spec.k
    pairings = enumerate_pairings(spec) if k % 2 == 0 else []
    subsets = zero_sum_subsets(a_binomial_system(spec), 3)
    clauses = [("pairing", p.pairs) for p in pairings]
    clauses += [("subset", idx) for idx in subsets]
    if not clauses:
        return None
    best = None
    best_detail = None
    for d, ns, cols in _iter_color_tuples(coloring, offsets, signed=True):
        any_mask = None
        masks = []
        for ckind, data in clauses:
            if ckind == "pairing":
                m = cols[data[0][0]] == cols[data[0][1]]
                for i, j in data[1:]:
                    m &= cols[i] == cols[j]
            else:
                m = cols[data[0]] == cols[data[1]]
                for i in data[2:]:
                    m &= cols[data[0]] == cols[i]
            masks.append(m)
            any_mask = m if any_mask is None else (any_mask | m)
        if any_mask is not None and any_mask.any():
            pos = int(np.argmax(any_mask))
            cand = (int(ns[pos]), d)
            if best is None or cand < best:
                best = cand
                for (ckind, data), m in zip(clauses, masks):
                    if m[pos]:
                        best_detail = {"clause": ckind, ckind: data}
                        break
    if best is None:
        return None
    return _witness_at(coloring, offsets, best[0], best[1], "binomial-pattern", best_detail)


def verify_mono_pattern_free(coloring: Coloring, k: int) -> Witness | None:
    """No monochromatic triple (n1, n2, n3), not all equal, with
    a*n1 + b*n2 = (a+b)*n3 for positive a, b, a+b <= k-1."""
    if k < 3:
        raise ValueError("k must be at least 3")
    col = coloring.as_array
    n_amb = coloring.n
    cyclic = coloring.ambient == CYCLIC
    best = None
    for color in range(1, coloring.r + 1):
        members = np.flatnonzero(col == color).astype(np.int64)
        if len(members) == 0:
            continue
        in_class = np.zeros(n_amb, dtype=bool)
        in_class[members] = True
        s1 = members[:, None]
        s2 = members[None, :]
        for a in range(1, k - 1):
            for b in range(1, k - a):
                s = a + b
                t = a * s1 + b * s2
                if cyclic:
                    g = math.gcd(s, n_amb)
                    ng = n_amb // g
                    inv = pow(s // g, -1, ng)
                    tm = t % n_amb
                    solvable = tm % g == 0
                    base = ((tm // g) * inv) % ng
                    for u in range(g):
                        n3 = base + u * ng
                        hits = solvable & in_class[n3 % n_amb]
                        hits &= ~((s1 == s2) & (n3 % n_amb == s1))
                        if hits.any():
                            ii, jj = np.nonzero(hits)
                            for i, j in zip(ii.tolist(), jj.tolist()):
                                cand = (
                                    int(members[i]),
                                    int(members[j]),
                                    int((base[i, j] + u * ng) % n_amb),
                                    a,
                                    b,
                                )
                                if best is None or cand < best:
                                    best = cand
                else:
                    solvable = t % s == 0
                    n3 = t // s
                    hits = solvable & in_class[np.clip(n3, 0, n_amb - 1)] & (n3 < n_amb)
                    hits &= ~((s1 == s2) & (n3 == s1))
                    if hits.any():
                        ii, jj = np.nonzero(hits)
                        for i, j in zip(ii.tolist(), jj.tolist()):
                            cand = (int(members[i]), int(members[j]), int(n3[i, j]), a, b)
                            if best is None or cand < best:
                                best = cand
    if best is None:
        return None
    n1, n2, n3, a, b = best
    cols = (coloring.colors[n1], coloring.colors[n2], coloring.colors[n3])
    return Witness("mono-pattern", None, None, (n1, n2, n3), cols, {"a": a, "b": b})


def verify_abab_abba_free(coloring: Coloring, a_bound: int) -> Witness | None:
    """No ABAB pattern, and no ABBA pattern with a_1+a_4 != a_2+a_3, along any
    (a_1 < a_2 < a_3 < a_4)-progression with offsets bounded by a_bound.

    The quadruple family is closed under reversal, so interval colorings only
    need d >= 1.
    """
    if a_bound < 4:
        raise ValueError("a_bound must be at least 4")
    best = None
    best_info = None
    for quad in combinations(range(1, a_bound + 1), 4):
        offsets = tuple(x - quad[0] for x in quad)
        asym = quad[0] + quad[3] != quad[1] + quad[2]
        for d, ns, cols in _iter_color_tuples(coloring, offsets):
            abab = (cols[0] == cols[2]) & (cols[1] == cols[3])
            if abab.any():
                cand = (_first_true(ns, abab), d, quad, "abab")
                if best is None or cand[:2] + (cand[2],) < best[:2] + (best[2],):
                    best, best_info = cand, ("abab", quad, offsets)
            if asym:
                abba = (cols[0] == cols[3]) & (cols[1] == cols[2])
                if abba.any():
                    cand = (_first_true(ns, abba), d, quad, "abba")
                    if best is None or cand[:2] + (cand[2],) < best[:2] + (best[2],):
                        best, best_info = cand, ("asymmetric-abba", quad, offsets)
    if best is None:
        return None
    kind, quad, offsets = best_info
    w = _witness_at(coloring, offsets, best[0], best[1], kind, {"quad": quad})
    return w


# ---------------------------------------------------------------------------
# digit-lattice colorings (squared-digit colors and their wrap-safe product)


def digit_square_coloring(M: int, m: int) -> Coloring:
    """Color the digit box {0..M-1}^m by 1 + sum of squared digits, flattened
    to an interval coloring of [M^m] by base-M expansion.

    Along any lattice line the color is a nontrivial quadratic in the step, so
    no ABAB pattern and no asymmetric ABBA pattern exists with respect to
    lattice progressions (see ``verify_abab_abba_free_lattice``).
    """
    ids = []
    for n in range(M**m):
        x, val = n, 0
        for _ in range(m):
            dig = x % M
            val += dig * dig
            x //= M
        ids.append(val + 1)
    return Coloring.from_raw(INTERVAL, ids)


def verify_abab_abba_free_lattice(coloring: Coloring, M: int, m: int, a_bound: int) -> tuple | None:
    """ABAB / asymmetric-ABBA check with pattern arithmetic taken componentwise
    in the digit lattice {0..M-1}^m (no carries), i.e. over lattice lines
    n + a_i * d with n, d integer vectors.

    Returns None, or a tuple (quad, n, d, kind) for the first violation found.
    """
    if len(coloring.colors) != M**m:
        raise ValueError("coloring length must be M^m")

    def decode(n):
        out = []
        for _ in range(m):
            out.append(n % M)
            n //= M
        return tuple(out)

    def encode(v):
        out = 0
        for x in reversed(v):
            out = out * M + x
        return out

    box = [decode(n) for n in range(M**m)]
    quads = list(combinations(range(1, a_bound + 1), 4))
    from itertools import product as iproduct

    for d in iproduct(range(-(M - 1), M), repeat=m):
        if all(x == 0 for x in d):
            continue
        for n in box:
            for quad in quads:
                pts = []
                ok = True
                for a in quad:
                    p = tuple(ni + a * di for ni, di in zip(n, d))
                    if any(x < 0 or x >= M for x in p):
                        ok = False
                        break
                    pts.append(p)
                if not ok:
                    continue
                cs = [coloring.colors[encode(p)] for p in pts]
                if cs[0] == cs[2] and cs[1] == cs[3]:
                    return (quad, n, d, "abab")
                if quad[0] + quad[3] != quad[1] + quad[2] and cs[0] == cs[3] and cs[1] == cs[2]:
                    return (quad, n, d, "asymmetric-abba")
    return None


def mod_behrend_coloring(M: int, m: int, a_bound: int) -> Coloring:
    """Product of the squared-digit coloring with the digitwise residue map
    mod a_bound!, viewed as a coloring of Z/M^m Z.

    M must be coprime to a_bound! so that digit sequences of progressions are
    jump-progressions whose congruences certify genuine progressions; the
    product then avoids ABAB and asymmetric ABBA patterns for every offset
    quadruple bounded by a_bound, now with respect to cyclic progressions.
    """
    fac = math.factorial(a_bound)
    if math.gcd(M, fac) != 1:
        raise ValueError("M must be coprime to a_bound!")
    ids = []
    for n in range(M**m):
        x, sq, res = n, 0, []
        for _ in range(m):
            dig = x % M
            sq += dig * dig
            res.append(dig % fac)
            x //= M
        ids.append((sq, tuple(res)))
    return Coloring.from_raw(CYCLIC, ids)


# ---------------------------------------------------------------------------
# constructions


def tensor_power(coloring: Coloring, ell: int, cell_cap: int = TENSOR_CELL_CAP) -> Coloring:
    """Color n in Z/N^ell Z by the tuple of colors of its base-N digits,
    least-significant digit first.

    Each progression's least significant varying digit is itself a
    progression, so freeness from symmetrically colored progressions is
    preserved.
    """
    if coloring.ambient != CYCLIC:
        raise ValueError("tensor power needs a cyclic coloring")
    if ell < 1:
        raise ValueError("ell must be at least 1")
    n_amb = coloring.n
    total = n_amb**ell
    if total > cell_cap:
        raise BudgetExceededError(f"N^ell = {total} exceeds cap {cell_cap}")
    ids = []
    for n in range(total):
        x = n
        key = []
        for _ in range(ell):
            key.append(coloring.colors[x % n_amb])
            x //= n_amb
        ids.append(tuple(key))
    return Coloring.from_raw(CYCLIC, ids)


def product_coloring(c1: Coloring, c2: Coloring) -> Coloring:
    """Common refinement: color n by the pair (c1(n), c2(n))."""
    if c1.ambient != c2.ambient or c1.n != c2.n:
        raise ValueError("colorings must share ambient and length")
    return Coloring.from_raw(c1.ambient, list(zip(c1.colors, c2.colors)))


# ---------------------------------------------------------------------------
# search


@dataclass
class SearchResult:
    status: str  # "found" | "none_exists" | "exhausted"
    coloring: Coloring | None
    nodes: int


def _symmetric_constraints(n_amb, offsets, ambient):
    """Deduplicated symmetric-coloring constraints as pair lists.

    Each constraint holds the index pairs that must NOT all be monochromatic.
    Pairs whose two points coincide are dropped (they hold automatically); a
    constraint with no remaining pairs is violated by every coloring.
    """
    k = len(offsets)
    amax = offsets[-1]
    seen = {}
    always_violated = False
    if ambient == CYCLIC:
        nds = ((n, d) for n in range(n_amb) for d in range(1, n_amb))
    else:
        nds = (
            (n, d)
            for d in range(1, (n_amb - 1) // amax + 1)
            for n in range(n_amb - amax * d)
        )
    for n, d in nds:
        if ambient == CYCLIC:
            pts = [(n + o * d) % n_amb for o in offsets]
        else:
            pts = [n + o * d for o in offsets]
        pairs = []
        for i in range(k // 2):
            p, q = pts[i], pts[k - 1 - i]
            if p != q:
                pairs.append((min(p, q), max(p, q)))
        key = frozenset(pairs)
        if key in seen:
            continue
        seen[key] = tuple(sorted(set(pairs)))
        if not pairs:
            always_violated = True
    constraints = [c for c in seen.values() if c]
    return constraints, always_violated


def search_coloring(
    n: int,
    pattern,
    r: int,
    ambient: str = CYCLIC,
    mode: str = "exhaustive",
    budget: int | None = None,
    seed: int = 0,
) -> SearchResult:
    """Find an r-coloring with no symmetrically colored progression.

    ``pattern`` is an even k (plain progressions) or a symmetric PatternSpec.
    Exhaustive mode runs depth-first search with incremental checks and
    canonical color pruning (color j is introduced only after j-1), so
    "none_exists" is a refutation of the whole r^n space.  Randomized mode
    resamples the positions of violated constraints until the budget runs
    out; exhaustion is reported distinctly from refutation.  Deterministic
    for a fixed (seed, budget).
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    offsets = _normalized_offsets(pattern)
    if isinstance(pattern, PatternSpec) and not is_symmetric(pattern):
        raise ValueError("search needs a symmetric spec")
    if len(offsets) % 2:
        raise ValueError("symmetric patterns need even length")
    constraints, always_violated = _symmetric_constraints(n, offsets, ambient)
    if always_violated:
        return SearchResult("none_exists", None, 0)

    if mode == "exhaustive":
        if n > EXHAUSTIVE_N_CAP:
            raise ValueError(f"exhaustive search capped at N <= {EXHAUSTIVE_N_CAP}")
        return _search_dfs(n, r, ambient, constraints, budget)
    if mode == "randomized":
        return _search_randomized(n, r, ambient, constraints, budget or 10_000, seed)
    raise ValueError(f"unknown mode {mode!r}")


def _search_dfs(n, r, ambient, constraints, budget):
    by_max = [[] for _ in range(n)]
    for pairs in constraints:
        by_max[max(max(p) for p in pairs)].append(pairs)
    colors = [0] * n
    nodes = 0
    exhausted = False

    def ok(p):
        for pairs in by_max[p]:
            for i, j in pairs:
                if colors[i] != colors[j]:
                    break
            else:
                return False
        return True

    def dfs(p, max_used):
        nonlocal nodes, exhausted
        if p == n:
            return True
        for c in range(1, min(r, max_used + 1) + 1):
            nodes += 1
            if budget is not None and nodes > budget:
                exhausted = True
                return False
            colors[p] = c
            if ok(p) and dfs(p + 1, max(max_used, c)):
                return True
        colors[p] = 0
        return False

    if dfs(0, 0):
        return SearchResult("found", Coloring.from_raw(ambient, colors), nodes)
    return SearchResult("exhausted" if exhausted else "none_exists", None, nodes)


def _search_randomized(n, r, ambient, constraints, budget, seed):
    rng = np.random.default_rng(seed)
    colors = rng.integers(1, r + 1, size=n)
    if constraints:
        pair_i = np.array([i for pairs in constraints for i, _ in pairs])
        pair_j = np.array([j for pairs in constraints for _, j in pairs])
        starts = np.cumsum([0] + [len(pairs) for pairs in constraints])[:-1]
        members = [sorted({x for p in pairs for x in p}) for pairs in constraints]
    rounds = 0
    while True:
        if constraints:
            eq = (colors[pair_i] == colors[pair_j]).astype(np.int8)
            per = np.minimum.reduceat(eq, starts)
            violated = np.flatnonzero(per)
        else:
            violated = []
        if len(violated) == 0:
            return SearchResult(
                "found", Coloring.from_raw(ambient, colors.tolist()), rounds
            )
        if rounds >= budget:
            return SearchResult("exhausted", None, rounds)
        idx = members[int(violated[0])]
        colors[idx] = rng.integers(1, r + 1, size=len(idx))
        rounds += 1
