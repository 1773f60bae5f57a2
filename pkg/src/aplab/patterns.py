"""Exact integer arithmetic for one-dimensional progression patterns.

A pattern is a strictly increasing integer tuple ``a``; the points
``n + a_1 d, ..., n + a_k d`` form an a-progression.  Each pattern carries
coefficients ``c_i = prod_{j != i} (a_i - a_j)`` whose reciprocals sum to
zero exactly, and clearing denominators yields an integer equation
``sum_i e_i n_i = 0`` (the pattern's binomial system).  For the plain
k-term progression the system is the alternating binomial row.

All positions are 0-based.  Everything here is pure arbitrary-precision
integer/rational arithmetic; coefficients grow factorially, so no floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

__all__ = [
    "PatternSpec",
    "BinomialSystem",
    "Pairing",
    "k_binomial_system",
    "a_coefficients",
    "a_binomial_system",
    "is_trivial_solution",
    "zero_sum_subsets",
    "zero_sum_partitions",
    "trivial_solution_count",
    "enumerate_pairings",
    "symmetric_pairing",
    "is_symmetric",
    "is_k_pattern",
    "is_ap_with_jumps",
    "recover_ap",
]

# Exhaustive enumerations below are exponential in k; these caps keep them at
# desk scale, where exactness matters more than speed.
PAIRING_K_LIMIT = 16
SUBSET_K_LIMIT = 20


@dataclass(frozen=True)
class PatternSpec:
    """Strictly increasing integer offsets (a_1, ..., a_k) with k >= 3."""

    a: tuple[int, ...]

    def __post_init__(self):
        a = tuple(int(x) for x in self.a)
        object.__setattr__(self, "a", a)
        if len(a) < 3:
            raise ValueError("a pattern needs at least 3 offsets")
        if any(x >= y for x, y in zip(a, a[1:])):
            raise ValueError("offsets must be strictly increasing")

    @property
    def k(self) -> int:
        return len(self.a)

    def normalized(self) -> "PatternSpec":
        """Translate offsets so the first is 0.

        All pattern predicates are invariant under translating ``a`` by a
        constant, so this is the canonical representative.
        """
        return PatternSpec(tuple(x - self.a[0] for x in self.a))

    @classmethod
    def ap(cls, k: int) -> "PatternSpec":
        """The plain k-term progression (0, 1, ..., k-1)."""
        return cls(tuple(range(k)))

    @classmethod
    def from_string(cls, text: str) -> "PatternSpec":
        return cls(tuple(int(tok) for tok in text.replace(",", " ").split()))

    def __str__(self):
        return ",".join(str(x) for x in self.a)


@dataclass(frozen=True)
class BinomialSystem:
    """Canonical integer equation ``sum_i e_i n_i = 0``.

    Canonical means: all e_i nonzero, sum zero, gcd of |e_i| equal to 1, and
    e_1 > 0.  ``source`` records how the system arose and is ignored by
    equality so that the length-k progression system compares equal to the
    one derived from offsets (0, ..., k-1).
    """

    e: tuple[int, ...]
    source: str = field(default="k-binomial", compare=False)

    def __post_init__(self):
        e = tuple(int(x) for x in self.e)
        object.__setattr__(self, "e", e)
        if len(e) < 3:
            raise ValueError("system needs at least 3 coefficients")
        if any(x == 0 for x in e):
            raise ValueError("coefficients must be nonzero")
        if sum(e) != 0:
            raise ValueError("coefficients must sum to zero")
        if math.gcd(*(abs(x) for x in e)) != 1:
            raise ValueError("coefficients must have gcd 1")
        if e[0] <= 0:
            raise ValueError("leading coefficient must be positive")

    @property
    def k(self) -> int:
        return len(self.e)


def _canonicalize(e, source):
    g = math.gcd(*(abs(x) for x in e))
    e = tuple(x // g for x in e)
    if e[0] < 0:
        e = tuple(-x for x in e)
    return BinomialSystem(e, source)


def k_binomial_system(k: int) -> BinomialSystem:
    """Alternating binomial row for the k-term progression, e.g. (1, -3, 3, -1).

    These are the coefficients annihilated by (k-2)-nd powers of a
    progression; see ``a_binomial_system`` for the general identity.
    """
    if k < 3:
        raise ValueError("k must be at least 3")
    e = tuple((-1) ** i * math.comb(k - 1, i) for i in range(k))
    return BinomialSystem(e, "k-binomial")


def a_coefficients(spec: PatternSpec) -> tuple[int, ...]:
    """c_i = prod over j != i of (a_i - a_j), as exact integers."""
    a = spec.a
    out = []
    for i, ai in enumerate(a):
        prod = 1
        for j, aj in enumerate(a):
            if j != i:
                prod *= ai - aj
        out.append(prod)
    return tuple(out)


def a_binomial_system(spec: PatternSpec) -> BinomialSystem:
    """Clear denominators in ``sum_i n_i / c_i = 0`` and canonicalize.

    For offsets (0, 1, ..., k-1) the result equals ``k_binomial_system(k)``.
    """
    c = a_coefficients(spec)
    lcm = 1
    for ci in c:
        lcm = math.lcm(lcm, abs(ci))
    e = tuple(lcm // ci for ci in c)
    assert sum(e) == 0  # reciprocal-sum identity
    return _canonicalize(e, "a-binomial")


def is_trivial_solution(system: BinomialSystem, values) -> bool:
    """True iff, for every distinct value among ``values``, the coefficients
    at the positions carrying that value sum to zero."""
    values = tuple(values)
    if len(values) != system.k:
        raise ValueError(f"expected {system.k} values, got {len(values)}")
    sums: dict = {}
    for ei, v in zip(system.e, values):
        sums[v] = sums.get(v, 0) + ei
    return all(s == 0 for s in sums.values())


def zero_sum_subsets(system: BinomialSystem, min_size: int = 3) -> list[tuple[int, ...]]:
    """All index subsets I with |I| >= min_size and sum of e_i over I zero.

    0-based positions, output in lexicographic order.  Deliberately returns
    every zero-sum subset: verifiers built on top need the full list to be
    sound.
    """
    if min_size < 3:
        raise ValueError("min_size must be at least 3")
    k = system.k
    if k > SUBSET_K_LIMIT:
        raise ValueError(f"subset enumeration capped at k <= {SUBSET_K_LIMIT}")
    out = []
    for size in range(min_size, k + 1):
        for idx in combinations(range(k), size):
            if sum(system.e[i] for i in idx) == 0:
                out.append(idx)
    out.sort()
    return out


def zero_sum_partitions(system: BinomialSystem) -> list[tuple[tuple[int, ...], ...]]:
    """Set partitions of the positions in which every block has zero
    coefficient sum.

    A solution of the system is trivial exactly when its equal-value classes
    form such a partition, so these index the trivial solutions.
    """
    k = system.k
    e = system.e
    found = []

    def rec(i, blocks):
        if i == k:
            if all(sum(e[j] for j in b) == 0 for b in blocks):
                found.append(tuple(tuple(b) for b in blocks))
            return
        for b in blocks:
            b.append(i)
            rec(i + 1, blocks)
            b.pop()
        blocks.append([i])
        rec(i + 1, blocks)
        blocks.pop()

    rec(0, [])
    return found


def _falling_factorial(t, j):
    out = 1
    for i in range(j):
        out *= t - i
    return out


def trivial_solution_count(system: BinomialSystem, t: int) -> int:
    """Number of trivial solutions with entries drawn from a set of t distinct
    values (counting assignments, not value-sets)."""
    return sum(_falling_factorial(t, len(p)) for p in zero_sum_partitions(system))


@dataclass(frozen=True)
class Pairing:
    """Fixed-point-free involution on 0-based positions, as sorted disjoint pairs."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple(tuple(int(x) for x in p) for p in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        seen = set()
        for i, j in pairs:
            if i >= j:
                raise ValueError("each pair must be (low, high)")
            if i in seen or j in seen:
                raise ValueError("pairs must be disjoint")
            seen.update((i, j))
        if sorted(seen) != list(range(2 * len(pairs))):
            raise ValueError("pairs must cover positions 0..k-1")
        if list(pairs) != sorted(pairs):
            raise ValueError("pairs must be sorted")

    @property
    def k(self) -> int:
        return 2 * len(self.pairs)

    def partner(self, i: int) -> int:
        for a, b in self.pairs:
            if i == a:
                return b
            if i == b:
                return a
        raise KeyError(i)


def symmetric_pairing(k: int) -> Pairing:
    """i paired with k-1-i."""
    if k % 2:
        raise ValueError("k must be even")
    return Pairing(tuple((i, k - 1 - i) for i in range(k // 2)))


def is_symmetric(spec: PatternSpec) -> bool:
    """k even and a_1 + a_k = a_2 + a_{k-1} = ..."""
    a = spec.a
    k = spec.k
    if k % 2:
        return False
    s = a[0] + a[-1]
    return all(a[i] + a[k - 1 - i] == s for i in range(k // 2))


def enumerate_pairings(spec: PatternSpec) -> list[Pairing]:
    """Every perfect matching f on positions with c_i = -c_{f(i)}.

    Exhaustive matching; the candidate count is at most (k-1)!! so the size
    cap keeps this instant at desk scale.  May be empty.
    """
    k = spec.k
    if k % 2:
        raise ValueError("pairings need even k")
    if k > PAIRING_K_LIMIT:
        raise ValueError(f"pairing enumeration capped at k <= {PAIRING_K_LIMIT}")
    c = a_coefficients(spec)
    out = []

    def rec(free, acc):
        if not free:
            out.append(Pairing(tuple(acc)))
            return
        i = free[0]
        for j in free[1:]:
            if c[i] == -c[j]:
                acc.append((i, j))
                rec([x for x in free if x != i and x != j], acc)
                acc.pop()

    rec(list(range(k)), [])
    out.sort(key=lambda p: p.pairs)
    return out


def is_k_pattern(n1: int, n2: int, n3: int, k: int, modulus: int | None = None) -> bool:
    """True iff (n1, n2, n3) are not all equal and a*n1 + b*n2 = (a+b)*n3 for
    some positive integers a, b with a + b <= k - 1.

    ``modulus`` selects arithmetic in Z/mZ; None means plain integers.
    """
    if k < 3:
        raise ValueError("k must be at least 3")
    if n1 == n2 == n3:
        return False
    for a in range(1, k - 1):
        for b in range(1, k - a):
            lhs = a * n1 + b * n2 - (a + b) * n3
            if (lhs % modulus == 0) if modulus else (lhs == 0):
                return True
    return False


def _jump_difference(values, p, modulus=None):
    diffs = [y - x for x, y in zip(values, values[1:])]
    if modulus is not None:
        diffs = [d % modulus for d in diffs]
    candidates = [diffs[0], diffs[0] - p]
    if modulus is not None:
        candidates = [c % modulus for c in candidates]
    for d in candidates:
        up = (d + p) % modulus if modulus is not None else d + p
        if all(x == d or x == up for x in diffs):
            return d
    return None


def is_ap_with_jumps(values, p: int, modulus: int | None = None) -> bool:
    """True iff some d has every consecutive difference in {d, d+p}."""
    values = list(values)
    if len(values) < 2:
        return True
    return _jump_difference(values, p, modulus) is not None


def recover_ap(values, p: int, a: int, modulus: int | None = None):
    """Certify a jump-progression as a genuine progression via congruences
    modulo a!.

    Requires k <= a, p coprime to a!, and (when given) a modulus divisible
    by a!.  Certificates, in order: all consecutive differences already equal
    (the trivial jump counts 0 and k-1); the endpoints agree mod a!; or some
    inner pair straddles the ends (values[0] == values[j] and
    values[i] == values[-1] mod a! with 0 < i < j < k-1).  The congruence
    certificates force the jump count to 0 or k-1, hence a true progression.
    Returns the common difference, or None when no certificate applies.
    """
    values = list(values)
    k = len(values)
    if k < 3:
        raise ValueError("need at least 3 terms")
    fac = math.factorial(a)
    if k > a:
        raise ValueError("sequence length must be at most a")
    if math.gcd(p % fac, fac) != 1:
        raise ValueError("jump size must be coprime to a!")
    if modulus is not None and modulus % fac != 0:
        raise ValueError("modulus must be a multiple of a!")
    if _jump_difference(values, p, modulus) is None:
        return None
    diffs = [y - x for x, y in zip(values, values[1:])]
    if modulus is not None:
        diffs = [d % modulus for d in diffs]
    uniform = all(d == diffs[0] for d in diffs)

    def cong(x, y):
        return (x - y) % fac == 0

    clause = uniform or cong(values[0], values[-1])
    if not clause:
        for j in range(2, k - 1):
            for i in range(1, j):
                if cong(values[0], values[j]) and cong(values[i], values[-1]):
                    clause = True
                    break
            if clause:
                break
    if not clause:
        return None
    assert uniform, "congruence certificate violated"
    return diffs[0]
