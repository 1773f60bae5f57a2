"""Discretized torus functions on Z/NZ and their statistics: progression
densities, Fourier spectra, Gowers box norms, convergence tables, exponential
sums, and randomized extraction of interval colorings.

Spectra and box norms run in binary64 (the FFT needs floats) with stated
tolerances; progression densities over indicator or rational grids are exact
rationals, and serve as the correctness anchor for everything float-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .colorings import INTERVAL, Coloring, verify_symmetric_ap_free
from .errors import BudgetExceededError, FormatError
from .patterns import PatternSpec
from .torus import Estimate, lambda_tilde_mc

__all__ = [
    "GridFunction",
    "SpectrumReport",
    "ExtractionResult",
    "discretize",
    "quadratic_indicator",
    "lambda_exact",
    "spectrum",
    "gowers_norm",
    "convergence_experiment",
    "weyl_sum",
    "extract_coloring",
    "grid_to_text",
    "grid_from_text",
]

LAMBDA_RATIONAL_N_CAP = 512
U3_N_CAP = 4096
WEYL_WORK_CAP = 100_000_000
PARSEVAL_RTOL = 1e-10


class GridFunction:
    """A length-N sequence of values in [0, 1] on Z/NZ.

    Carries exact rational values alongside the float array when the source
    supports it (torus sets, constants); exact values make the progression
    density an exact rational.
    """

    def __init__(self, values, exact=None):
        self.values = np.asarray(values, dtype=np.float64)
        if self.values.ndim != 1 or len(self.values) == 0:
            raise ValueError("values must be a nonempty 1-D sequence")
        if self.values.min() < -1e-12 or self.values.max() > 1 + 1e-12:
            raise ValueError("values must lie in [0, 1]")
        self.exact = tuple(exact) if exact is not None else None
        if self.exact is not None and len(self.exact) != len(self.values):
            raise ValueError("exact values must match length")

    @property
    def N(self) -> int:
        return len(self.values)

    def mean(self) -> float:
        return float(self.values.mean())

    @property
    def is_indicator(self) -> bool:
        return self.exact is not None and all(v in (0, 1) for v in self.exact)

    @classmethod
    def constant(cls, N: int, alpha) -> "GridFunction":
        frac = Fraction(alpha)
        return cls(np.full(N, float(frac)), (frac,) * N)


@dataclass(frozen=True)
class SpectrumReport:
    """Mean coefficient and largest nonzero-frequency magnitude; the full
    table is kept only on request."""

    alpha: float
    max_nonzero: float
    coefficients: np.ndarray | None = None


def discretize(F, N: int, degree: int) -> GridFunction:
    """f(n) = F(n/N, (n^degree mod N)/N).

    Anything exposing ``exact_value_at`` (torus sets, the bundled fields) is
    sampled with exact rational coordinates, carrying rational values into
    the grid; otherwise the batch float path is used.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    if hasattr(F, "exact_value_at"):
        vals = [
            F.exact_value_at(Fraction(n, N), Fraction(pow(n, degree, N), N))
            for n in range(N)
        ]
        return GridFunction(np.array([float(v) for v in vals]), vals)
    ys = np.array([pow(int(n), degree, N) for n in range(N)], dtype=np.float64) / N
    xs = np.arange(N, dtype=np.float64) / N
    return GridFunction(F.evaluate_batch(xs, ys))


def quadratic_indicator(N: int, alpha) -> GridFunction:
    """Indicator of {n : n^2 mod N < alpha*N}, the classical Fourier-uniform
    set with skewed 4-term progression count."""
    frac = Fraction(alpha)
    vals = [int(Fraction(pow(n, 2, N), N) < frac) for n in range(N)]
    return GridFunction(np.array(vals, dtype=np.float64), vals)


# ---------------------------------------------------------------------------
# progression density


def lambda_exact(fs, spec: PatternSpec, rational_cap: int = LAMBDA_RATIONAL_N_CAP):
    """Average over all (n, d) in (Z/NZ)^2 of the product of f_i at
    n + a_i d.

    Accepts one grid or a sequence of k grids of equal length.  Indicator
    grids are counted in exact integer arithmetic and general rational grids
    are summed exactly under a size cap; float grids use numpy in binary64.
    Returns a Fraction on the exact paths, a float otherwise.
    """
    if isinstance(fs, GridFunction):
        fs = [fs] * spec.k
    fs = list(fs)
    if len(fs) != spec.k:
        raise ValueError(f"need {spec.k} grids, got {len(fs)}")
    N = fs[0].N
    if any(f.N != N for f in fs):
        raise ValueError("grids must share N")
    offsets = spec.normalized().a
    if all(f.is_indicator for f in fs):
        cols = [np.asarray([int(v) for v in f.exact], dtype=np.int64) for f in fs]
        base = np.arange(N, dtype=np.int64)
        total = 0
        for d in range(N):
            prod = cols[0][(base + offsets[0] * d) % N]
            for f, o in zip(cols[1:], offsets[1:]):
                prod = prod * f[(base + o * d) % N]
            total += int(prod.sum())
        return Fraction(total, N * N)
    if all(f.exact is not None for f in fs):
        if N > rational_cap:
            raise BudgetExceededError(
                f"exact rational density capped at N <= {rational_cap}"
            )
        total = Fraction(0)
        for n in range(N):
            for d in range(N):
                prod = Fraction(1)
                for f, o in zip(fs, offsets):
                    prod *= Fraction(f.exact[(n + o * d) % N])
                total += prod
        return total / (N * N)
    base = np.arange(N, dtype=np.int64)
    acc = 0.0
    for d in range(N):
        prod = fs[0].values[(base + offsets[0] * d) % N].copy()
        for f, o in zip(fs[1:], offsets[1:]):
            prod *= f.values[(base + o * d) % N]
        acc += float(prod.sum())
    return acc / (N * N)


# ---------------------------------------------------------------------------
# spectra and box norms


def spectrum(f: GridFunction, keep_coefficients: bool = False) -> SpectrumReport:
    """All N Fourier coefficients fhat(r) = E_n f(n) e(-rn/N) by FFT.

    Every call self-checks Parseval (sum |fhat|^2 == E|f|^2) to 1e-10
    relative; a failure means the transform cannot be trusted.
    """
    N = f.N
    coeffs = np.fft.fft(f.values) / N
    energy_freq = float(np.sum(np.abs(coeffs) ** 2))
    energy_time = float(np.mean(f.values**2))
    scale = max(energy_time, 1e-300)
    if abs(energy_freq - energy_time) > PARSEVAL_RTOL * scale:
        raise AssertionError(
            f"Parseval violated: {energy_freq} vs {energy_time}"
        )
    mags = np.abs(coeffs)
    alpha = float(coeffs[0].real)
    max_nonzero = float(mags[1:].max()) if N > 1 else 0.0
    return SpectrumReport(alpha, max_nonzero, coeffs if keep_coefficients else None)


def gowers_norm(f: GridFunction, s: int, center: bool = False, n_cap: int = U3_N_CAP) -> float:
    """Box norm of order s in {2, 3}.

    Order 2 uses the spectral identity (norm^4 equals the sum of fourth
    powers of Fourier magnitudes).  Order 3 averages the order-2 identity
    over multiplicative derivatives, one FFT per shift, so it is
    O(N^2 log N) and capped.
    """
    if s not in (2, 3):
        raise ValueError("only orders 2 and 3 are implemented")
    vals = f.values - f.mean() if center else f.values
    N = len(vals)
    if s == 2:
        coeffs = np.fft.fft(vals) / N
        return float(np.sum(np.abs(coeffs) ** 4) ** 0.25)
    if N > n_cap:
        raise BudgetExceededError(f"order-3 norm capped at N <= {n_cap}")
    acc = 0.0
    for h in range(N):
        deriv = vals * np.roll(vals, h)
        coeffs = np.fft.fft(deriv) / N
        acc += float(np.sum(np.abs(coeffs) ** 4))
    return float((acc / N) ** (1 / 8))


# ---------------------------------------------------------------------------
# convergence table


def convergence_experiment(
    F,
    spec: PatternSpec,
    N_list,
    reference=None,
    mc_samples: int = 1_000_000,
    seed: int = 0,
) -> dict:
    """For each N: the exact progression density of the discretized grid and
    its centered order-(k-2) box norm, against a reference torus value.

    The reference is Monte Carlo unless supplied (e.g. an exact certificate).
    The box-norm column needs k - 2 <= 3 and is omitted otherwise.
    """
    k = spec.k
    degree = k - 2
    rows = []
    if reference is None:
        est = lambda_tilde_mc(F, spec, mc_samples, seed)
        reference = est.mean
        ref_kind = "mc"
    else:
        ref_kind = "given"
    for N in N_list:
        f = discretize(F, N, degree)
        lam = lambda_exact(f, spec)
        row = {
            "N": int(N),
            "lambda": float(lam),
            "gap": abs(float(lam) - float(reference)),
        }
        if degree <= 3:
            row["centered_norm"] = gowers_norm(f, max(degree, 2), center=True)
        rows.append(row)
    return {"reference": float(reference), "reference_kind": ref_kind, "rows": rows}


# ---------------------------------------------------------------------------
# complete exponential sums


def weyl_sum(poly: dict, N: int, work_cap: int = WEYL_WORK_CAP) -> complex:
    """Normalized complete exponential sum (1/N^s) sum e(P(n)/N) over the full
    grid, for an integer polynomial in s <= 2 variables.

    ``poly`` maps exponent tuples to integer coefficients, e.g. {(2,): 1} for
    n^2 or {(1, 1): 1} for n1*n2.
    """
    if not poly:
        return complex(1.0)
    arities = {len(k) for k in poly}
    if len(arities) != 1:
        raise ValueError("all exponent tuples must have the same arity")
    s = arities.pop()
    if s not in (1, 2):
        raise ValueError("only 1 or 2 variables supported")
    if N**s > work_cap:
        raise BudgetExceededError(f"N^{s} exceeds work cap {work_cap}")

    def powmod(base: np.ndarray, exp: int) -> np.ndarray:
        out = np.ones_like(base)
        b = base % N
        e = exp
        while e:
            if e & 1:
                out = (out * b) % N
            b = (b * b) % N
            e >>= 1
        return out

    n1 = np.arange(N, dtype=np.int64)
    if s == 1:
        vals = np.zeros(N, dtype=np.int64)
        for (e1,), coef in poly.items():
            vals = (vals + (coef % N) * powmod(n1, e1)) % N
    else:
        vals = np.zeros((N, N), dtype=np.int64)
        col = n1[:, None]
        row = n1[None, :]
        for (e1, e2), coef in poly.items():
            term = (powmod(col, e1) * powmod(row, e2)) % N
            vals = (vals + (coef % N) * term) % N
        vals = vals.ravel()
    counts = np.bincount(vals, minlength=N)
    roots = np.exp(2j * np.pi * np.arange(N) / N)
    return complex(np.dot(counts, roots) / N**s)


# ---------------------------------------------------------------------------
# randomized extraction of colorings


@dataclass
class ExtractionResult:
    coloring: Coloring | None
    succeeded_at: int | None
    attempts: int
    undefined_failures: int
    rejected: int


def extract_coloring(
    F,
    alpha,
    k: int,
    r: int,
    N: int,
    seed: int = 0,
    attempts: int = 1,
    chunk: int = 4096,
) -> ExtractionResult:
    """Per attempt: sample x0, x1, y_1..y_r uniformly, color position i by the
    least j with F(x0 + i*x1, y_j) >= alpha/2, and accept the first coloring
    that is everywhere defined and has no symmetrically colored k-term
    progression in the interval ambient.

    Failure is a value: the result carries per-cause counts.  Deterministic
    for a fixed seed; attempts are scanned in order, so the first success by
    attempt index is returned.
    """
    if k % 2 or k < 4:
        raise ValueError("k must be even and at least 4")
    if r < 1 or N < 1 or attempts < 1:
        raise ValueError("r, N, attempts must be positive")
    threshold = float(alpha) / 2
    rng = np.random.default_rng(seed)
    undefined = 0
    rejected = 0
    done = 0
    idx = np.arange(N, dtype=np.float64)
    while done < attempts:
        nb = min(chunk, attempts - done)
        x0 = rng.random(nb)
        x1 = rng.random(nb)
        ys = rng.random((nb, r))
        # F values at (attempt, position, palette index)
        xs = (x0[:, None] + idx[None, :] * x1[:, None]) % 1.0
        vals = F.evaluate_batch(
            np.repeat(xs[:, :, None], r, axis=2).ravel(),
            np.repeat(ys[:, None, :], N, axis=1).ravel(),
        ).reshape(nb, N, r)
        hit = vals >= threshold
        defined = hit.any(axis=2)
        first = hit.argmax(axis=2) + 1
        for a in range(nb):
            if not defined[a].all():
                undefined += 1
                continue
            coloring = Coloring.from_raw(INTERVAL, first[a].tolist())
            if verify_symmetric_ap_free(coloring, k) is not None:
                rejected += 1
                continue
            return ExtractionResult(coloring, done + a, done + a + 1, undefined, rejected)
        done += nb
    return ExtractionResult(None, None, attempts, undefined, rejected)


# ---------------------------------------------------------------------------
# file format: line 1 N, then one value per line ("p/q" exact or float)


def grid_to_text(f: GridFunction) -> str:
    lines = [str(f.N)]
    if f.exact is not None:
        for v in f.exact:
            fr = Fraction(v)
            lines.append(f"{fr.numerator}/{fr.denominator}")
    else:
        lines.extend(repr(float(v)) for v in f.values)
    return "\n".join(lines) + "\n"


def grid_from_text(text: str) -> GridFunction:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty grid file", 1)
    try:
        N = int(lines[0])
    except ValueError:
        raise FormatError(f"expected N, got {lines[0]!r}", 1) from None
    toks = []
    for ln in lines[1:]:
        toks.extend(ln.split())
    if len(toks) != N:
        raise FormatError(f"expected {N} values, got {len(toks)}", 2)
    if all("/" in tok or tok.lstrip("-").isdigit() for tok in toks):
        exact = []
        for tok in toks:
            if "/" in tok:
                num, den = tok.split("/")
                exact.append(Fraction(int(num), int(den)))
            else:
                exact.append(Fraction(int(tok)))
        return GridFunction(np.array([float(v) for v in exact]), exact)
    return GridFunction(np.array([float(tok) for tok in toks]))
