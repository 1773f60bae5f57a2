import random
from fractions import Fraction

import numpy as np
import pytest

import oracles
from aplab.colorings import CYCLIC, Coloring, Z22_COLORING
from aplab.errors import BudgetExceededError
from aplab.patterns import PatternSpec, a_binomial_system, k_binomial_system
from aplab.sets import ResidueSet, base9_set
from aplab.torus import (
    ConstantField,
    DiagonalStrip,
    SlabIndicator,
    TorusColoring,
    TorusSet,
    build_torus_set,
    interlace_k,
    interlace_m,
    lambda_tilde_certificate,
    lambda_tilde_mc,
    pattern_cells,
    pattern_probability_exact,
    pattern_probability_mc,
    torus_coloring_from_text,
    torus_coloring_to_text,
    torus_set_from_text,
    torus_set_to_text,
)


def z22():
    return Coloring(CYCLIC, tuple(int(ch) for ch in Z22_COLORING))


def random_torus_coloring(rng, d_max=40, r_max=6):
    D = rng.randint(2, d_max)
    r = rng.randint(2, min(r_max, D))
    ids = [rng.randint(1, r) for _ in range(D)]
    # ensure density of ids so r == max
    for j in range(r):
        ids[rng.randrange(D)] = j + 1
    return TorusColoring(tuple(ids))


class TestInterlacing:
    def test_single_point_base(self):
        phi = Coloring(CYCLIC, (1,))
        tc = interlace_k(phi, 4)
        assert tc.D == 16
        assert tc.r == 16
        assert len(set(tc.cell_colors)) == 16

    def test_bundled_coloring_dimensions(self):
        tc = interlace_k(z22(), 4)
        assert (tc.D, tc.r) == (352, 48)

    def test_block_digit_structure(self):
        # inside block a, cells cycle through the k phase palettes while the
        # base coloring advances once per k cells
        phi = z22()
        k, n = 4, phi.n
        tc = interlace_k(phi, k)
        for j in (0, 5, 87, 200, 351):
            a, rem = divmod(j, k * n)
            b, c = divmod(rem, k)
            assert tc.cell_colors[j] == (a * k + c) * phi.r + phi.colors[b]

    def test_interlace_m_step_lift(self):
        phi = z22()
        tc = interlace_m(phi, 1)
        assert tc.D == phi.n
        assert tc.cell_colors == phi.colors

    def test_interlace_m_phase_pattern(self):
        phi = Coloring(CYCLIC, (1, 2, 1))
        tc = interlace_m(phi, 2)
        r = phi.r
        assert tc.cell_colors == (1, 1 + r, 2, 2 + r, 1, 1 + r)

    def test_interlace_m_cap(self):
        import math

        with pytest.raises(BudgetExceededError):
            interlace_m(z22(), math.factorial(8))

    def test_round_trip(self):
        tc = interlace_k(z22(), 4)
        assert torus_coloring_from_text(torus_coloring_to_text(tc)) == tc


class TestPatternCells:
    @pytest.mark.parametrize(
        "a", [(0, 1, 2, 3), (0, 1, 2), (0, 2, 5), (0, 1, 2, 3, 4), (0, 3, 4, 7)]
    )
    def test_areas_sum_to_one(self, a):
        cells = pattern_cells(PatternSpec(a))
        assert sum(area for _, area in cells) == 1
        for g, area in cells:
            assert area > 0
            assert all(0 <= gi <= ai for gi, ai in zip(g, a))

    def test_translation_invariance(self):
        assert pattern_cells(PatternSpec((5, 6, 7, 8))) == pattern_cells(
            PatternSpec((0, 1, 2, 3))
        )


class TestExactProbability:
    def test_constant_coloring_symmetric(self):
        tc = TorusColoring((1,))
        assert pattern_probability_exact(tc, PatternSpec.ap(4), "symmetric") == 1

    def test_bundled_interlacing_regression(self):
        eps = pattern_probability_exact(interlace_k(z22(), 4), PatternSpec.ap(4))
        assert eps == Fraction(1, 1056)

    def test_pattern_bound_for_protected_base(self):
        # bases with no symmetric progressions force patterns into cell
        # coincidences, so the probability is at most C(k,2)/D and k/N
        from aplab.colorings import search_coloring

        for n in (10, 14, 22):
            r = 3
            while (res := search_coloring(n, 4, r)).status != "found":
                r += 1
            phi = res.coloring
            tc = interlace_k(phi, 4)
            eps = pattern_probability_exact(tc, PatternSpec.ap(4))
            assert eps <= Fraction(6, tc.D)
            assert eps <= Fraction(4, n)

    def test_all_distinct_matches_mc(self):
        tc = TorusColoring(tuple(range(1, 13)))
        spec = PatternSpec.ap(4)
        exact = pattern_probability_exact(tc, spec, "symmetric")
        est = pattern_probability_mc(tc, spec, "symmetric", samples=400_000, seed=5)
        assert abs(float(exact) - est.mean) <= 4 * max(est.stderr, 1e-9)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_colorings_match_mc(self, seed):
        rng = random.Random(seed)
        tc = random_torus_coloring(rng)
        spec = PatternSpec.ap(4)
        exact = pattern_probability_exact(tc, spec)
        est = pattern_probability_mc(tc, spec, samples=300_000, seed=seed)
        assert abs(float(exact) - est.mean) <= 4 * max(est.stderr, 1e-9)

    def test_mono_subset_predicate(self):
        tc = TorusColoring((1, 2, 1, 2))
        spec = PatternSpec.ap(4)
        full = pattern_probability_exact(tc, spec, "mono")
        partial = pattern_probability_exact(tc, spec, "mono", subset=(0, 3))
        assert 0 < full <= partial < 1

    def test_work_cap(self):
        tc = TorusColoring((1, 2) * 600)
        with pytest.raises(BudgetExceededError):
            pattern_probability_exact(tc, PatternSpec.ap(4), work_cap=1000)

    def test_odd_k_no_pairings(self):
        # for odd length only the zero-sum subsets can fire
        tc = TorusColoring((1, 2, 3, 1, 2))
        spec = PatternSpec.ap(5)
        eps = pattern_probability_exact(tc, spec)
        mono = pattern_probability_exact(tc, spec, "mono")
        assert eps == mono


class TestTorusSet:
    def build_simple(self):
        # full circle one color; y-interval [0, 1/32)
        return build_torus_set(TorusColoring((1,)), ResidueSet(2, (0, 1)), 4)

    def test_trivial_slab(self):
        ts = self.build_simple()
        assert ts.first_marginal == Fraction(1, 32)
        assert ts.contains_exact(Fraction(1, 3), Fraction(0))
        assert ts.contains_exact(Fraction(1, 3), Fraction(1, 32) - Fraction(1, 1000))
        assert not ts.contains_exact(Fraction(1, 3), Fraction(1, 32))

    def test_slice_is_single_interval(self):
        Phi = interlace_k(z22(), 4)
        S = base9_set(Phi.r, 36 * Phi.r**2 + 1)
        ts = build_torus_set(Phi, S, 4)
        rng = random.Random(3)
        for _ in range(20):
            x = Fraction(rng.randint(0, 10**6), 10**6)
            j = ts.base.color_at(x)
            start = Fraction(ts.slots[j - 1], ts.m)
            assert ts.contains_exact(x, start)
            assert ts.contains_exact(x, start + ts.width - Fraction(1, 10**9))
            assert not ts.contains_exact(x, start + ts.width)
            assert not ts.contains_exact(x, start - Fraction(1, 10**9))

    def test_needs_enough_residues(self):
        with pytest.raises(ValueError):
            build_torus_set(TorusColoring((1, 2)), ResidueSet(5, (0,)), 4)

    def test_batch_matches_exact(self):
        ts = self.build_simple()
        rng = np.random.default_rng(0)
        xs = rng.random(500)
        ys = rng.random(500)
        batch = ts.evaluate_batch(xs, ys)
        for x, y, b in zip(xs, ys, batch):
            assert bool(b) == ts.contains_exact(
                Fraction(float(x)), Fraction(float(y))
            )

    def test_file_round_trip(self, tmp_path):
        Phi = interlace_k(z22(), 4)
        S = base9_set(Phi.r, 36 * Phi.r**2 + 1)
        ts = build_torus_set(Phi, S, 4)
        (tmp_path / "phi.txt").write_text(torus_coloring_to_text(Phi))
        text = torus_set_to_text(ts, "phi.txt")
        back = torus_set_from_text(
            text, lambda ref: torus_coloring_from_text((tmp_path / ref).read_text())
        )
        assert back == ts


class TestLambdaTildeMC:
    def test_constant_has_zero_variance(self):
        est = lambda_tilde_mc(ConstantField(Fraction(1, 3)), PatternSpec.ap(4), 5000, 0)
        assert est.stderr == 0
        assert est.mean == pytest.approx((1 / 3) ** 4)

    def test_slab_matches_convolution_oracle(self):
        spec = PatternSpec.ap(4)
        est = lambda_tilde_mc(SlabIndicator(Fraction(1, 4)), spec, 1_000_000, 2)
        want = oracles.slab_volume(0.25, k_binomial_system(4).e)
        assert abs(est.mean - want) <= 4 * est.stderr

    def test_multibranch_system(self):
        # offsets (0, 2, 3) give last coefficient of magnitude 2; compare the
        # branch-sampling estimator against an independent direct sampler
        spec = PatternSpec((0, 2, 3))
        e = a_binomial_system(spec).e
        assert abs(e[-1]) == 2
        alpha = 0.3
        est = lambda_tilde_mc(SlabIndicator(Fraction(3, 10)), spec, 400_000, 3)
        rng = np.random.default_rng(123)
        n = 400_000
        y1 = rng.random(n)
        y2 = rng.random(n)
        acc = (-(e[0] * y1 + e[1] * y2)) % 1.0
        j = rng.integers(0, abs(e[-1]), n)
        y3 = ((acc + j) / e[-1]) % 1.0
        vals = (y1 < alpha) & (y2 < alpha) & (y3 < alpha)
        want = vals.mean()
        sigma = est.stderr + vals.std() / np.sqrt(n)
        assert abs(est.mean - want) <= 4 * sigma

    def test_scaling_with_matched_seeds(self):
        # scaling F by c scales the estimate by c^k exactly, seeds matched
        class Scaled:
            def __init__(self, inner, c):
                self.inner, self.c = inner, c

            def evaluate_batch(self, xs, ys):
                return self.c * self.inner.evaluate_batch(xs, ys)

        F = SlabIndicator(Fraction(1, 3))
        spec = PatternSpec.ap(4)
        base = lambda_tilde_mc(F, spec, 50_000, 9)
        scaled = lambda_tilde_mc(Scaled(F, 0.5), spec, 50_000, 9)
        assert scaled.mean == pytest.approx(base.mean * 0.5**4, rel=1e-12)

    def test_diagonal_strip_marginal(self):
        est = lambda_tilde_mc(DiagonalStrip(Fraction(1, 2)), PatternSpec.ap(4), 200_000, 4)
        assert 0 <= est.mean <= 1


class TestCertificate:
    def test_constant_base(self):
        Phi = TorusColoring((1,))
        S = ResidueSet(5, (0, 1, 2))
        cert = lambda_tilde_certificate(Phi, S, PatternSpec.ap(4))
        assert cert == Fraction(1, (16 * 5) ** 3)

    def test_doubling_modulus_scales_bound(self):
        Phi = TorusColoring((1,))
        spec = PatternSpec.ap(4)
        c1 = lambda_tilde_certificate(Phi, ResidueSet(5, (0,)), spec)
        c2 = lambda_tilde_certificate(Phi, ResidueSet(10, (0,)), spec)
        assert c1 / c2 == 2 ** (spec.k - 1)

    def test_consistent_with_mc(self):
        Phi = interlace_k(z22(), 4)
        S = base9_set(Phi.r, 36 * Phi.r**2 + 1)
        spec = PatternSpec.ap(4)
        cert = lambda_tilde_certificate(Phi, S, spec)
        ts = build_torus_set(Phi, S, 4)
        est = lambda_tilde_mc(ts, spec, 200_000, 0)
        assert est.mean - 4 * est.stderr <= float(cert)

    def test_unsound_width_rejected(self):
        # offsets (0,1,2,4) carry coefficient mass 9 > 2^(k-1), so the default
        # width cannot give a sound bound
        spec = PatternSpec((0, 1, 2, 4))
        Phi = TorusColoring((1,))
        S = ResidueSet(11, (0, 3))
        with pytest.raises(ValueError):
            lambda_tilde_certificate(Phi, S, spec)
        # an explicitly smaller width is accepted
        val = lambda_tilde_certificate(Phi, S, spec, width=Fraction(1, 18 * 11))
        assert val > 0
