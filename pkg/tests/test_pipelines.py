from fractions import Fraction

import pytest

from aplab.colorings import CYCLIC, Coloring, verify_symmetric_ap_free
from aplab.patterns import PatternSpec, a_binomial_system
from aplab.pipelines import (
    StageError,
    run_lemma7_10,
    run_pipeline,
    run_thm2_5,
    run_thm2_6,
    run_thm2_7,
    z22_coloring,
)
from aplab.sets import verify_solution_free
from aplab.torus import pattern_probability_exact


class TestThm26:
    def test_certificate_fields(self):
        res = run_thm2_6(ell=1, samples=50_000, seed=0)
        cert = res.certificate()
        assert cert["epsilon"] == "1/1056"
        assert cert["marginal"] == "1/1327120"
        assert Fraction(cert["bound"]) == res.bound
        assert res.bound == res.epsilon * Fraction(1, 16 * res.residues.modulus) ** 3

    def test_intermediates_verify(self):
        res = run_thm2_6(ell=1, samples=10_000, seed=1)
        assert verify_symmetric_ap_free(res.base, 4) is None
        assert (
            verify_solution_free(
                res.residues, a_binomial_system(res.spec), "abba_only"
            )
            is None
        )
        assert res.torus_set.first_marginal == res.marginal

    def test_rejects_bad_base(self):
        bad = Coloring(CYCLIC, (1,) * 10)
        with pytest.raises(StageError) as e:
            run_thm2_6(base=bad, samples=1000)
        assert e.value.stage == "verify-base"

    def test_ell_2_scaling(self):
        # one palette-squaring step multiplies the marginal denominator by
        # (nearly) r^2 and divides the bound by (nearly) N r^6
        r1 = run_thm2_6(ell=1, samples=10_000, seed=0)
        r2 = run_thm2_6(ell=2, samples=10_000, seed=0)
        assert r2.epsilon == Fraction(1, 23232)
        assert r1.epsilon / r2.epsilon == 22
        marg_ratio = r1.marginal / r2.marginal
        assert abs(float(marg_ratio) - 9) < 1e-3
        bound_ratio = float(r1.bound / r2.bound)
        assert abs(bound_ratio - 22 * 3**6) < 1.0


class TestOtherPipelines:
    def test_thm2_7_greedy_route(self):
        res = run_thm2_7(samples=20_000, seed=0)
        assert res.name == "thm2_7"
        assert verify_solution_free(res.residues, a_binomial_system(res.spec)) is None
        assert res.mc_mean <= float(res.bound) + 4 * res.mc_stderr + 1e-30

    def test_thm2_5_odd(self):
        res = run_thm2_5(samples=20_000, seed=0)
        assert res.spec.k == 5
        assert res.bound == res.epsilon * res.torus_set.width ** 4
        assert verify_solution_free(res.residues, a_binomial_system(res.spec)) is None

    def test_thm2_5_validates_parity(self):
        with pytest.raises(ValueError):
            run_thm2_5(k=4)

    def test_lemma7_10_factorial_interlacing(self):
        res = run_lemma7_10(samples=20_000, seed=0)
        assert res.interlaced.D == 24 * 22
        assert res.interlaced.r == 72
        # pattern probability is pinned to cell collisions
        assert res.epsilon <= Fraction(6, res.interlaced.D)
        assert res.epsilon == pattern_probability_exact(
            res.interlaced, res.spec, "binomial"
        )

    def test_lemma7_10_rejects_pattern_carrying_base(self):
        bad = Coloring(CYCLIC, (1,) * 8)
        with pytest.raises(StageError):
            run_lemma7_10(base=bad, samples=1000)

    def test_unknown_pipeline(self):
        with pytest.raises(ValueError):
            run_pipeline("thm9_9")


class TestDeterminism:
    def test_same_seed_same_certificate(self):
        a = run_thm2_6(ell=1, samples=30_000, seed=3).certificate()
        b = run_thm2_6(ell=1, samples=30_000, seed=3).certificate()
        assert a == b
