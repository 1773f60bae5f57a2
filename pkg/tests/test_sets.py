import random

import pytest

import oracles
from aplab.colorings import verify_mono_pattern_free
from aplab.errors import BudgetExceededError, FormatError
from aplab.patterns import PatternSpec, a_binomial_system, k_binomial_system
from aplab.sets import (
    GreedyResult,
    ResidueSet,
    base9_set,
    behrend_set,
    covering_coloring,
    greedy_solution_free_set,
    residue_set_from_text,
    residue_set_to_text,
    verify_set_pattern_free,
    verify_solution_free,
)


class TestResidueSet:
    def test_validation(self):
        with pytest.raises(ValueError):
            ResidueSet(10, (0, 0))
        with pytest.raises(ValueError):
            ResidueSet(10, (0, 10))
        s = ResidueSet(10, (3, 1, 7))
        assert s.elements == (1, 3, 7)

    def test_round_trip(self):
        s = ResidueSet(101, (0, 5, 17, 99))
        assert residue_set_from_text(residue_set_to_text(s)) == s

    def test_format_error(self):
        with pytest.raises(FormatError):
            residue_set_from_text("10 3\n1 2")


class TestBehrend:
    def test_small_modulus_hosts_four_elements(self):
        s = behrend_set(9, 3)
        assert len(s) >= 4
        assert verify_set_pattern_free(s, 3) is None
        # matches the best any 4-element set can do at this modulus
        assert oracles.max_3ap_free_size(9) == 4

    def test_minimal_modulus(self):
        s = behrend_set(2, 3)
        assert len(s) == 1

    def test_power_of_two_modulus(self):
        s = behrend_set(64, 3)
        assert len(s) >= 8
        assert verify_set_pattern_free(s, 3) is None

    @pytest.mark.parametrize(
        "N,k",
        [(50, 3), (101, 3), (216, 4), (500, 5), (1000, 3), (2000, 6)],
    )
    def test_pattern_free_across_scales(self, N, k):
        s = behrend_set(N, k)
        assert len(s) >= 1
        assert verify_set_pattern_free(s, k) is None

    def test_set_pattern_verifier_catches_violations(self):
        s = ResidueSet(9, (0, 1, 2))
        w = verify_set_pattern_free(s, 3)
        assert w is not None
        n1, n2, n3, a, b = w
        assert (a * n1 + b * n2 - (a + b) * n3) % 9 == 0


class TestCoveringColoring:
    def test_full_set_one_color(self):
        c = covering_coloring(ResidueSet(12, tuple(range(12))), seed=0)
        assert c.r == 1

    def test_singleton_gives_all_distinct(self):
        c = covering_coloring(ResidueSet(9, (0,)), seed=1)
        assert c.r == 9
        assert len(set(c.colors)) == 9

    def test_classes_inherit_pattern_freeness(self):
        s = behrend_set(101, 3)
        for seed in range(20):
            c = covering_coloring(s, seed=seed)
            assert verify_mono_pattern_free(c, 3) is None

    def test_deterministic(self):
        s = behrend_set(101, 3)
        assert covering_coloring(s, seed=7) == covering_coloring(s, seed=7)

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            covering_coloring(ResidueSet(50, (0,)), seed=0, max_translates=3)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            covering_coloring(ResidueSet(5, ()), seed=0)


class TestGreedy:
    def test_small_target(self):
        res = greedy_solution_free_set(k_binomial_system(4), 1000, 5)
        assert res.complete and len(res.set) == 5
        assert verify_solution_free(res.set, k_binomial_system(4)) is None

    def test_singleton_zero_accepted(self):
        res = greedy_solution_free_set(k_binomial_system(4), 100, 1)
        assert res.set.elements == (0,)

    def test_pair(self):
        res = greedy_solution_free_set(k_binomial_system(5), 500, 2)
        assert res.complete and len(res.set) == 2

    def test_infeasible_flag(self):
        res = greedy_solution_free_set(k_binomial_system(4), 8, 6)
        assert isinstance(res, GreedyResult)
        assert not res.complete
        assert res.scanned == 8

    @pytest.mark.parametrize(
        "system,m,r",
        [
            (k_binomial_system(3), 400, 6),
            (k_binomial_system(4), 2000, 10),
            (k_binomial_system(5), 4000, 8),
            (a_binomial_system(PatternSpec((0, 1, 2, 4))), 3000, 8),
            (a_binomial_system(PatternSpec((0, 2, 3))), 500, 6),
        ],
    )
    def test_output_always_verifies(self, system, m, r):
        res = greedy_solution_free_set(system, m, r)
        assert res.complete
        assert verify_solution_free(res.set, system, "all_nontrivial") is None

    def test_feasibility_scaling_report(self):
        # find the least power-of-two modulus where greedy reaches r, then
        # check the fitted cubic law is self-consistent for the 4-term system
        system = k_binomial_system(4)
        fitted = 0.0
        mins = {}
        for r in range(2, 9):
            m = 16
            while True:
                if greedy_solution_free_set(system, m, r).complete:
                    mins[r] = m
                    fitted = max(fitted, m / r**3)
                    break
                m *= 2
        for r, m_min in mins.items():
            m = max(int(fitted * r**3) + 1, m_min)
            assert greedy_solution_free_set(system, m, r).complete
        print(f"greedy 4-term feasibility: fitted C={fitted:.2f}, minima={mins}")

    def test_pipeline_scale_regression(self):
        res = greedy_solution_free_set(k_binomial_system(4), 9216, 48)
        assert res.complete

    def test_table_budget(self):
        with pytest.raises(BudgetExceededError):
            greedy_solution_free_set(k_binomial_system(6), 10**6, 50, budget=10**4)


class TestBase9:
    def test_first_five(self):
        assert base9_set(5, 36 * 25 + 1).elements == (1, 2, 9, 10, 11)

    def test_singleton(self):
        assert base9_set(1, 37).elements == (1,)

    def test_max_element_bound(self):
        for r in (1, 2, 7, 50, 123, 500, 1000):
            s = base9_set(r, 36 * r * r + 1)
            assert max(s.elements) <= 9 * r * r

    def test_modulus_precondition(self):
        with pytest.raises(ValueError):
            base9_set(10, 3600)

    @pytest.mark.parametrize("r", [3, 10, 25, 48, 77, 100])
    def test_forced_structure(self, r):
        s = base9_set(r, 36 * r * r + 1)
        assert verify_solution_free(s, k_binomial_system(4), "abba_only") is None


class TestVerifySolutionFree:
    def test_tiny_examples(self):
        # {0,1,2}: the spread is too small for a nontrivial solution
        s = ResidueSet(100, (0, 1, 2))
        assert verify_solution_free(s, k_binomial_system(4)) is None
        assert oracles.naive_solution_free((0, 1, 2), (1, -3, 3, -1), 100) is None
        # a full progression is a nontrivial solution of its own system
        s = ResidueSet(100, (0, 1, 2, 3))
        w = verify_solution_free(s, k_binomial_system(4))
        expect = oracles.naive_solution_free((0, 1, 2, 3), (1, -3, 3, -1), 100)
        assert w == expect is not None

    def test_singleton_both_modes(self):
        s = ResidueSet(50, (7,))
        assert verify_solution_free(s, k_binomial_system(4)) is None
        assert verify_solution_free(s, k_binomial_system(4), "abba_only") is None

    def test_matches_naive_scan(self):
        rng = random.Random(19)
        sys4 = k_binomial_system(4)
        sys3 = k_binomial_system(3)
        for _ in range(25):
            m = rng.randint(12, 60)
            size = rng.randint(1, 7)
            s = ResidueSet(m, tuple(rng.sample(range(m), size)))
            for system in (sys3, sys4):
                got = verify_solution_free(s, system)
                expect = oracles.naive_solution_free(s.elements, system.e, m)
                assert got == expect, (s, system.e)

    def test_abba_matches_naive(self):
        rng = random.Random(21)
        sys4 = k_binomial_system(4)
        for _ in range(25):
            m = rng.randint(12, 60)
            size = rng.randint(1, 7)
            s = ResidueSet(m, tuple(rng.sample(range(m), size)))
            got = verify_solution_free(s, sys4, "abba_only")
            expect = oracles.naive_solution_free(s.elements, sys4.e, m, "abba_only")
            assert got == expect

    def test_abba_requires_negating_shape(self):
        with pytest.raises(ValueError):
            verify_solution_free(ResidueSet(40, (0, 1)), k_binomial_system(5), "abba_only")

    def test_budget(self):
        s = ResidueSet(10**6, tuple(range(500)))
        with pytest.raises(BudgetExceededError):
            verify_solution_free(s, k_binomial_system(4), budget=1000)
