import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from treepath import dp, exact, oracle
from treepath.model import ModelParams, ValidationError, path_count, tree_size

BASE_GRID = [
    (N, n, p) for N in (2, 3) for n in (1, 2, 3) for p in (0.3, 0.5, 0.7)
]


class TestExpectedTheta:
    def test_single_root(self):
        assert exact.expected_theta(ModelParams(2, 0, 0.7)) == pytest.approx(0.7, abs=1e-15)

    def test_against_assignment_enumeration(self):
        # oracle first: the brute-force law of the count fixes the mean
        for N, n, p in [(2, 1, 0.5), (2, 2, 0.5), (3, 2, 0.3)]:
            law = oracle.theta_pmf_bruteforce(ModelParams(N, n, p))
            assert exact.expected_theta(ModelParams(N, n, p)) == pytest.approx(law.mean(), abs=1e-12)

    def test_log_space_survives_huge_depth(self):
        val = exact.expected_theta(ModelParams(2, 3000, 0.4))
        assert val == pytest.approx(0.0, abs=1e-100)
        assert exact.expected_theta(ModelParams(2, 3000, 0.9)) == math.inf


class TestThetaMoments:
    def test_critical_binary_depth_one(self):
        rep = exact.theta_moments(ModelParams(2, 1, 0.5))
        assert rep.second_moment == pytest.approx(0.75, abs=1e-15)
        assert rep.lower_bound == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert rep.s_correction is None

    def test_generic_branch_depth_one(self):
        rep = exact.theta_moments(ModelParams(2, 1, 0.25))
        assert rep.second_moment == pytest.approx(0.15625, abs=1e-15)

    def test_critical_depth_five(self):
        rep = exact.theta_moments(ModelParams(2, 5, 0.5))
        assert rep.second_moment == pytest.approx(1.75, abs=1e-15)
        law = dp.theta_pmf(ModelParams(2, 5, 0.5))
        assert rep.second_moment == pytest.approx(law.moment(2), abs=1e-9)

    @pytest.mark.parametrize("N,n,p", BASE_GRID)
    def test_moment_consistency_with_dp(self, N, n, p):
        rep = exact.theta_moments(ModelParams(N, n, p))
        law = dp.theta_pmf(ModelParams(N, n, p))
        assert rep.first_moment == pytest.approx(law.mean(), abs=1e-9)
        assert rep.second_moment == pytest.approx(law.moment(2), abs=1e-9)
        assert rep.second_moment >= rep.first_moment**2 - 1e-12
        assert 0.0 <= rep.lower_bound <= 1.0

    def test_second_moment_against_enumeration(self):
        law = oracle.theta_pmf_bruteforce(ModelParams(2, 1, 0.25))
        assert exact.theta_moments(ModelParams(2, 1, 0.25)).second_moment == pytest.approx(
            law.moment(2), abs=1e-12
        )


class TestExtinction:
    def test_first_two_recursion_values(self):
        curve = exact.extinction_curve(ModelParams(2, 2, 0.5), 2)
        assert curve.q_values[0] == pytest.approx(0.625, abs=1e-15)
        assert curve.q_values[1] == pytest.approx(0.6953125, abs=1e-15)

    def test_q2_matches_enumeration(self):
        law = oracle.theta_pmf_bruteforce(ModelParams(2, 2, 0.5))
        assert law.mass(0) == pytest.approx(0.6953125, abs=1e-12)

    def test_supercritical_binary_fixed_point(self):
        curve = exact.extinction_curve(ModelParams(2, 5, 0.75), 5)
        assert curve.limit_q == pytest.approx(1.0 / 3.0, abs=1e-12)
        assert curve.survival == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_monotone_and_in_unit_interval(self):
        for N, n, p in BASE_GRID:
            qs = exact.extinction_curve(ModelParams(N, n, p), 40).q_values
            assert all(0.0 < q <= 1.0 for q in qs)
            assert all(b >= a - 1e-15 for a, b in zip(qs, qs[1:]))

    def test_limit_satisfies_fixed_point_equation(self):
        for N, p in [(2, 0.6), (3, 0.5), (5, 0.9)]:
            q = exact.extinction_curve(ModelParams(N, 1, p), 1).limit_q
            assert p * q**N - q + 1.0 - p == pytest.approx(0.0, abs=1e-12)


class TestSurvivalLimit:
    def test_at_and_below_criticality(self):
        assert exact.survival_limit(2, 0.5) == 0.0
        assert exact.survival_limit(2, 0.3) == 0.0

    def test_supercritical_binary(self):
        assert exact.survival_limit(2, 0.75) == pytest.approx(2.0 / 3.0, abs=1e-9)

    def test_ternary_root_of_cubic(self):
        # 0.9 q^3 - q + 0.1 factors as (q - 1)(0.9 q^2 + 0.9 q - 0.1); the
        # relevant root is (sqrt(117) - 9) / 18
        expected_q = (math.sqrt(117.0) - 9.0) / 18.0
        assert exact.survival_limit(3, 0.9) == pytest.approx(1.0 - expected_q, abs=1e-10)
        assert exact.survival_limit(3, 0.9) >= (3 * 0.9 - 1) / 2

    def test_lower_bound_on_grid(self):
        for N in (2, 3, 5):
            for p in (0.6, 0.75, 0.9):
                assert exact.survival_limit(N, p) >= (N * p - 1) / (N - 1) - 1e-12

    def test_rejects_unary(self):
        with pytest.raises(ValidationError):
            exact.survival_limit(1, 0.5)


class TestPathAndOverlapCounts:
    def test_path_count_examples(self):
        assert path_count(2, 2, 1) == 6
        assert path_count(2, 3, 2) == 12
        for N, n in [(2, 4), (3, 3)]:
            assert path_count(N, n, n) == N**n

    def test_path_count_bigint(self):
        assert path_count(3, 200, 100) == (3**201 - 3**100) // 2

    def test_overlap_examples(self):
        report = exact.overlap_counts(ModelParams(2, 1, 0.5), 1)
        assert report.overlap_counts == (2, 2)
        assert report.path_total == 2
        report = exact.overlap_counts(ModelParams(2, 2, 0.5), 1)
        assert report.overlap_counts == (14, 6)

    @pytest.mark.parametrize("N", [2, 3])
    def test_equals_pair_enumeration_everywhere(self, N):
        for n in range(1, 5):
            for k in range(0, n + 1):
                params = ModelParams(N, n, 0.5)
                report = exact.overlap_counts(params, k)
                assert report.overlap_counts == oracle.enumerate_overlap_pairs(params, k)
                assert report.overlap_counts[-1] == report.path_total

    @pytest.mark.parametrize("N", [2, 3])
    def test_pair_count_bound(self, N):
        for n in range(1, 5):
            for k in range(0, n + 1):
                report = exact.overlap_counts(ModelParams(N, n, 0.5), k)
                for m in range(1, k + 2):
                    assert report.overlap_counts[m - 1] <= 2 * report.path_total * N ** (k - m + 1)

    def test_single_expression_form_valid_when_deep(self):
        # the one-line expression matches the exact profile sum once n >= 2k-1
        # and is wrong below (e.g. -8 at N=2, n=2, k=2, m=1)
        for N in (2, 3):
            for k in range(1, 5):
                for n in range(2 * k - 1, 3 * k + 3):
                    report = exact.overlap_counts(ModelParams(N, n, 0.5), k)
                    for m in range(1, k + 1):
                        assert exact.overlap_count_asymptotic(N, n, k, m) == report.overlap_counts[m - 1]
        assert exact.overlap_count_asymptotic(2, 2, 2, 1) == -8  # demonstrably not a count


class TestVarianceBound:
    def test_branch_formulas(self):
        params = ModelParams(2, 4, 0.25)
        mean = exact.expected_open_count(params, 2)
        assert exact.open_count_variance_bound(params, 2) == pytest.approx(4.0 * mean, rel=1e-12)
        params = ModelParams(2, 4, 0.5)
        mean = exact.expected_open_count(params, 2)
        assert exact.open_count_variance_bound(params, 2) == pytest.approx(2.0 * 3 * mean, rel=1e-12)

    def test_dominates_exact_variance(self):
        for N, max_n in ((2, 3), (3, 2)):
            for n in range(1, max_n + 1):
                for k in range(0, n + 1):
                    for p in (0.25, 0.5, 0.75):
                        params = ModelParams(N, n, p)
                        assert oracle.open_count_variance_bruteforce(params, k) <= exact.open_count_variance_bound(
                            params, k
                        ) + 1e-9

    def test_variance_from_enumerated_overlaps(self):
        # second, equality-grade route: Var = sum_m a_m (p^(2k+2-m) - p^(2k+2))
        for N, n, k, p in [(2, 2, 1, 0.5), (2, 3, 2, 0.25), (3, 2, 1, 0.7)]:
            params = ModelParams(N, n, p)
            counts = oracle.enumerate_overlap_pairs(params, k)
            expected = sum(
                a * (p ** (2 * k + 2 - m) - p ** (2 * k + 2)) for m, a in enumerate(counts, start=1)
            )
            assert oracle.open_count_variance_bruteforce(params, k) == pytest.approx(expected, abs=1e-10)


class TestLlnLimit:
    def test_examples(self):
        assert exact.lln_limit(2, 0.25) == pytest.approx(0.5, abs=1e-15)
        assert exact.lln_limit(2, 0.5) == 1.0
        assert exact.lln_limit(2, 0.2) == pytest.approx(-math.log(2) / math.log(0.2), abs=1e-15)
        assert exact.lln_limit(2, 0.2) == pytest.approx(0.43068, abs=5e-6)

    def test_boundary_is_supercritical_case(self):
        assert exact.lln_limit(3, 1 / 3) == 1.0


class TestGrowthRateIdentity:
    @pytest.mark.parametrize("N,p", [(2, 0.2), (2, 0.3), (3, 0.25)])
    def test_log_mean_count_rate(self, N, p):
        # log E(T_{n,k_n}) = k_n log p + n log N + O(1) along k_n near the
        # LLN slope; the O(1) never exceeds ln(N/(N-1)) + 1 on this grid
        slope = exact.lln_limit(N, p) + 0.05
        for n in (50, 200, 1000):
            k_n = int(slope * n)
            log_mean = math.log(exact.expected_open_count(ModelParams(N, n, p), k_n))
            gap = log_mean - (k_n * math.log(p) + n * math.log(N))
            assert abs(gap) <= math.log(N / (N - 1)) + 1.0


class TestIncreasingCount:
    def test_mean_is_three_at_2_2_1(self):
        assert exact.expected_increasing_count(ModelParams(2, 2), 1) == pytest.approx(3.0, abs=1e-12)
        assert exact.expected_increasing_count(ModelParams(2, 2), 1, as_fraction=True) == Fraction(3)

    def test_length_zero_counts_vertices(self):
        for N, n in [(2, 4), (3, 3), (5, 2)]:
            assert exact.expected_increasing_count(ModelParams(N, n), 0) == pytest.approx(
                tree_size(N, n), rel=1e-12
            )

    def test_fraction_value_at_2_16_8(self):
        frac = exact.expected_increasing_count(ModelParams(2, 16), 8, as_fraction=True)
        assert frac == Fraction(2**17 - 2**8, math.factorial(9))
        assert float(frac) == pytest.approx(0.36049382716049383, abs=1e-15)
        assert exact.expected_increasing_count(ModelParams(2, 16), 8) == pytest.approx(
            float(frac), rel=1e-12
        )


class TestWindowCenter:
    def test_defining_equation_residual_grid(self):
        for N in (2, 3):
            for n in (4, 16, 100, 10**4, 10**6):
                b, f, frac = exact.solve_window_center(N, n)
                assert abs(b * math.exp(b) - n * math.log(N) / math.e) < 1e-9
                assert f == pytest.approx(n * math.log(N) / b - 0.5, rel=1e-15)
                assert 0.0 <= frac < 1.0

    def test_against_scipy_lambertw(self):
        scipy_special = pytest.importorskip("scipy.special")
        for N, n in [(2, 16), (3, 777), (2, 10**5)]:
            b, _, _ = exact.solve_window_center(N, n)
            ref = float(scipy_special.lambertw(n * math.log(N) / math.e).real)
            assert b == pytest.approx(ref, rel=1e-12)

    def test_known_point(self):
        b, f, _ = exact.solve_window_center(2, 16)
        assert b == pytest.approx(1.213, abs=5e-4)
        assert f == pytest.approx(8.643, abs=5e-4)
        assert math.floor(f) == 8

    @given(st.integers(min_value=2, max_value=400))
    def test_monotone_in_depth(self, n):
        b1, f1, _ = exact.solve_window_center(2, n)
        b2, f2, _ = exact.solve_window_center(2, n + 1)
        assert b2 > b1
        assert f2 > f1


class TestGammaRatio:
    def test_positive_offset_decreases_to_zero(self):
        values = [exact.gamma_ratio(2, n, 0.5)[0] for n in (10**2, 10**3, 10**4, 10**5)]
        assert all(b < a for a, b in zip(values, values[1:]))
        assert values[-1] < 0.005

    def test_negative_offset_increases_like_sqrt_f(self):
        values = []
        for n in (10**2, 10**3, 10**4, 10**5):
            ratio, stirling = exact.gamma_ratio(2, n, -0.5)
            _, f, _ = exact.solve_window_center(2, n)
            assert stirling == pytest.approx(math.sqrt(f - 0.5) / math.sqrt(2 * math.pi), rel=1e-12)
            values.append(ratio)
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_zero_offset_limit(self):
        ratio, stirling = exact.gamma_ratio(2, 10**6, 0.0)
        target = 1.0 / math.sqrt(2.0 * math.pi)
        assert stirling == pytest.approx(target, rel=1e-15)
        assert ratio == pytest.approx(target, rel=0.05)

    def test_domain_violation(self):
        with pytest.raises(ValidationError):
            exact.gamma_ratio(2, 4, -100.0)


class TestPoissonTvBound:
    def test_value_at_2_10(self):
        q, bound = exact.poisson_tv_bound(2, 10)
        assert q == pytest.approx(16.0 / 23.0, rel=1e-15)
        assert bound == pytest.approx(12 * 2**10 / math.factorial(11) + 8.0 / (12 * (1 - 16 / 23)), rel=1e-12)
        assert bound > 1.0  # vacuous at this scale, reported as-is

    def test_undefined_when_q_at_least_one(self):
        with pytest.raises(ValidationError, match="undefined"):
            exact.poisson_tv_bound(2, 6)

    def test_vanishes_for_long_paths(self):
        # the factorial term dies fast but 4N/((k+2)(1-q)) only decays like
        # 1/k, so the bound reaches zero slowly
        values = [exact.poisson_tv_bound(2, k)[1] for k in (20, 40, 80, 160, 10**6)]
        assert all(b < a for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-5


class TestWindowPrediction:
    def test_window_at_2_16(self):
        pred = exact.increasing_window_prediction(2, 16)
        assert pred.window == (7, 8, 9)
        lam = {
            7: Fraction(2**17 - 2**7, math.factorial(8)),
            8: Fraction(2**17 - 2**8, math.factorial(9)),
            9: Fraction(2**17 - 2**9, math.factorial(10)),
            10: Fraction(2**17 - 2**10, math.factorial(11)),
        }
        for k, frac in lam.items():
            assert pred.lambdas[k] == pytest.approx(float(frac), rel=1e-12)
        assert pred.window_mass == pytest.approx(
            math.exp(-float(lam[10])) - math.exp(-float(lam[7])), rel=1e-12
        )
        assert pred.window_mass == pytest.approx(0.9578806874898592, abs=1e-12)
        expected_points = {
            k: math.exp(-float(lam[k + 1])) - math.exp(-float(lam[k])) for k in (7, 8, 9)
        }
        for k, val in expected_points.items():
            assert pred.point_masses[k] == pytest.approx(val, rel=1e-12)
        assert pred.point_masses[7] == pytest.approx(0.658, abs=5e-4)
        assert pred.point_masses[8] == pytest.approx(0.267, abs=5e-4)
        assert pred.point_masses[9] == pytest.approx(0.032, abs=5e-4)

    def test_lambdas_strictly_decreasing(self):
        for N, n in [(2, 16), (3, 12), (2, 40)]:
            pred = exact.increasing_window_prediction(N, n)
            ks = sorted(pred.lambdas)
            vals = [pred.lambdas[k] for k in ks]
            assert all(b < a or (a == b == 0.0) for a, b in zip(vals, vals[1:]))

    def test_window_mass_in_unit_interval(self):
        for N, n in [(2, 8), (2, 16), (3, 10), (2, 64)]:
            pred = exact.increasing_window_prediction(N, n)
            assert 0.0 <= pred.window_mass <= 1.0

    def test_envelope_pmf_is_proper(self):
        law = exact.increasing_envelope_pmf(2, 16)
        assert law.support[0] == 0 and law.support[-1] == 16
        assert sum(law.probs) == pytest.approx(1.0, abs=1e-12)
        window = sum(law.mass(k) for k in (7, 8, 9))
        assert window == pytest.approx(exact.increasing_window_prediction(2, 16).window_mass, rel=1e-12)


class TestTwoPointMass:
    def test_value_at_a_zero(self):
        expected = math.exp(-2.0 / math.sqrt(2.0 * math.pi))
        assert exact.two_point_mass(2, 0.0, "low") == pytest.approx(expected, rel=1e-15)
        assert expected == pytest.approx(0.45028049832185046, abs=1e-15)

    def test_infinite_parameter(self):
        assert exact.two_point_mass(2, math.inf, "low") == 0.0
        assert exact.two_point_mass(2, math.inf, "high") == 1.0

    def test_two_point_structure_sums_to_one(self):
        mass = exact.two_point_mass(2, 0.0, "low")
        assert mass + (1.0 - mass) == 1.0
        assert exact.two_point_mass(2, 0.0, "high") == pytest.approx(mass, rel=1e-15)

    def test_rejects_negative_parameter(self):
        with pytest.raises(ValidationError):
            exact.two_point_mass(2, -1.0, "low")


class TestPairIncreasingFormula:
    def test_value_at_1_0_0(self):
        assert exact.pair_increasing_formula(1, 0, 0) == pytest.approx(0.25, abs=1e-14)

    def test_disjoint_baseline_is_squared_single_path(self):
        # two vertex-disjoint length-k paths are independent
        left = [(1, 0), (2, 0), (3, 0)]
        right = [(1, 2), (2, 6), (3, 18)]
        assert oracle.pair_increasing_bruteforce(left, right) == Fraction(1, 36)

    def test_formula_disagrees_with_oracle_on_shared_root(self):
        # the documented open question: 1/4 from the formula vs 1/3 exact
        oracle_value = oracle.pair_increasing_bruteforce([(0, 0), (1, 0)], [(0, 0), (1, 1)])
        assert oracle_value == Fraction(1, 3)
        assert exact.pair_increasing_formula(1, 0, 0) != pytest.approx(float(oracle_value), abs=1e-3)

    def test_shift_reconciles_formula_with_oracle(self):
        # evaluating the formula at (shared, offset+shared) instead of the
        # documented (shared-1, offset+shared-1) reproduces the exact value
        # for every realizable overlap geometry
        from treepath.verify import _overlap_pair_geometry

        for k in (1, 2, 3):
            for offset in range(0, k + 1):
                for shared in range(1, k + 2 - offset):
                    path_a, path_b = _overlap_pair_geometry(k, offset, shared)
                    target = float(oracle.pair_increasing_bruteforce(path_a, path_b))
                    shifted = exact.pair_increasing_formula(k, shared, offset + shared)
                    assert shifted == pytest.approx(target, rel=1e-12)

    def test_note_is_attached(self):
        assert "oracle" in exact.PAIR_FORMULA_NOTE
