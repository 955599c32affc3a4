#include "sandwich/error.hpp"
#include "sandwich/fda.hpp"
#include "sandwich/rng.hpp"
#include "sandwich/sandwich2d.hpp"
#include "sandwich/simulation.hpp"
#include "sandwich/spectra.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace sandwich;
using sandwich::testing::max_abs;

TEST_CASE("sample second moment of identical or opposite curves") {
    const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(5, -1.0, 2.0);
    CurveSet same{Eigen::MatrixXd(3, 5), midpoints(5)};
    for (int i = 0; i < 3; ++i) same.Y.row(i) = v.transpose();
    CHECK(max_abs(sample_cov(same) - v * v.transpose()) < 1e-14);
    CurveSet opposite{Eigen::MatrixXd(2, 5), midpoints(5)};
    opposite.Y.row(0) = v.transpose();
    opposite.Y.row(1) = -v.transpose();
    CHECK(max_abs(sample_cov(opposite) - v * v.transpose()) < 1e-14);
    CHECK(max_abs(sample_cov(opposite, true) - v * v.transpose()) < 1e-14);
    CurveSet single{Eigen::MatrixXd::Ones(1, 5), midpoints(5)};
    CHECK_THROWS_AS(sample_cov(single), DomainError);
}

TEST_CASE("large noiseless samples approach the true covariance") {
    const CurveSet c = simulate_fda(1, 1000, 20, 0.0, 99);
    CHECK(max_abs(sample_cov(c) - true_covariance(1, c.t)) < 0.15);
}

TEST_CASE("zero penalty with a square basis returns the input") {
    const std::size_t j = 20;
    const AxisSpec spec{3, 2, 17};
    REQUIRE(spec.size() == j);
    const Eigen::MatrixXd y = sandwich::testing::random_matrix(30, j, 4);
    const Eigen::MatrixXd c = y.transpose() * y / 30.0;
    const CovModel m = smooth_cov(c, spec, {0.0});
    CHECK(max_abs(m.smoothed_cov - c) < 1e-8);
}

TEST_CASE("rank-one covariance smooths to the outer product of the smoothed vector") {
    const std::size_t j = 24;
    const auto t = midpoints(j);
    Eigen::VectorXd v(j);
    for (std::size_t a = 0; a < j; ++a) v(a) = std::sin(3 * t[a]) + 0.3 * std::cos(11 * t[a]);
    const AxisSpec spec = default_cov_spec(j);
    const CovModel m = smooth_cov(v * v.transpose(), spec, LambdaGrid::log_spaced(20, -5, 4));
    const Eigen::VectorXd sv = apply_smoother(build_axis_spectrum(t, spec), m.lambda, v);
    CHECK(max_abs(m.smoothed_cov - sv * sv.transpose()) < 1e-10);
}

TEST_CASE("smoothed covariance is symmetric and matches the grid smoother") {
    const CurveSet c = simulate_fda(2, 30, 18, 0.5, 3);
    const Eigen::MatrixXd raw = sample_cov(c);
    const AxisSpec spec = default_cov_spec(18);
    const CovModel m = smooth_cov(raw, spec, LambdaGrid::log_spaced(20, -5, 4));
    CHECK(max_abs(m.smoothed_cov - m.smoothed_cov.transpose()) < 1e-10);
    const SandwichSmoother sm(c.t, c.t, spec, spec);
    const SandwichFit f = sm.fit(raw, m.lambda, m.lambda);
    CHECK(max_abs(f.fitted - m.smoothed_cov) < 1e-10);
    CHECK(m.gcv_value == doctest::Approx(f.gcv_value).epsilon(1e-10));
    for (double g : m.gcv_path) CHECK(g >= m.gcv_value);
}

TEST_CASE("asymmetric input is rejected") {
    Eigen::MatrixXd c = Eigen::MatrixXd::Identity(6, 6);
    c(0, 1) = 1e-6;
    CHECK_THROWS_AS(smooth_cov(c, default_cov_spec(6), {1.0}), DomainError);
}

TEST_CASE("diagonal exclusion replaces the diagonal by neighbour averages") {
    Eigen::MatrixXd c = Eigen::MatrixXd::Constant(8, 8, 1.0);
    c.diagonal().array() += 5.0;
    CovSmoothOptions opt;
    opt.exclude_diagonal = true;
    const CovModel m = smooth_cov(c, default_cov_spec(8), {1.0}, opt);
    CHECK(max_abs(m.smoothed_cov - Eigen::MatrixXd::Constant(8, 8, 1.0)) < 1e-10);
}

TEST_CASE("identity covariance has eigenvalues 1/J") {
    const auto pairs = eigenpairs(Eigen::MatrixXd::Identity(10, 10), 10);
    REQUIRE(pairs.size() == 10);
    for (const auto& p : pairs) CHECK(p.value == doctest::Approx(0.1));
    CHECK_THROWS_AS(eigenpairs(Eigen::MatrixXd::Identity(4, 4), 5), DomainError);
}

TEST_CASE("population covariance eigenvalues are recovered with quadrature scaling") {
    const auto t = midpoints(40);
    const auto pairs = eigenpairs(true_covariance(2, t), 4);
    for (int k = 0; k < 4; ++k) CHECK(std::abs(pairs[k].value - kFdaEigenvalues[k]) < 0.02);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            CHECK(pairs[a].function.dot(pairs[b].function) / 40.0 == doctest::Approx(a == b ? 1.0 : 0.0).scale(1.0).epsilon(1e-8));
    for (std::size_t k = 1; k < pairs.size(); ++k) CHECK(pairs[k].value <= pairs[k - 1].value);
}

TEST_CASE("eigenfunction signs follow the reference or the first coordinate") {
    const auto t = midpoints(20);
    const Eigen::MatrixXd k = true_covariance(1, t);
    const auto plain = eigenpairs(k, 2);
    for (const auto& p : plain) {
        Eigen::Index i = 0;
        while (std::abs(p.function(i)) <= 1e-12) ++i;
        CHECK(p.function(i) > 0);
    }
    Eigen::VectorXd ref(20);
    for (int a = 0; a < 20; ++a) ref(a) = -fda_eigenfunction(1, 0, t[a]);
    const auto flipped = eigenpairs(k, 1, {ref});
    CHECK(flipped[0].function.dot(ref) >= 0.0);
}

TEST_CASE("leading eigenfunction is recovered at n=100, J=20") {
    const auto t = midpoints(20);
    Eigen::VectorXd psi1(20);
    for (int a = 0; a < 20; ++a) psi1(a) = std::numbers::sqrt2 * std::sin(2 * std::numbers::pi * t[a]);
    int good = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const CurveSet c = simulate_fda(1, 100, 20, 0.5, derive_seed(42, s));
        const CovModel m = smooth_cov(sample_cov(c), default_cov_spec(20), LambdaGrid::log_spaced(20, -5, 4));
        const auto p = eigenpairs(m, 1, {psi1});
        if ((p[0].function - psi1).squaredNorm() / 20.0 < 0.5) ++good;
    }
    CHECK(good >= 90);
}

TEST_CASE("simulated curves lie in the span of the eigenfunctions when noiseless") {
    for (int cs : {1, 2}) {
        const CurveSet c = simulate_fda(cs, 1, 30, 0.0, 5);
        Eigen::MatrixXd psi(30, 4);
        for (int a = 0; a < 30; ++a)
            for (int k = 0; k < 4; ++k) psi(a, k) = fda_eigenfunction(cs, k, c.t[a]);
        const Eigen::VectorXd y = c.Y.row(0).transpose();
        const Eigen::VectorXd coef = psi.colPivHouseholderQr().solve(y);
        CHECK((psi * coef - y).norm() <= 1e-10);
    }
}

TEST_CASE("trigonometric eigenfunctions are quadrature-orthonormal") {
    const auto t = midpoints(100);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            double s = 0.0;
            for (double v : t) s += fda_eigenfunction(1, a, v) * fda_eigenfunction(1, b, v);
            CHECK(std::abs(s / 100.0 - (a == b ? 1.0 : 0.0)) < 1e-3);
        }
}

TEST_CASE("score variances are recovered by projection") {
    const std::size_t n = 10000, j = 50;
    const CurveSet c = simulate_fda(2, n, j, 0.0, 8);
    Eigen::MatrixXd psi(j, 4);
    for (std::size_t a = 0; a < j; ++a)
        for (int k = 0; k < 4; ++k) psi(a, k) = fda_eigenfunction(2, k, c.t[a]);
    // Least-squares projection recovers √λ_k ξ exactly for noiseless curves.
    const Eigen::MatrixXd scores = psi.colPivHouseholderQr().solve(c.Y.transpose());
    for (int k = 0; k < 4; ++k) {
        const double var = scores.row(k).squaredNorm() / static_cast<double>(n);
        CHECK(std::abs(var / kFdaEigenvalues[k] - 1.0) < 0.05);
    }
}

TEST_CASE("covariance study for the polynomial case stays near its reported level") {
    CovStudyConfig cfg;
    cfg.fda_case = 2;
    const StudyResult r = run_cov_study(cfg);
    CHECK(r.mean >= 0.10);
    CHECK(r.mean <= 0.35);
}

TEST_CASE("unknown simulation case") {
    CHECK_THROWS_AS(simulate_fda(3, 5, 5, 0.1, 1), DomainError);
    CHECK_THROWS_AS(fda_eigenfunction(1, 4, 0.5), DomainError);
}
