#include "sandwich/error.hpp"
#include "sandwich/sandwich2d.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace sandwich;
using sandwich::testing::kron;
using sandwich::testing::max_abs;
using sandwich::testing::random_matrix;
using sandwich::testing::rel_diff;
using sandwich::testing::vec;

namespace {

Eigen::MatrixXd dense_smoother(const std::vector<double>& x, const AxisSpec& spec, double lambda) {
    const Eigen::MatrixXd b = design_matrix(x, spec);
    const Eigen::MatrixXd d = diff_matrix(spec.size(), spec.penalty_order);
    return b * (b.transpose() * b + lambda * d.transpose() * d).ldlt().solve(b.transpose());
}

} // namespace

TEST_CASE("grid fit equals the Kronecker smoother applied to vec(Y)") {
    CounterRng rng(2024);
    for (int rep = 0; rep < 8; ++rep) {
        const std::size_t n1 = 9 + rep % 4, n2 = 8 + rep % 5;
        const AxisSpec s1{2, 2, 4 + rep % 3}, s2{3, 1, 3 + rep % 2};
        const double l1 = std::pow(10.0, -3.0 + 6.0 * rng.uniform());
        const double l2 = std::pow(10.0, -3.0 + 6.0 * rng.uniform());
        const auto x = midpoints(n1), z = midpoints(n2);
        const Eigen::MatrixXd y = random_matrix(static_cast<Eigen::Index>(n1), static_cast<Eigen::Index>(n2), rep);

        const SandwichSmoother sm(x, z, s1, s2);
        const SandwichFit fit = sm.fit(y, l1, l2);
        const Eigen::MatrixXd S1 = dense_smoother(x, s1, l1), S2 = dense_smoother(z, s2, l2);
        const Eigen::MatrixXd big = kron(S2, S1);
        const Eigen::VectorXd ref = big * vec(y);
        CHECK((vec(fit.fitted) - ref).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(rel_diff(fit.edf, big.trace()) < 1e-10);
        const double sse_ref = (ref - vec(y)).squaredNorm();
        CHECK(rel_diff(sse_fast(sm.transform(y), sm.axis1().s, sm.axis2().s, l1, l2), sse_ref) < 1e-8);
        CHECK(rel_diff(fit.sse, sse_ref) < 1e-9);
    }
}

TEST_CASE("three-term residual decomposition matches dense terms") {
    const auto x = midpoints(12), z = midpoints(10);
    const AxisSpec s1{3, 2, 5}, s2{3, 2, 4};
    const SandwichSmoother sm(x, z, s1, s2);
    const Eigen::MatrixXd y = random_matrix(12, 10, 77);
    const SseTerms t = sse_terms(sm.transform(y), sm.axis1().s, sm.axis2().s, 0.3, 12.0);
    const Eigen::VectorXd yhat = kron(dense_smoother(z, s2, 12.0), dense_smoother(x, s1, 0.3)) * vec(y);
    CHECK(rel_diff(t.fitted_sq, yhat.squaredNorm()) < 1e-10);
    CHECK(rel_diff(t.cross, yhat.dot(vec(y))) < 1e-10);
    CHECK(rel_diff(t.yty, y.squaredNorm()) < 1e-14);
}

TEST_CASE("gcv surface entries agree with direct evaluation") {
    const auto x = midpoints(15), z = midpoints(13);
    const SandwichSmoother sm(x, z, AxisSpec{3, 2, 6}, AxisSpec{3, 2, 5});
    const Eigen::MatrixXd y = random_matrix(15, 13, 3);
    const auto grid = LambdaGrid::log_uniform(5, -2, 3);
    const GcvSurface g = sm.gcv_surface(sm.transform(y), grid.axis1, grid.axis2);
    const double n = 15.0 * 13.0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            const SandwichFit f = sm.fit(y, grid.axis1[i], grid.axis2[j]);
            CHECK(rel_diff(g.sse(i, j), f.sse) < 1e-8);
            CHECK(g.edf(i, j) == doctest::Approx(f.edf).epsilon(1e-12));
            const double gcv = (f.sse / n) / std::pow(1.0 - f.edf / n, 2);
            CHECK(rel_diff(g.gcv(i, j), gcv) < 1e-8);
        }
}

TEST_CASE("selected lambdas minimise gcv over the grid") {
    const auto x = midpoints(20), z = midpoints(30);
    Eigen::MatrixXd y(20, 30);
    CounterRng rng(9);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 30; ++j) y(i, j) = std::sin(6 * x[i]) * std::cos(3 * z[j]) + 0.2 * rng.normal();
    const SandwichFit fit = select_lambda(GridData{y, x, z}, AxisSpec{3, 2, 10}, AxisSpec{3, 2, 15});
    CHECK(fit.gcv_value == doctest::Approx(fit.gcv_surface.gcv.minCoeff()));
    CHECK(fit.edf > 4.0);
    CHECK(fit.edf < 20.0 * 30.0);
}

TEST_CASE("fine pass never worsens the criterion") {
    const auto x = midpoints(20), z = midpoints(20);
    Eigen::MatrixXd y(20, 20);
    CounterRng rng(4);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) y(i, j) = x[i] * z[j] + std::sin(5 * z[j]) + 0.1 * rng.normal();
    const GridData data{y, x, z};
    const SandwichFit coarse = select_lambda(data, AxisSpec{3, 2, 10}, AxisSpec{3, 2, 10});
    SearchOptions opt;
    opt.fine = FinePass{15, 0.0};
    const SandwichFit fine = select_lambda(data, AxisSpec{3, 2, 10}, AxisSpec{3, 2, 10}, LambdaGrid::log_uniform(), opt);
    REQUIRE(fine.fine_surface.has_value());
    CHECK(fine.gcv_value <= coarse.gcv_value);
}

TEST_CASE("ties in gcv go to the smoother fit") {
    GcvSurface s;
    s.lambda1 = {1, 2, 3};
    s.lambda2 = {1, 2};
    s.gcv = Eigen::MatrixXd::Constant(3, 2, 5.0);
    const GridIndex g = argmin_gcv(s);
    CHECK(g.i == 2);
    CHECK(g.j == 1);
    s.gcv(0, 0) = 4.0;
    CHECK(argmin_gcv(s).i == 0);
    s.gcv.setConstant(std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(argmin_gcv(s), DegenerateFitError);
}

TEST_CASE("huge penalties recover the bilinear least-squares fit") {
    const auto x = midpoints(14), z = midpoints(11);
    const Eigen::MatrixXd y = random_matrix(14, 11, 8);
    const SandwichSmoother sm(x, z, AxisSpec{3, 2, 6}, AxisSpec{3, 2, 5});
    const SandwichFit fit = sm.fit(y, 1e12, 1e12);
    Eigen::MatrixXd design(14 * 11, 4);
    for (int j = 0; j < 11; ++j)
        for (int i = 0; i < 14; ++i) design.row(j * 14 + i) << 1.0, x[i], z[j], x[i] * z[j];
    const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(vec(y));
    const Eigen::VectorXd ref = design * beta;
    CHECK((vec(fit.fitted) - ref).cwiseAbs().maxCoeff() < 1e-4 * (y.maxCoeff() - y.minCoeff()));
    CHECK(fit.edf == doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("coefficients reproduce the fitted surface through basis evaluation") {
    const auto x = midpoints(12), z = midpoints(9);
    const Eigen::MatrixXd y = random_matrix(12, 9, 21);
    const AxisSpec s1{3, 2, 5}, s2{2, 2, 4};
    const SandwichSmoother sm(x, z, s1, s2);
    const SandwichFit fit = sm.fit(y, 0.5, 2.0);
    const Eigen::MatrixXd b1 = design_matrix(x, s1), b2 = design_matrix(z, s2);
    CHECK(max_abs(b1 * fit.theta * b2.transpose() - fit.fitted) < 1e-11);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 9; ++j) CHECK(predict(fit, x[i], z[j]) == doctest::Approx(fit.fitted(i, j)).epsilon(1e-10));
    CHECK(max_abs(solve_coefficients(y, sm.axis1(), sm.axis2(), 0.5, 2.0) - fit.theta) < 1e-12);
}

TEST_CASE("coefficients solve the penalized normal equations") {
    const auto x = midpoints(13), z = midpoints(10);
    const Eigen::MatrixXd y = random_matrix(13, 10, 31);
    const AxisSpec s1{3, 2, 5}, s2{3, 2, 4};
    const SandwichSmoother sm(x, z, s1, s2);
    const double l1 = 0.8, l2 = 3.0;
    const Eigen::MatrixXd theta = solve_coefficients(y, sm.axis1(), sm.axis2(), l1, l2);
    const Eigen::MatrixXd b1 = design_matrix(x, s1), b2 = design_matrix(z, s2);
    const Eigen::MatrixXd d1 = diff_matrix(s1.size(), 2), d2 = diff_matrix(s2.size(), 2);
    const Eigen::MatrixXd L1 = b1.transpose() * b1 + l1 * d1.transpose() * d1;
    const Eigen::MatrixXd L2 = b2.transpose() * b2 + l2 * d2.transpose() * d2;
    CHECK(max_abs(L1 * theta * L2 - b1.transpose() * y * b2) < 1e-9);
}

TEST_CASE("constant surfaces are reproduced for any lambda") {
    const auto x = midpoints(10), z = midpoints(12);
    const SandwichSmoother sm(x, z, AxisSpec{3, 2, 5}, AxisSpec{3, 2, 6});
    const Eigen::MatrixXd y = Eigen::MatrixXd::Constant(10, 12, 2.5);
    for (double l : {1e-4, 1.0, 1e6}) CHECK(max_abs(sm.fit(y, l, l).fitted - y) < 1e-10);
}

TEST_CASE("input validation") {
    const auto x = midpoints(5);
    GridData bad{Eigen::MatrixXd::Zero(5, 4), x, midpoints(5)};
    CHECK_THROWS_AS(bad.validate(), DimensionError);
    GridData unsorted{Eigen::MatrixXd::Zero(3, 3), {0.1, 0.5, 0.3}, {0.1, 0.2, 0.3}};
    CHECK_THROWS_AS(unsorted.validate(), DomainError);
    LambdaGrid g{{1.0, -1.0}, {1.0}};
    CHECK_THROWS_AS(g.validate(), DomainError);
    CHECK_THROWS_AS(gcv_score(1.0, 10.0, 10.0), DegenerateFitError);
    SseTerms t{0.0, 10.0, 1.0};
    CHECK_THROWS_AS(t.sse(), ConsistencyError);
    SseTerms r{1.0, 1.0 + 1e-12, 1.0};
    CHECK(r.sse() == 0.0);
}

TEST_CASE("interpolating smoothers make gcv undefined everywhere") {
    // c = n on both axes with lambda tiny: edf is n, so every grid point is degenerate.
    const auto x = midpoints(6);
    const SandwichSmoother sm(x, x, AxisSpec{1, 1, 5}, AxisSpec{1, 1, 5});
    const double l[] = {0.0};
    const GcvSurface g = sm.gcv_surface(sm.transform(random_matrix(6, 6, 1)), l, l);
    CHECK(std::isinf(g.gcv(0, 0)));
    CHECK_THROWS_AS(sm.select(random_matrix(6, 6, 1), LambdaGrid{{0.0}, {0.0}}), DomainError);
}
