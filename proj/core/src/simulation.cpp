#include "sandwich/simulation.hpp"

#include "exception_slot.hpp"
#include "sandwich/error.hpp"
#include "sandwich/fda.hpp"
#include "sandwich/rng.hpp"

#include <boost/math/differentiation/autodiff.hpp>

#include <cmath>
#include <numbers>
#include <numeric>

namespace sandwich {

namespace {

template <class T>
T f1(const T& x, const T& z) {
    using std::cos;
    using std::sin;
    constexpr double pi = std::numbers::pi;
    const T t = x - 0.5;
    return sin(2.0 * pi * t * t * t) * cos(4.0 * pi * z);
}

template <class T>
T f2(const T& x, const T& z) {
    using std::exp;
    constexpr double pi = std::numbers::pi;
    constexpr double sx2 = kF2SigmaX * kF2SigmaX;
    constexpr double sz2 = kF2SigmaZ * kF2SigmaZ;
    constexpr double norm = 1.0 / (pi * kF2SigmaX * kF2SigmaZ);
    const T a = x - 0.2, b = z - 0.3, c = x - 0.7, d = z - 0.8;
    return 0.75 * norm * exp(-(a * a) / sx2 - (b * b) / sz2) + 0.45 * norm * exp(-(c * c) / sx2 - (d * d) / sz2);
}

template <class T>
T eval(TestFunction f, const T& x, const T& z) {
    return f == TestFunction::F1 ? f1(x, z) : f2(x, z);
}

} // namespace

TestFunction parse_test_function(const std::string& id) {
    if (id == "f1") return TestFunction::F1;
    if (id == "f2") return TestFunction::F2;
    throw DomainError("unknown test function '" + id + "' (expected f1 or f2)");
}

std::string to_string(TestFunction f) { return f == TestFunction::F1 ? "f1" : "f2"; }

double test_function(TestFunction f, double x, double z) { return eval(f, x, z); }

FourthDerivatives test_function_d4(TestFunction f, double x, double z) {
    using boost::math::differentiation::make_fvar;
    const auto vx = make_fvar<double, 4>(x);
    const auto vz = make_fvar<double, 4>(z);
    FourthDerivatives out;
    out.dx = eval(f, vx, decltype(vx)(z)).derivative(4);
    out.dz = eval(f, decltype(vz)(x), vz).derivative(4);
    return out;
}

Eigen::MatrixXd test_surface(TestFunction f, std::size_t n1, std::size_t n2) {
    const auto x = midpoints(n1);
    const auto z = midpoints(n2);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n1), static_cast<Eigen::Index>(n2));
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = test_function(f, x[i], z[j]);
    return out;
}

Eigen::MatrixXd noisy_surface(const Eigen::MatrixXd& truth, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw DomainError("noise level must be nonnegative");
    CounterRng rng(seed);
    Eigen::MatrixXd y = truth;
    for (Eigen::Index i = 0; i < y.rows(); ++i)
        for (Eigen::Index j = 0; j < y.cols(); ++j) y(i, j) += sigma * rng.normal();
    return y;
}

void summarize(StudyResult& r) {
    const double n = static_cast<double>(r.ise.size());
    r.mean = n > 0 ? std::accumulate(r.ise.begin(), r.ise.end(), 0.0) / n : 0.0;
    double ss = 0.0;
    for (double v : r.ise) ss += (v - r.mean) * (v - r.mean);
    r.sd = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

StudyResult run_surface_study(const SurfaceStudyConfig& config) {
    if (config.reps == 0) throw DomainError("need at least one replicate");
    config.grid.validate();
    const Eigen::MatrixXd truth = test_surface(config.function, config.n1, config.n2);
    const auto x = midpoints(config.n1);
    const auto z = midpoints(config.n2);
    const SandwichSmoother smoother(x, z, config.spec1, config.spec2);

    StudyResult out;
    out.ise.assign(config.reps, 0.0);
    out.lambda1.assign(config.reps, 0.0);
    out.lambda2.assign(config.reps, 0.0);
    const auto reps = static_cast<long>(config.reps);
    detail::ExceptionSlot slot;
#pragma omp parallel for schedule(dynamic)
    for (long r = 0; r < reps; ++r) {
        slot.run([&] {
            const auto k = static_cast<std::size_t>(r);
            const Eigen::MatrixXd y = noisy_surface(truth, config.sigma, derive_seed(config.seed, k));
            const SandwichFit fit = smoother.select(y, config.grid, config.search);
            out.ise[k] = (fit.fitted - truth).squaredNorm() / static_cast<double>(truth.size());
            out.lambda1[k] = fit.lambda1;
            out.lambda2[k] = fit.lambda2;
        });
    }
    slot.rethrow();
    summarize(out);
    return out;
}

StudyResult run_cov_study(const CovStudyConfig& config) {
    if (config.reps == 0) throw DomainError("need at least one replicate");
    const auto t = midpoints(config.j);
    const Eigen::MatrixXd truth = true_covariance(config.fda_case, t);
    const AxisSpec spec = default_cov_spec(config.j);
    CovSmoothOptions options;
    options.exclude_diagonal = config.exclude_diagonal;

    StudyResult out;
    out.ise.assign(config.reps, 0.0);
    out.lambda1.assign(config.reps, 0.0);
    out.lambda2.assign(config.reps, 0.0);
    const auto reps = static_cast<long>(config.reps);
    detail::ExceptionSlot slot;
#pragma omp parallel for schedule(dynamic)
    for (long r = 0; r < reps; ++r) {
        slot.run([&] {
            const auto k = static_cast<std::size_t>(r);
            const CurveSet curves =
                simulate_fda(config.fda_case, config.n, config.j, config.sigma, derive_seed(config.seed, k));
            const CovModel model = smooth_cov(sample_cov(curves, config.center), spec, config.lambdas, options, t);
            out.ise[k] = covariance_ise(model.smoothed_cov, truth);
            out.lambda1[k] = model.lambda;
        });
    }
    slot.rethrow();
    summarize(out);
    return out;
}

} // namespace sandwich
