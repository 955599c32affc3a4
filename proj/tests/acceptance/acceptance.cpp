// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--known-failure N]... [--reps R]
//
// Exit status is 0 when every criterion passes or fails only as a listed known
// failure, 1 otherwise.

#include "sandwich/basis.hpp"
#include "sandwich/binning.hpp"
#include "sandwich/fda.hpp"
#include "sandwich/glam.hpp"
#include "sandwich/kernelcheck.hpp"
#include "sandwich/rng.hpp"
#include "sandwich/sandwich2d.hpp"
#include "sandwich/simulation.hpp"
#include "sandwich/spectra.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

// Allocation tracking: records the largest single request while armed.
extern "C" {
void* __libc_malloc(std::size_t);
void* __libc_calloc(std::size_t, std::size_t);
void* __libc_realloc(void*, std::size_t);
}

namespace {
std::atomic<bool> g_tracking{false};
std::atomic<std::size_t> g_largest{0};

inline void note(std::size_t n) {
    if (!g_tracking.load(std::memory_order_relaxed)) return;
    std::size_t cur = g_largest.load(std::memory_order_relaxed);
    while (n > cur && !g_largest.compare_exchange_weak(cur, n, std::memory_order_relaxed)) {
    }
}
} // namespace

extern "C" {
void* malloc(std::size_t n) noexcept {
    note(n);
    return __libc_malloc(n);
}
void* calloc(std::size_t count, std::size_t size) noexcept {
    note(count * size);
    return __libc_calloc(count, size);
}
void* realloc(void* p, std::size_t n) noexcept {
    note(n);
    return __libc_realloc(p, n);
}
}

using namespace sandwich;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    // For a listed known failure: whether the parts outside the documented gap still hold.
    bool remainder_ok = true;
};

struct Criterion {
    int id;
    std::string name;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Eigen::MatrixXd dense_smoother(std::span<const double> x, const AxisSpec& spec, double lambda) {
    const Eigen::MatrixXd b = design_matrix(x, spec);
    const Eigen::MatrixXd d = diff_matrix(static_cast<std::size_t>(b.cols()), spec.penalty_order);
    const Eigen::MatrixXd g = b.transpose() * b + lambda * d.transpose() * d;
    return b * g.ldlt().solve(b.transpose());
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Eigen::VectorXd vec(const Eigen::MatrixXd& m) { return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()); }

struct Instance {
    std::vector<double> x, z;
    AxisSpec s1, s2;
    double l1, l2;
    Eigen::MatrixXd y;
};

// Seeded small problems: n ≤ 15 per axis, c ≤ 8 per axis, log-uniform λ in [1e-4, 1e4].
std::vector<Instance> small_instances(std::size_t count) {
    std::vector<Instance> out;
    for (std::size_t k = 0; k < count; ++k) {
        CounterRng rng(derive_seed(2024, k));
        Instance in;
        const auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng.uniform() * (hi - lo + 1)); };
        in.s1 = AxisSpec{pick(1, 3), pick(1, 2), 0};
        in.s2 = AxisSpec{pick(1, 3), pick(1, 2), 0};
        in.s1.segments = pick(2, 8 - in.s1.degree);
        in.s2.segments = pick(2, 8 - in.s2.degree);
        const auto n1 = static_cast<std::size_t>(pick(static_cast<int>(in.s1.size()) + 1, 15));
        const auto n2 = static_cast<std::size_t>(pick(static_cast<int>(in.s2.size()) + 1, 15));
        in.x = midpoints(n1);
        in.z = midpoints(n2);
        in.l1 = std::pow(10.0, -4.0 + 8.0 * rng.uniform());
        in.l2 = std::pow(10.0, -4.0 + 8.0 * rng.uniform());
        in.y.resize(static_cast<Eigen::Index>(n1), static_cast<Eigen::Index>(n2));
        for (Eigen::Index i = 0; i < in.y.rows(); ++i)
            for (Eigen::Index j = 0; j < in.y.cols(); ++j) in.y(i, j) = rng.normal();
        out.push_back(std::move(in));
    }
    return out;
}

Outcome kronecker_oracle() {
    const auto t0 = Clock::now();
    double fit_err = 0.0, sse_rel = 0.0, tr_rel = 0.0;
    for (const Instance& in : small_instances(25)) {
        const SandwichSmoother sm(in.x, in.z, in.s1, in.s2);
        const TransformedData t = sm.transform(in.y);
        const Eigen::MatrixXd fitted = sm.fitted(t, in.l1, in.l2);
        const Eigen::MatrixXd big =
            kron(dense_smoother(in.z, in.s2, in.l2), dense_smoother(in.x, in.s1, in.l1));
        const Eigen::VectorXd ref = big * vec(in.y);
        fit_err = std::max(fit_err, (vec(fitted) - ref).cwiseAbs().maxCoeff());
        const double sse = sse_fast(t, sm.axis1().s, sm.axis2().s, in.l1, in.l2);
        sse_rel = std::max(sse_rel, rel(sse, (ref - vec(in.y)).squaredNorm()));
        const double tr =
            trace_smoother(sm.axis1().s, in.l1) * trace_smoother(sm.axis2().s, in.l2);
        tr_rel = std::max(tr_rel, rel(tr, big.trace()));
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = fit_err <= 1e-8 && sse_rel <= 1e-8 && tr_rel <= 1e-10 && secs < 5.0;
    o.detail = "25 instances, fitted max-abs " + fmt("%.2e", fit_err) + ", sse rel " + fmt("%.2e", sse_rel) +
               ", trace rel " + fmt("%.2e", tr_rel) + ", " + fmt("%.2f", secs) + " s";
    return o;
}

Outcome three_terms() {
    double worst[3] = {0, 0, 0};
    for (const Instance& in : small_instances(25)) {
        const SandwichSmoother sm(in.x, in.z, in.s1, in.s2);
        const SseTerms terms = sse_terms(sm.transform(in.y), sm.axis1().s, sm.axis2().s, in.l1, in.l2);
        const Eigen::VectorXd y = vec(in.y);
        const Eigen::VectorXd yhat =
            kron(dense_smoother(in.z, in.s2, in.l2), dense_smoother(in.x, in.s1, in.l1)) * y;
        worst[0] = std::max(worst[0], rel(terms.fitted_sq, yhat.squaredNorm()));
        worst[1] = std::max(worst[1], rel(2.0 * terms.cross, 2.0 * yhat.dot(y)));
        worst[2] = std::max(worst[2], rel(terms.yty, y.squaredNorm()));
    }
    Outcome o;
    o.pass = worst[0] <= 1e-8 && worst[1] <= 1e-8 && worst[2] <= 1e-8;
    o.detail = "rel errors: fitted^2 " + fmt("%.2e", worst[0]) + ", cross " + fmt("%.2e", worst[1]) + ", y'y " +
               fmt("%.2e", worst[2]);
    return o;
}

Outcome moments() {
    const auto t0 = Clock::now();
    bool ok = true;
    double worst_abs = 0.0, worst_rel = 0.0;
    for (int m = 1; m <= 3; ++m)
        for (int l = 0; l <= 2 * m; ++l) {
            const double v = kernel_moment(m, l);
            if (l == 2 * m) {
                const double target = (m % 2 == 1 ? 1.0 : -1.0) * std::tgamma(2.0 * m + 1.0);
                worst_rel = std::max(worst_rel, rel(v, target));
                ok = ok && rel(v, target) <= 1e-5;
            } else {
                const double target = l == 0 ? 1.0 : 0.0;
                worst_abs = std::max(worst_abs, std::abs(v - target));
                ok = ok && std::abs(v - target) <= 1e-6;
            }
        }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = ok && secs < 2.0;
    o.detail = "m=1..3, lower moments max-abs " + fmt("%.2e", worst_abs) + ", order-2m rel " + fmt("%.2e", worst_rel) +
               ", " + fmt("%.2f", secs) + " s";
    return o;
}

Outcome surface_table(std::size_t reps) {
    struct Cell {
        TestFunction f;
        double sigma, target;
    };
    const Cell cells[] = {{TestFunction::F1, 0.1, 8.13e-4},
                          {TestFunction::F1, 0.5, 1.08e-2},
                          {TestFunction::F2, 0.1, 6.45e-4},
                          {TestFunction::F2, 0.5, 9.25e-3}};
    Outcome o;
    o.pass = true;
    std::ostringstream d;
    for (const Cell& c : cells) {
        SurfaceStudyConfig cfg;
        cfg.function = c.f;
        cfg.sigma = c.sigma;
        cfg.reps = reps;
        const auto t0 = Clock::now();
        const StudyResult r = run_surface_study(cfg);
        const double secs = seconds_since(t0);
        const double dev = r.mean / c.target - 1.0;
        const bool ok = std::abs(dev) <= 0.35 && secs < 60.0;
        o.pass = o.pass && ok;
        d << to_string(c.f) << " s=" << c.sigma << ": " << fmt("%.3e", r.mean) << " (" << fmt("%+.0f", 100 * dev)
          << "%, " << fmt("%.1f", secs) << " s)" << (ok ? "" : " !") << "; ";
    }
    o.detail = d.str();
    o.detail.resize(o.detail.size() - 2);
    return o;
}

Outcome covariance_table(std::size_t reps) {
    Outcome o;
    std::ostringstream d;
    bool ok[2];
    for (int c = 1; c <= 2; ++c) {
        CovStudyConfig cfg;
        cfg.fda_case = c;
        cfg.reps = reps;
        const auto t0 = Clock::now();
        const StudyResult r = run_cov_study(cfg);
        const double secs = seconds_since(t0);
        const double lo = c == 1 ? 0.03 : 0.10, hi = c == 1 ? 0.09 : 0.35;
        ok[c - 1] = r.mean >= lo && r.mean <= hi && secs < 120.0;
        d << "case " << c << ": " << fmt("%.3f", r.mean) << " in [" << lo << ", " << hi << "]? "
          << (ok[c - 1] ? "yes" : "no") << " (" << fmt("%.1f", secs) << " s)" << (c == 1 ? "; " : "");
    }
    o.pass = ok[0] && ok[1];
    o.remainder_ok = ok[1];
    o.detail = d.str();
    return o;
}

Outcome glam_equivalence() {
    const std::vector<std::size_t> shape{8, 9, 10};
    std::vector<std::vector<double>> coords;
    for (auto n : shape) coords.push_back(midpoints(n));
    const std::vector<AxisSpec> specs(3, AxisSpec{3, 2, 4});
    NdArray y(shape);
    CounterRng rng(77);
    for (auto& v : y.data) v = rng.normal();
    const ArraySmoother sm(coords, specs);
    const std::vector<double> lambdas{0.3, 4.0, 0.02};
    const NdArray fitted = sm.fitted(sm.transform(y), lambdas);
    const Eigen::MatrixXd big = kron(dense_smoother(coords[2], specs[2], lambdas[2]),
                                     kron(dense_smoother(coords[1], specs[1], lambdas[1]),
                                          dense_smoother(coords[0], specs[0], lambdas[0])));
    const Eigen::VectorXd ref = big * Eigen::Map<const Eigen::VectorXd>(y.data.data(), y.data.size());
    const double err3 =
        (Eigen::Map<const Eigen::VectorXd>(fitted.data.data(), fitted.data.size()) - ref).cwiseAbs().maxCoeff();

    // Two dimensions: array code against the bivariate smoother.
    const Eigen::MatrixXd y2 = noisy_surface(test_surface(TestFunction::F2, 20, 30), 0.1, 5);
    const AxisSpec a{3, 2, 10}, b{3, 2, 15};
    const SandwichFit ref2 = select_lambda(GridData::on_midpoints(y2), a, b);
    const std::vector<AxisSpec> specs2{a, b};
    const LambdaGrid g = LambdaGrid::log_uniform();
    const MultiFit fit2 = fit_array(ArrayData::on_midpoints(NdArray::from_matrix(y2)), specs2, {g.axis1, g.axis2});
    const double err2 = (fit2.fitted.to_matrix() - ref2.fitted).cwiseAbs().maxCoeff();
    const bool same_lambda = fit2.lambdas[0] == ref2.lambda1 && fit2.lambdas[1] == ref2.lambda2;

    Outcome o;
    o.pass = err3 <= 1e-8 && err2 <= 1e-10 && same_lambda;
    o.detail = "d=3 (8,9,10) vs dense max-abs " + fmt("%.2e", err3) + "; d=2 vs bivariate " + fmt("%.2e", err2) +
               (same_lambda ? ", same λ" : ", λ differs");
    return o;
}

Outcome null_space() {
    const std::size_t n1 = 20, n2 = 30;
    const Eigen::MatrixXd y = noisy_surface(test_surface(TestFunction::F1, n1, n2), 0.1, 9);
    const auto x = midpoints(n1), z = midpoints(n2);
    const SandwichSmoother sm(x, z, AxisSpec{3, 2, 10}, AxisSpec{3, 2, 15});
    const double big = 1e12;
    const SandwichFit fit = sm.fit(y, big, big);

    Eigen::MatrixXd design(static_cast<Eigen::Index>(n1 * n2), 4);
    Eigen::VectorXd obs(design.rows());
    Eigen::Index r = 0;
    for (std::size_t j = 0; j < n2; ++j)
        for (std::size_t i = 0; i < n1; ++i, ++r) {
            design.row(r) << 1.0, x[i], z[j], x[i] * z[j];
            obs(r) = y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    const Eigen::VectorXd ls = design * design.colPivHouseholderQr().solve(obs);
    const double err = (vec(fit.fitted) - ls).cwiseAbs().maxCoeff();
    const double range = y.maxCoeff() - y.minCoeff();
    Outcome o;
    o.pass = err <= 1e-4 * range && std::abs(fit.edf - 4.0) <= 1e-4;
    o.detail = "λ=1e12: max-abs vs bilinear LS " + fmt("%.2e", err) + " (limit " + fmt("%.2e", 1e-4 * range) +
               "), edf " + fmt("%.8f", fit.edf);
    return o;
}

Outcome kernel_profile() {
    const KernelProfile p = empirical_kernel_profile(400, AxisSpec{3, 2, 80}, 1280.0);
    Outcome o;
    o.pass = p.max_abs_error <= 0.1;
    o.detail = "n=400, K=80, λ=1280 (h=" + fmt("%.3f", p.bandwidth) + "): max-abs " + fmt("%.4f", p.max_abs_error) +
               " over " + std::to_string(p.rows_checked) + " interior rows";
    return o;
}

Outcome scalability() {
    const std::size_t n = 500;
    const Eigen::MatrixXd truth = test_surface(TestFunction::F2, n, n);
    const Eigen::MatrixXd y = noisy_surface(truth, 0.1, 11);
    const GridData data = GridData::on_midpoints(y);
    const AxisSpec spec{3, 2, 57};

    g_largest = 0;
    g_tracking = true;
    const auto t0 = Clock::now();
    const SandwichFit fit = select_lambda(data, spec, spec);
    const double secs = seconds_since(t0);
    g_tracking = false;

    rusage ru{};
    getrusage(RUSAGE_SELF, &ru);
    const double peak_mb = static_cast<double>(ru.ru_maxrss) / 1024.0;
    const double nobs = static_cast<double>(n * n);
    const double largest = static_cast<double>(g_largest.load());
    Outcome o;
    o.pass = secs < 30.0 && peak_mb < 200.0 && largest < 2.0 * 8.0 * nobs && fit.gcv_surface.gcv.size() == 400;
    o.detail = "500x500, K=57, 400 λ pairs: " + fmt("%.3f", secs) + " s, peak RSS " + fmt("%.1f", peak_mb) +
               " MB, largest allocation " + fmt("%.2f", largest / (1 << 20)) + " MB (n x n would be " +
               fmt("%.0f", 8.0 * nobs * nobs / (1 << 30)) + " GB)";
    return o;
}

Outcome binning_degenerate() {
    const std::size_t n1 = 20, n2 = 30;
    const Eigen::MatrixXd y = noisy_surface(test_surface(TestFunction::F2, n1, n2), 0.1, 13);
    ScatterData scatter;
    const auto x = midpoints(n1), z = midpoints(n2);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j)
            scatter.points.push_back({x[i], z[j], y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
    const AxisSpec a{3, 2, 10}, b{3, 2, 15};
    const IterativeFit binned = iterative_fit(scatter, static_cast<Eigen::Index>(n1), static_cast<Eigen::Index>(n2), a, b);
    const SandwichFit grid = select_lambda(GridData::on_midpoints(y), a, b);
    const double err = (binned.fit.fitted - grid.fitted).cwiseAbs().maxCoeff();
    const bool same = binned.fit.lambda1 == grid.lambda1 && binned.fit.lambda2 == grid.lambda2;
    Outcome o;
    o.pass = same && err <= 1e-12 && binned.grid.empty_count() == 0;
    o.detail = std::string(same ? "identical λ" : "λ differs") + ", fitted max-abs " + fmt("%.2e", err);
    return o;
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> known;
    std::size_t reps = 100;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--known-failure" && i + 1 < argc)
            known.insert(std::atoi(argv[++i]));
        else if (a == "--reps" && i + 1 < argc)
            reps = static_cast<std::size_t>(std::atol(argv[++i]));
        else {
            std::fprintf(stderr, "usage: acceptance [--known-failure N]... [--reps R]\n");
            return 2;
        }
    }

    const std::vector<Criterion> criteria{
        {1, "Kronecker oracle equivalence", kronecker_oracle},
        {2, "three-term SSE decomposition", three_terms},
        {3, "equivalent-kernel moments", moments},
        {4, "surface MISE, f1/f2 on 20x30", [reps] { return surface_table(reps); }},
        {5, "covariance ISE, cases 1 and 2", [reps] { return covariance_table(reps); }},
        {6, "GLAM equivalence", glam_equivalence},
        {7, "penalty null space", null_space},
        {8, "equivalent-kernel weight profile", kernel_profile},
        {9, "scalability 500x500", scalability},
        {10, "binning degenerate case", binning_degenerate},
    };

    // The memory check reads the process high-water mark, so it runs before anything else grows it.
    std::vector<Outcome> results(criteria.size());
    std::vector<std::size_t> order{8};
    for (std::size_t k = 0; k < criteria.size(); ++k)
        if (k != 8) order.push_back(k);
    for (std::size_t k : order) {
        try {
            results[k] = criteria[k].run();
        } catch (const std::exception& e) {
            results[k] = Outcome{false, std::string("exception: ") + e.what(), false};
        }
    }

    int unexpected = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const Criterion& c = criteria[k];
        const Outcome& r = results[k];
        const bool is_known = known.count(c.id) > 0;
        std::string status = r.pass ? "PASS" : (is_known ? "FAIL (known)" : "FAIL");
        if (!r.pass && (!is_known || !r.remainder_ok)) {
            ++unexpected;
            if (is_known) status = "FAIL (beyond known)";
        }
        std::printf("[%s] %2d %s: %s\n", status.c_str(), c.id, c.name.c_str(), r.detail.c_str());
    }
    std::printf("%zu criteria, %d unexpected failure(s)\n", criteria.size(), unexpected);
    return unexpected == 0 ? 0 : 1;
}
