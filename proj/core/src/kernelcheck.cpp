#include "sandwich/kernelcheck.hpp"

#include "sandwich/error.hpp"
#include "sandwich/spectra.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace sandwich {

namespace {

constexpr double kTailTarget = 1e-10;
constexpr double kImagTolerance = 1e-12;
constexpr unsigned kMaxDepth = 20;
constexpr double kRelTol = 1e-14;

using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;

template <class F>
double integrate(F f, double a, double b, double& err) {
    double e = 0.0;
    const double v = Rule::integrate(f, a, b, kMaxDepth, kRelTol, &e);
    err += e;
    return v;
}

// Splits [0, T] at multiples of the decay length so every piece sees a smooth, bounded integrand.
template <class F>
double integrate_half_line(F f, double t, double scale, double& err) {
    const double step = 8.0 * scale;
    double total = 0.0;
    for (double a = 0.0; a < t; a += step) total += integrate(f, a, std::min(a + step, t), err);
    return total;
}

} // namespace

std::vector<std::complex<double>> kernel_roots(int m) {
    if (m < 1) throw DomainError("kernel order must be at least 1, got " + std::to_string(m));
    std::vector<std::complex<double>> roots;
    for (int j = 0; j < 2 * m; ++j) {
        const double angle = std::numbers::pi * (m + 1 + 2 * j) / (2.0 * m);
        std::complex<double> z = std::polar(1.0, angle);
        if (std::abs(z.imag()) < 1e-15) z.imag(0.0);
        if (z.real() > 1e-14) roots.push_back(z);
    }
    std::sort(roots.begin(), roots.end(),
              [](const auto& a, const auto& b) { return std::arg(a) < std::arg(b); });
    return roots;
}

EquivalentKernel::EquivalentKernel(int order) : m(order), roots(kernel_roots(order)) {}

double EquivalentKernel::operator()(double x) const {
    const double ax = std::abs(x);
    std::complex<double> sum = 0.0;
    for (const auto& psi : roots) sum += psi * std::exp(-psi * ax);
    sum /= 2.0 * m;
    if (std::abs(sum.imag()) > kImagTolerance * std::max(1.0, std::abs(sum.real())))
        throw ConsistencyError("kernel value has imaginary part " + std::to_string(sum.imag()));
    return sum.real();
}

double EquivalentKernel::decay() const {
    double r = roots.front().real();
    for (const auto& psi : roots) r = std::min(r, psi.real());
    return r;
}

double kernel_eval(int m, double x) { return EquivalentKernel(m)(x); }

QuadratureResult kernel_moment_quadrature(int m, int l) {
    if (l < 0) throw DomainError("moment index must be nonnegative");
    if (l > 2 * m)
        throw DomainError("moment " + std::to_string(l) + " exceeds the kernel order " + std::to_string(2 * m));
    const EquivalentKernel kernel(m);
    const double r = kernel.decay();

    // |H_m(x)| ≤ e^{−r|x|}/2, so both tails together are bounded by Γ(l+1, rT)/r^{l+1}.
    double t = 40.0 / r;
    auto tail = [&](double tt) { return boost::math::tgamma(l + 1.0, r * tt) / std::pow(r, l + 1); };
    while (tail(t) >= kTailTarget) t *= 2.0;

    QuadratureResult out;
    out.truncation = t;
    out.tail_bound = tail(t);
    const auto right = [&](double x) { return std::pow(x, l) * kernel(x); };
    const auto left = [&](double x) { return std::pow(-x, l) * kernel(-x); };
    out.value = integrate_half_line(right, t, 1.0 / r, out.error_estimate) +
                integrate_half_line(left, t, 1.0 / r, out.error_estimate);
    return out;
}

double kernel_moment(int m, int l) { return kernel_moment_quadrature(m, l).value; }

double kernel_moment_target(int m, int l) {
    if (l == 0) return 1.0;
    if (l % 2 == 1 || l < 2 * m) return 0.0;
    if (l == 2 * m) return ((m + 1) % 2 == 0 ? 1.0 : -1.0) * std::tgamma(2.0 * m + 1.0);
    throw DomainError("moment " + std::to_string(l) + " exceeds the kernel order " + std::to_string(2 * m));
}

QuadratureResult kernel_l2_quadrature(int m) {
    const EquivalentKernel kernel(m);
    const double r = kernel.decay();
    // H_m² ≤ e^{−2r|x|}/4.
    double t = 40.0 / r;
    auto tail = [&](double tt) { return std::exp(-2.0 * r * tt) / (4.0 * r); };
    while (tail(t) >= kTailTarget) t *= 2.0;

    QuadratureResult out;
    out.truncation = t;
    out.tail_bound = tail(t);
    const auto sq = [&](double x) {
        const double h = kernel(x);
        return h * h;
    };
    out.value = 2.0 * integrate_half_line(sq, t, 1.0 / r, out.error_estimate);
    out.error_estimate *= 2.0;
    return out;
}

double kernel_l2(int m) { return kernel_l2_quadrature(m).value; }

double equivalent_bandwidth(double lambda, double segments, double n, int m) {
    if (lambda < 0.0 || !(segments > 0.0) || !(n > 0.0) || m < 1)
        throw DomainError("equivalent bandwidth needs λ ≥ 0 and positive K, n, m");
    return std::pow(lambda * segments / n, 1.0 / (2.0 * m)) / segments;
}

Bandwidths equivalent_bandwidths(double lambda1, double lambda2, double segments1, double segments2, double n1,
                                 double n2, int m1, int m2) {
    Bandwidths out;
    out.h1 = equivalent_bandwidth(lambda1, segments1, n1, m1);
    out.h2 = equivalent_bandwidth(lambda2, segments2, n2, m2);
    out.h = out.h1 * out.h2;
    return out;
}

AsymptoticReport asymptotic_report(double dx, double dz, double sigma2, double h1, double h2, int m1, int m2,
                                   double n) {
    if (m1 < 1 || m2 < 1) throw DomainError("penalty orders must be at least 1");
    if (sigma2 < 0.0) throw DomainError("variance must be nonnegative");
    AsymptoticReport rep;
    rep.m1 = m1;
    rep.m2 = m2;
    rep.h1 = h1;
    rep.h2 = h2;
    rep.m3 = 4 * m1 * m2 + m1 + m2;
    rep.rate_exponent = 2.0 * m1 * m2 / rep.m3;
    const double s1 = (m1 + 1) % 2 == 0 ? 1.0 : -1.0;
    const double s2 = (m2 + 1) % 2 == 0 ? 1.0 : -1.0;
    rep.bias = s1 * std::pow(h1, 2 * m1) * dx + s2 * std::pow(h2, 2 * m2) * dz;
    rep.variance = sigma2 * kernel_l2(m1) * kernel_l2(m2);
    if (n > 0.0) {
        rep.hn1 = h1 * std::pow(n, -static_cast<double>(m2) / rep.m3);
        rep.hn2 = h2 * std::pow(n, -static_cast<double>(m1) / rep.m3);
    }
    return rep;
}

KernelProfile empirical_kernel_profile(std::size_t n, const AxisSpec& spec, double lambda, double interior_lo,
                                       double interior_hi) {
    spec.validate();
    const std::vector<double> x = midpoints(n);
    const AxisSpectrum axis = build_axis_spectrum(x, spec);
    const Eigen::MatrixXd s = smoother_matrix(axis, lambda);
    const EquivalentKernel kernel(spec.penalty_order);

    KernelProfile out;
    out.lambda = lambda;
    out.bandwidth = equivalent_bandwidth(lambda, spec.segments, static_cast<double>(n), spec.penalty_order);
    if (!(out.bandwidth > 0.0)) throw DomainError("kernel profile needs λ > 0");
    const double scale = static_cast<double>(n) * out.bandwidth;
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i] < interior_lo || x[i] > interior_hi) continue;
        ++out.rows_checked;
        for (std::size_t j = 0; j < n; ++j) {
            const double weight = scale * s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            const double target = kernel((x[i] - x[j]) / out.bandwidth);
            out.max_abs_error = std::max(out.max_abs_error, std::abs(weight - target));
        }
    }
    return out;
}

} // namespace sandwich
