#pragma once

// Equivalent-kernel diagnostics for the P-spline smoother:
//
//     H_m(x) = Σ_ν ψ_ν/(2m) · exp(−ψ_ν |x|),
//
// summed over the m roots of x^{2m} + (−1)^m = 0 with positive real part.
// H_m is a kernel of order 2m, and the sandwich smoother behaves like the
// product-kernel estimator built from H_{m₁}, H_{m₂} at bandwidths h_{n,1}, h_{n,2}.

#include "sandwich/basis.hpp"

#include <complex>
#include <cstddef>
#include <vector>

namespace sandwich {

struct EquivalentKernel {
    int m = 2;
    std::vector<std::complex<double>> roots;

    /// Throws DomainError for m < 1.
    explicit EquivalentKernel(int order);

    double operator()(double x) const;
    /// Smallest real part among the roots; sets the decay rate of H_m.
    double decay() const;
};

/// The m roots of x^{2m} + (−1)^m with positive real part, ordered by argument.
std::vector<std::complex<double>> kernel_roots(int m);

double kernel_eval(int m, double x);

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    /// Half-width T of the integration range [−T, T].
    double truncation = 0.0;
    /// Bound on the integral of |integrand| beyond T.
    double tail_bound = 0.0;
};

/// ∫ x^l H_m(x) dx by adaptive Gauss–Kronrod on [−T, T] with T grown until the
/// tail bound is below 1e−10. Throws DomainError for l > 2m.
QuadratureResult kernel_moment_quadrature(int m, int l);
double kernel_moment(int m, int l);

/// Value the order-2m moment identities predict for ∫ x^l H_m.
double kernel_moment_target(int m, int l);

/// ∫ H_m(u)² du.
QuadratureResult kernel_l2_quadrature(int m);
double kernel_l2(int m);

struct Bandwidths {
    double h1 = 0.0;
    double h2 = 0.0;
    /// h1 · h2
    double h = 0.0;
};

/// K⁻¹(λK/n)^{1/(2m)} for one axis.
double equivalent_bandwidth(double lambda, double segments, double n, int m);

Bandwidths equivalent_bandwidths(double lambda1, double lambda2, double segments1, double segments2, double n1,
                                 double n2, int m1, int m2);

struct AsymptoticReport {
    int m1 = 2;
    int m2 = 2;
    double h1 = 0.0;
    double h2 = 0.0;
    /// 4 m₁ m₂ + m₁ + m₂
    int m3 = 0;
    /// 2 m₁ m₂ / m₃
    double rate_exponent = 0.0;
    double bias = 0.0;
    double variance = 0.0;
    /// h_{n,i} = h_i n^{−m_j/m₃}; zero unless a sample size was given.
    double hn1 = 0.0;
    double hn2 = 0.0;
};

/// Limiting bias and variance of n^{2m₁m₂/m₃}(μ̂ − μ) at one point.
/// `dx` is ∂^{2m₁}μ/∂x^{2m₁}, `dz` is ∂^{2m₂}μ/∂z^{2m₂}.
AsymptoticReport asymptotic_report(double dx, double dz, double sigma2, double h1, double h2, int m1, int m2,
                                   double n = 0.0);

/// One-dimensional comparison of smoother weights with the rescaled kernel.
struct KernelProfile {
    double lambda = 0.0;
    double bandwidth = 0.0;
    /// max |n h S_ij − H_m((x_i − x_j)/h)| over interior rows i and all j.
    double max_abs_error = 0.0;
    std::size_t rows_checked = 0;
};

/// Smoother matrix on n midpoints against H_m with h = equivalent_bandwidth.
/// Rows i with x_i in [interior_lo, interior_hi] are compared.
KernelProfile empirical_kernel_profile(std::size_t n, const AxisSpec& spec, double lambda, double interior_lo = 0.25,
                                       double interior_hi = 0.75);

} // namespace sandwich
