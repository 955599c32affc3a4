#pragma once

// Covariance estimation for curves observed on a common grid: smooth the
// sample second-moment matrix with the same univariate smoother on both
// sides (one λ), then read off eigenvalues/eigenfunctions with midpoint
// quadrature scaling.

#include "sandwich/basis.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace sandwich {

struct CurveSet {
    /// n x J, one curve per row.
    Eigen::MatrixXd Y;
    /// J sample points in [0,1].
    std::vector<double> t;

    void validate() const;
};

struct CovModel {
    Eigen::MatrixXd raw_cov;
    Eigen::MatrixXd smoothed_cov;
    double lambda = 0.0;
    double gcv_value = 0.0;
    double edf = 0.0;
    /// GCV along the λ₁ = λ₂ diagonal, one entry per candidate.
    std::vector<double> lambda_grid;
    std::vector<double> gcv_path;
    std::vector<double> t;
    AxisSpec spec;
};

struct EigenPair {
    double value = 0.0;
    /// ψ̂ at the grid points, normalised so (1/J) Σ ψ̂² = 1.
    Eigen::VectorXd function;
};

/// n⁻¹ Σ Yᵢ Yᵢᵀ, optionally after subtracting the pointwise mean curve. Throws DomainError for n < 2.
Eigen::MatrixXd sample_cov(const CurveSet& curves, bool center = false);

struct CovSmoothOptions {
    /// Replace the noise-inflated diagonal by the average of its off-diagonal neighbours before smoothing.
    bool exclude_diagonal = false;
};

/// Default spec for J grid points: cubic, second-order penalty, K = min{J/2, 35}.
AxisSpec default_cov_spec(std::size_t j);

/// S(λ*) C S(λ*) with λ* minimising GCV over λ₁ = λ₂ = λ. Coordinates default to
/// the midpoint grid. Throws DomainError if C is asymmetric beyond 1e-8.
CovModel smooth_cov(const Eigen::MatrixXd& cov, const AxisSpec& spec, const std::vector<double>& lambdas,
                    const CovSmoothOptions& options = {}, std::optional<std::vector<double>> t = std::nullopt);

/// Top-k eigenpairs of the smoothed covariance: eigenvalue/J and √J·eigenvector.
/// Signs make ⟨ψ̂ₖ, referenceₖ⟩ ≥ 0 when a reference is supplied, otherwise the
/// first nonzero coordinate positive.
std::vector<EigenPair> eigenpairs(const CovModel& model, std::size_t k,
                                  const std::vector<Eigen::VectorXd>& reference = {});
std::vector<EigenPair> eigenpairs(const Eigen::MatrixXd& cov, std::size_t k,
                                  const std::vector<Eigen::VectorXd>& reference = {});

/// Population eigenvalues 0.5^{k-1}, k = 1..4.
inline constexpr double kFdaEigenvalues[4] = {1.0, 0.5, 0.25, 0.125};

/// Eigenfunction k (0-based, < 4) of case 1 (trigonometric) or case 2 (scaled Legendre).
double fda_eigenfunction(int fda_case, int k, double t);

/// K(s,t) = Σ λₖ ψₖ(s) ψₖ(t) on the grid.
Eigen::MatrixXd true_covariance(int fda_case, const std::vector<double>& t);

/// Xᵢ(tⱼ) = Σ √λₖ ξᵢₖ ψₖ(tⱼ) plus N(0, σ²) noise on the midpoint grid.
CurveSet simulate_fda(int fda_case, std::size_t n, std::size_t j, double sigma, std::uint64_t seed);

/// Midpoint-rule ∫∫ (K̂ − K)² on a J x J grid: mean squared difference.
double covariance_ise(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth);

} // namespace sandwich
