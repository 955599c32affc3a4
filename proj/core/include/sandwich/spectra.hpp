#pragma once

// Per-axis spectral preprocessing. Once (BᵀB)^{-1/2} DᵀD (BᵀB)^{-1/2} = U diag(s) Uᵀ
// is known, the P-spline smoother for any λ is S(λ) = A diag(1/(1+λs)) Aᵀ with
// A = B (BᵀB)^{-1/2} U, so every λ costs O(c).

#include "sandwich/basis.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>

namespace sandwich {

struct AxisSpectrum {
    /// n x c, orthonormal columns, A Aᵀ = B(BᵀB)^{-1}Bᵀ.
    Eigen::MatrixXd A;
    /// Penalty eigenvalues, ascending, exactly `penalty_order` of them zero.
    Eigen::VectorXd s;
    /// c x c map (BᵀB)^{-1/2} U from the rotated basis back to B-spline coefficients: B R = A.
    Eigen::MatrixXd coef_map;
    /// Present when the spectrum was built through build_axis_spectrum.
    std::optional<AxisSpec> spec;

    Eigen::Index n() const noexcept { return A.rows(); }
    Eigen::Index c() const noexcept { return A.cols(); }
};

/// M^{-1/2} for symmetric positive definite M. Throws SingularGramError when
/// the smallest eigenvalue is below 1e-10 times the largest.
Eigen::MatrixXd half_inverse(const Eigen::MatrixXd& m);

/// Spectral factors of the penalized smoother B(BᵀB + λDᵀD)^{-1}Bᵀ.
/// Throws SingularGramError naming basis functions without data support.
AxisSpectrum build_spectrum(const Eigen::MatrixXd& b, const Eigen::MatrixXd& d);

/// Design + penalty + spectrum for the given coordinates in one call.
AxisSpectrum build_axis_spectrum(std::span<const double> points, const AxisSpec& spec);

/// Elementwise 1/(1 + λ s).
Eigen::VectorXd shrinkage(const Eigen::VectorXd& s, double lambda);

/// S(λ)·V without forming S. Throws DomainError for λ < 0.
Eigen::MatrixXd apply_smoother(const AxisSpectrum& spectrum, double lambda, const Eigen::MatrixXd& v);

/// tr S(λ) = Σ 1/(1 + λ s_k).
double trace_smoother(const Eigen::VectorXd& s, double lambda);

/// Dense n x n smoother matrix. Small problems and diagnostics only.
Eigen::MatrixXd smoother_matrix(const AxisSpectrum& spectrum, double lambda);

} // namespace sandwich
