#pragma once

// Bivariate sandwich smoother Ŷ = S₁ Y S₂ with fast GCV selection of (λ₁, λ₂).
//
// After the one-off transform Ỹ = A₁ᵀ Y A₂ the residual sum of squares for any
// λ pair is
//
//     ‖Ŷ − Y‖² = Σ Ỹ²ₖₗ s̃₁ₖ² s̃₂ₗ² − 2 Σ Ỹ²ₖₗ s̃₁ₖ s̃₂ₗ + yᵀy,   s̃ᵢ = 1/(1 + λᵢ sᵢ),
//
// and tr(S₂ ⊗ S₁) = tr S₁ · tr S₂, so a whole λ grid costs O(grid · c₁c₂)
// with nothing of size n₁n₂ touched after the transform.

#include "sandwich/basis.hpp"
#include "sandwich/spectra.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace sandwich {

/// Responses on an n₁ x n₂ grid with strictly increasing coordinates in [0,1].
struct GridData {
    Eigen::MatrixXd Y;
    std::vector<double> x;
    std::vector<double> z;

    void validate() const;

    /// Y on the midpoint design ((i-1/2)/n₁, (j-1/2)/n₂).
    static GridData on_midpoints(Eigen::MatrixXd y);
};

/// Candidate smoothing parameters per axis.
struct LambdaGrid {
    std::vector<double> axis1;
    std::vector<double> axis2;

    void validate() const;

    /// `count` values 10^t for t equally spaced on [log10_lo, log10_hi].
    static std::vector<double> log_spaced(std::size_t count, double log10_lo, double log10_hi);
    /// The default 20 x 20 grid on [-5, 4]² in log10 units.
    static LambdaGrid log_uniform(std::size_t count = 20, double log10_lo = -5.0, double log10_hi = 4.0);
};

/// Optional second search on a finer grid centred at the coarse minimum.
struct FinePass {
    std::size_t count = 20;
    /// Half-width of the refined window in decades; zero means one coarse grid step.
    double half_width_decades = 0.0;
};

struct SearchOptions {
    std::optional<FinePass> fine;
};

/// GCV and its ingredients over a λ₁ x λ₂ grid (row i ↔ lambda1[i]).
struct GcvSurface {
    std::vector<double> lambda1;
    std::vector<double> lambda2;
    Eigen::MatrixXd gcv;
    Eigen::MatrixXd sse;
    Eigen::MatrixXd edf;
};

struct SandwichFit {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    /// c₁ x c₂ B-spline coefficients.
    Eigen::MatrixXd theta;
    /// n₁ x n₂ fitted values.
    Eigen::MatrixXd fitted;
    /// GCV at the selected pair, as evaluated by the search.
    double gcv_value = 0.0;
    /// tr S₁ · tr S₂.
    double edf = 0.0;
    /// ‖Ŷ − Y‖² recomputed from the fitted values.
    double sse = 0.0;
    GcvSurface gcv_surface;
    std::optional<GcvSurface> fine_surface;
    AxisSpec spec1;
    AxisSpec spec2;
};

/// Ỹ = A₁ᵀ Y A₂ together with yᵀy; computed once per data set.
struct TransformedData {
    Eigen::MatrixXd Yt;
    double yty = 0.0;
};

/// The three terms of ‖ŷ − y‖² = ŷᵀŷ − 2ŷᵀy + yᵀy.
struct SseTerms {
    double fitted_sq = 0.0;
    double cross = 0.0;
    double yty = 0.0;

    /// Combined value, clamped to 0 for roundoff down to -1e-9·yᵀy.
    /// Throws ConsistencyError below that.
    double sse() const;
};

TransformedData transform_data(const Eigen::MatrixXd& y, const AxisSpectrum& sx, const AxisSpectrum& sz);

SseTerms sse_terms(const TransformedData& t, const Eigen::VectorXd& s1, const Eigen::VectorXd& s2, double lambda1,
                   double lambda2);

double sse_fast(const TransformedData& t, const Eigen::VectorXd& s1, const Eigen::VectorXd& s2, double lambda1,
                double lambda2);

/// (sse/n) / (1 - edf/n)². Throws DegenerateFitError when edf >= n.
double gcv_score(double sse, double edf, double n);

/// Location of the GCV minimum. Exact ties go to the smoother fit: larger λ₂
/// first, then larger λ₁. Throws DegenerateFitError if no entry is finite.
struct GridIndex {
    Eigen::Index i = 0;
    Eigen::Index j = 0;
};
GridIndex argmin_gcv(const GcvSurface& surface);

/// Precomputed spectra for a fixed pair of coordinate sets; reusable across data sets.
class SandwichSmoother {
public:
    SandwichSmoother(std::span<const double> x, std::span<const double> z, const AxisSpec& spec1,
                     const AxisSpec& spec2);
    SandwichSmoother(AxisSpectrum axis1, AxisSpectrum axis2);

    const AxisSpectrum& axis1() const noexcept { return axis1_; }
    const AxisSpectrum& axis2() const noexcept { return axis2_; }

    TransformedData transform(const Eigen::MatrixXd& y) const;

    /// Fast GCV over the Cartesian product of the two λ lists.
    GcvSurface gcv_surface(const TransformedData& t, std::span<const double> lambda1,
                           std::span<const double> lambda2) const;

    /// A₁ Σ₁ Ỹ Σ₂ A₂ᵀ.
    Eigen::MatrixXd fitted(const TransformedData& t, double lambda1, double lambda2) const;

    /// R₁ Σ₁ Ỹ Σ₂ R₂ᵀ with Rᵢ = (BᵢᵀBᵢ)^{-1/2}Uᵢ.
    Eigen::MatrixXd coefficients(const TransformedData& t, double lambda1, double lambda2) const;

    /// Fit at a fixed λ pair (no search; gcv_surface holds the single point).
    SandwichFit fit(const Eigen::MatrixXd& y, double lambda1, double lambda2) const;

    /// GCV grid search followed by the fit at the minimiser.
    SandwichFit select(const Eigen::MatrixXd& y, const LambdaGrid& grid, const SearchOptions& options = {}) const;

private:
    SandwichFit finish(const Eigen::MatrixXd& y, const TransformedData& t, double lambda1, double lambda2) const;

    AxisSpectrum axis1_;
    AxisSpectrum axis2_;
};

SandwichFit select_lambda(const GridData& data, const AxisSpec& spec1, const AxisSpec& spec2,
                          const LambdaGrid& grid = LambdaGrid::log_uniform(), const SearchOptions& options = {});

/// Θ̂ solving Λ₁ Θ̂ Λ₂ = B₁ᵀ Y B₂ via the spectral factors (never a c₁c₂ x c₁c₂ system).
Eigen::MatrixXd solve_coefficients(const Eigen::MatrixXd& y, const AxisSpectrum& sx, const AxisSpectrum& sz,
                                   double lambda1, double lambda2);

/// μ̂(x, z) = Σ θ_{κℓ} B¹_κ(x) B²_ℓ(z), touching at most (p₁+1)(p₂+1) coefficients.
double predict(const Eigen::MatrixXd& theta, const AxisSpec& spec1, const AxisSpec& spec2, double x, double z);
double predict(const SandwichFit& fit, double x, double z);

} // namespace sandwich
