#pragma once

// Scattered data on [0,1]²: average within an I₁ x I₂ grid of equal bins,
// impute the empty ones, then run the sandwich smoother on the bin means.

#include "sandwich/sandwich2d.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace sandwich {

struct ScatterPoint {
    double x = 0.0;
    double z = 0.0;
    double y = 0.0;
};

struct ScatterData {
    std::vector<ScatterPoint> points;

    /// Throws DomainError for coordinates outside the unit square or non-finite values.
    void validate() const;
    std::size_t size() const noexcept { return points.size(); }
};

struct BinnedGrid {
    /// I₁ x I₂ bin means; entries of empty bins hold whatever imputation set them (0 after binning).
    Eigen::MatrixXd means;
    Eigen::MatrixXi counts;
    /// Bin centres (κ - 1/2)/I₁ and (ℓ - 1/2)/I₂.
    std::vector<double> x_centers;
    std::vector<double> z_centers;

    Eigen::Index rows() const noexcept { return means.rows(); }
    Eigen::Index cols() const noexcept { return means.cols(); }
    bool empty(Eigen::Index k, Eigen::Index l) const { return counts(k, l) == 0; }
    std::size_t empty_count() const;
    /// True where the bin received no observation.
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> empty_mask() const;

    GridData as_grid() const;
};

/// Bin index of a coordinate in [0,1]: floor(v·I) with the right edge closed on the last bin.
Eigen::Index bin_index(double v, Eigen::Index bins);

BinnedGrid bin_scatter(const ScatterData& data, Eigen::Index bins1, Eigen::Index bins2);

/// Every empty bin gets the mean response of the M observations nearest to its
/// centre (Euclidean; ties by point order). Throws DomainError if data is empty.
BinnedGrid fill_nearest(const BinnedGrid& grid, const ScatterData& data, std::size_t m);

/// Default bin count per axis: ceil(min(√n / 2, 35)).
Eigen::Index default_bins(std::size_t n);

enum class EmptyBinInit { Zero, Nearest };

struct IterativeOptions {
    EmptyBinInit init = EmptyBinInit::Nearest;
    std::size_t nearest = 3;
    /// Stop when the largest change in imputed values is at most tol·max|y|.
    double tol = 1e-6;
    std::size_t max_iter = 20;
    SearchOptions search;
};

struct IterativeFit {
    SandwichFit fit;
    /// Bin means with the final imputed values in empty bins.
    BinnedGrid grid;
    std::size_t iterations = 0;
    bool converged = false;
    /// Max absolute change of the imputed values after each iteration.
    std::vector<double> changes;
};

/// Residual sum of squares over bins that received data.
double masked_sse(const Eigen::MatrixXd& fitted, const Eigen::MatrixXd& y, const Eigen::MatrixXi& counts);

/// GCV surface whose SSE term only sums over nonempty bins. Fitted values are
/// formed per λ pair; the trace still uses the full-grid product tr S₁ · tr S₂
/// and n is the number of nonempty bins.
GcvSurface masked_gcv_surface(const SandwichSmoother& smoother, const Eigen::MatrixXd& y,
                              const Eigen::MatrixXi& counts, std::span<const double> lambda1,
                              std::span<const double> lambda2);

/// Bin, initialise empty bins, then alternate masked-GCV λ selection with
/// re-imputation of empty bins until the imputed values settle. When every bin
/// has data this is exactly select_lambda on the bin means. Non-convergence is
/// reported through `converged`, not thrown.
IterativeFit iterative_fit(const ScatterData& data, Eigen::Index bins1, Eigen::Index bins2, const AxisSpec& spec1,
                           const AxisSpec& spec2, const LambdaGrid& grid = LambdaGrid::log_uniform(),
                           const IterativeOptions& options = {});

} // namespace sandwich
