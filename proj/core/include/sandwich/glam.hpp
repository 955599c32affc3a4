#pragma once

// d-dimensional sandwich smoothing on array data. The smoother
// S_d ⊗ … ⊗ S₁ is applied through a chain of rotated H-transforms, and GCV
// uses the same spectral shortcut as the bivariate case: one transform
// Ỹ = RH(A_dᵀ, …, RH(A₁ᵀ, Y)…) followed by weighted sums over Ỹ² per λ tuple.

#include "sandwich/basis.hpp"
#include "sandwich/spectra.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace sandwich {

/// Dense array stored with the first axis varying fastest, so a 2-D array is
/// a column-major matrix and its vec stacks columns.
struct NdArray {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    NdArray() = default;
    explicit NdArray(std::vector<std::size_t> dims, double fill = 0.0);

    std::size_t rank() const noexcept { return shape.size(); }
    std::size_t size() const noexcept { return data.size(); }
    std::size_t offset(std::span<const std::size_t> index) const;
    double& operator()(std::span<const std::size_t> index) { return data[offset(index)]; }
    double operator()(std::span<const std::size_t> index) const { return data[offset(index)]; }

    static NdArray from_matrix(const Eigen::MatrixXd& m);
    Eigen::MatrixXd to_matrix() const;
};

/// Rotated H-transform: contracts `s` (m x n₁) against the first axis of `a`
/// (n₁ x n₂ x … x n_d) and moves the new axis to the end, giving n₂ x … x n_d x m.
NdArray rh(const Eigen::MatrixXd& s, const NdArray& a);

/// Contracts `s` against axis `axis` in place of that axis (no rotation).
NdArray mode_product(const Eigen::MatrixXd& s, const NdArray& a, std::size_t axis);

struct ArrayData {
    NdArray values;
    std::vector<std::vector<double>> coords;

    void validate() const;
    static ArrayData on_midpoints(NdArray values);
};

struct MultiFit {
    std::vector<double> lambdas;
    NdArray fitted;
    double edf = 0.0;
    double gcv_value = 0.0;
    double sse = 0.0;
    /// GCV for every λ tuple, enumerated with the first axis varying fastest.
    std::vector<double> gcv_values;
};

inline constexpr std::size_t kMaxLambdaCombinations = 100000;

/// Per-axis λ count used when none is given: 20 for d = 2, 10 for d = 3, 6 for d = 4, 4 beyond.
std::size_t default_lambda_count(std::size_t dims);

/// Default per-axis grids (log10 range [-5, 4]).
std::vector<std::vector<double>> default_lambda_grids(std::size_t dims);

/// Spectra for each axis of one array shape.
class ArraySmoother {
public:
    ArraySmoother(const std::vector<std::vector<double>>& coords, std::span<const AxisSpec> specs);

    std::size_t dims() const noexcept { return axes_.size(); }
    const AxisSpectrum& axis(std::size_t k) const { return axes_[k]; }

    /// Ỹ (shape c₁ x … x c_d) and yᵀy.
    NdArray transform(const NdArray& y, double* yty = nullptr) const;

    /// ‖(S_d ⊗ … ⊗ S₁)y − y‖² from the transformed array.
    double sse(const NdArray& transformed, double yty, std::span<const double> lambdas) const;

    double edf(std::span<const double> lambdas) const;

    /// Fitted array from the transformed data.
    NdArray fitted(const NdArray& transformed, std::span<const double> lambdas) const;

private:
    std::vector<AxisSpectrum> axes_;
};

/// GCV over the Cartesian λ grid and the fit at its minimum. Ties prefer the
/// smoother fit (larger λ on the last axis first). Throws GridExplosionError
/// above kMaxLambdaCombinations tuples.
MultiFit fit_array(const ArrayData& data, std::span<const AxisSpec> specs,
                   const std::vector<std::vector<double>>& grids);

} // namespace sandwich
