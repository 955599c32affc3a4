#pragma once

// Equidistant-knot B-spline bases, design matrices and difference penalties
// for a single axis of [0,1].

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace sandwich {

/// Per-axis smoothing configuration.
///
/// `segments` is the number of equal-width knot intervals covering [0,1]
/// (segments - 1 interior knots). The basis has `size() = segments + degree`
/// functions. Degree 0 is accepted but lies outside the range where the
/// equivalent-kernel asymptotics apply; see `within_theory()`.
struct AxisSpec {
    int degree = 3;
    int penalty_order = 2;
    int segments = 10;

    std::size_t size() const noexcept { return static_cast<std::size_t>(segments + degree); }
    bool within_theory() const noexcept { return degree >= 1; }

    /// Throws DomainError unless degree >= 0, penalty_order >= 1, segments >= 1
    /// and size() > penalty_order.
    void validate() const;

    /// Knot count rule min{floor(n/2), 35}, never below what the penalty needs.
    static int auto_segments(std::size_t n_points, int degree = 3, int penalty_order = 2);
};

using KnotVector = std::vector<double>;

/// Knots (j - p)/K for j = 0..c+p: uniform spacing 1/K extended p knots past
/// each end of [0,1].
KnotVector make_knots(const AxisSpec& spec);

/// Nonzero part of the basis at one point: values for basis indices
/// first, first+1, ..., first+degree.
struct BasisSpan {
    std::size_t first = 0;
    std::vector<double> values;
};

/// Locally supported evaluation. Segments are half-open except the last,
/// which is closed so x = 1 is defined. Throws DomainError outside [0,1].
BasisSpan eval_basis_span(const KnotVector& knots, int degree, double x);

/// Full length-c vector of basis values at x.
Eigen::VectorXd eval_basis(const KnotVector& knots, int degree, double x);

/// n x c matrix with row r holding the basis evaluated at points[r].
Eigen::MatrixXd design_matrix(std::span<const double> points, const AxisSpec& spec);

/// (c - m) x c matrix of m-th order forward differences. Throws DimensionError if c <= m.
Eigen::MatrixXd diff_matrix(std::size_t c, int m);

/// Midpoint design (i - 1/2)/n, i = 1..n.
std::vector<double> midpoints(std::size_t n);

} // namespace sandwich
