#include "sandwich/basis.hpp"

#include "sandwich/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sandwich {

void AxisSpec::validate() const {
    if (degree < 0) throw DomainError("spline degree must be nonnegative, got " + std::to_string(degree));
    if (penalty_order < 1)
        throw DomainError("penalty order must be positive, got " + std::to_string(penalty_order));
    if (segments < 1) throw DomainError("knot segment count must be positive, got " + std::to_string(segments));
    if (static_cast<int>(size()) <= penalty_order)
        throw DomainError("basis dimension " + std::to_string(size()) + " must exceed penalty order " +
                          std::to_string(penalty_order));
}

int AxisSpec::auto_segments(std::size_t n_points, int degree, int penalty_order) {
    int k = static_cast<int>(std::min<std::size_t>(n_points / 2, 35));
    return std::max({k, 1, penalty_order + 1 - degree});
}

KnotVector make_knots(const AxisSpec& spec) {
    spec.validate();
    const std::size_t count = spec.size() + static_cast<std::size_t>(spec.degree) + 1;
    KnotVector knots(count);
    for (std::size_t j = 0; j < count; ++j)
        knots[j] = (static_cast<double>(j) - spec.degree) / spec.segments;
    return knots;
}

BasisSpan eval_basis_span(const KnotVector& knots, int degree, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("basis evaluation point " + std::to_string(x) + " outside [0,1]");
    const std::size_t p = static_cast<std::size_t>(degree);
    if (knots.size() < 2 * p + 2) throw DimensionError("knot vector too short for degree " + std::to_string(degree));
    const std::size_t segments = knots.size() - 2 * p - 1;

    // Segment containing x; the last one is closed on the right.
    std::size_t seg = static_cast<std::size_t>(std::floor(x * static_cast<double>(segments)));
    seg = std::min(seg, segments - 1);
    // Roundoff can put x just left of the computed segment start.
    while (seg > 0 && x < knots[seg + p]) --seg;
    while (seg + 1 < segments && x >= knots[seg + p + 1]) ++seg;
    const std::size_t span = seg + p;

    // Triangular de Boor scheme: N[0..p] are the basis functions span-p..span.
    BasisSpan out;
    out.first = seg;
    out.values.assign(p + 1, 0.0);
    std::vector<double> left(p + 1), right(p + 1);
    out.values[0] = 1.0;
    for (std::size_t j = 1; j <= p; ++j) {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        double saved = 0.0;
        for (std::size_t r = 0; r < j; ++r) {
            const double tmp = out.values[r] / (right[r + 1] + left[j - r]);
            out.values[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        out.values[j] = saved;
    }
    return out;
}

Eigen::VectorXd eval_basis(const KnotVector& knots, int degree, double x) {
    const std::size_t c = knots.size() - static_cast<std::size_t>(degree) - 1;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c));
    const BasisSpan span = eval_basis_span(knots, degree, x);
    for (std::size_t r = 0; r < span.values.size(); ++r)
        v(static_cast<Eigen::Index>(span.first + r)) = span.values[r];
    return v;
}

Eigen::MatrixXd design_matrix(std::span<const double> points, const AxisSpec& spec) {
    const KnotVector knots = make_knots(spec);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(points.size()),
                                              static_cast<Eigen::Index>(spec.size()));
    for (std::size_t r = 0; r < points.size(); ++r) {
        const BasisSpan span = eval_basis_span(knots, spec.degree, points[r]);
        for (std::size_t k = 0; k < span.values.size(); ++k)
            b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(span.first + k)) = span.values[k];
    }
    return b;
}

Eigen::MatrixXd diff_matrix(std::size_t c, int m) {
    if (m < 0) throw DomainError("difference order must be nonnegative");
    if (c <= static_cast<std::size_t>(m))
        throw DimensionError("difference matrix needs c > m (c=" + std::to_string(c) + ", m=" + std::to_string(m) + ")");
    Eigen::MatrixXd d = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c));
    for (int order = 0; order < m; ++order) {
        const Eigen::Index rows = d.rows() - 1;
        d = (d.bottomRows(rows) - d.topRows(rows)).eval();
    }
    return d;
}

std::vector<double> midpoints(std::size_t n) {
    std::vector<double> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    return pts;
}

} // namespace sandwich
