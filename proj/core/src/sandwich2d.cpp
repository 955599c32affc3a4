#include "sandwich/sandwich2d.hpp"

#include "sandwich/error.hpp"

#include "exception_slot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sandwich {

namespace {

constexpr double kSseClamp = 1e-9;

void check_coordinates(const std::vector<double>& c, Eigen::Index expected, const char* name) {
    if (static_cast<Eigen::Index>(c.size()) != expected)
        throw DimensionError(std::string(name) + " has " + std::to_string(c.size()) + " coordinates, grid has " +
                             std::to_string(expected));
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!(c[i] >= 0.0 && c[i] <= 1.0))
            throw DomainError(std::string(name) + " coordinate " + std::to_string(c[i]) + " outside [0,1]");
        if (i > 0 && !(c[i] > c[i - 1]))
            throw DomainError(std::string(name) + " coordinates must be strictly increasing");
    }
}

std::vector<double> refine(const std::vector<double>& coarse, double centre, const FinePass& fine) {
    double half = fine.half_width_decades;
    if (half <= 0.0) {
        half = 0.5;
        if (coarse.size() > 1) {
            const auto [lo, hi] = std::minmax_element(coarse.begin(), coarse.end());
            half = (std::log10(*hi) - std::log10(*lo)) / static_cast<double>(coarse.size() - 1);
        }
    }
    const double mid = std::log10(centre);
    return LambdaGrid::log_spaced(std::max<std::size_t>(fine.count, 1), mid - half, mid + half);
}

} // namespace

void GridData::validate() const {
    if (Y.rows() < 1 || Y.cols() < 1) throw DimensionError("grid data is empty");
    check_coordinates(x, Y.rows(), "x");
    check_coordinates(z, Y.cols(), "z");
    if (!Y.allFinite()) throw DomainError("grid responses must be finite");
}

GridData GridData::on_midpoints(Eigen::MatrixXd y) {
    GridData out;
    out.x = midpoints(static_cast<std::size_t>(y.rows()));
    out.z = midpoints(static_cast<std::size_t>(y.cols()));
    out.Y = std::move(y);
    return out;
}

void LambdaGrid::validate() const {
    if (axis1.empty() || axis2.empty()) throw DomainError("lambda grid needs at least one value per axis");
    for (const auto* axis : {&axis1, &axis2})
        for (double v : *axis)
            if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("lambda grid values must be positive and finite");
}

std::vector<double> LambdaGrid::log_spaced(std::size_t count, double log10_lo, double log10_hi) {
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = std::pow(10.0, 0.5 * (log10_lo + log10_hi));
        return out;
    }
    for (std::size_t i = 0; i < count; ++i) {
        const double t = log10_lo + (log10_hi - log10_lo) * static_cast<double>(i) / static_cast<double>(count - 1);
        out[i] = std::pow(10.0, t);
    }
    return out;
}

LambdaGrid LambdaGrid::log_uniform(std::size_t count, double log10_lo, double log10_hi) {
    auto axis = log_spaced(count, log10_lo, log10_hi);
    return {axis, axis};
}

double SseTerms::sse() const {
    const double v = fitted_sq - 2.0 * cross + yty;
    if (v >= 0.0) return v;
    if (v >= -kSseClamp * yty) return 0.0;
    throw ConsistencyError("residual sum of squares came out negative (" + std::to_string(v) + ")");
}

TransformedData transform_data(const Eigen::MatrixXd& y, const AxisSpectrum& sx, const AxisSpectrum& sz) {
    if (y.rows() != sx.n() || y.cols() != sz.n())
        throw DimensionError("data is " + std::to_string(y.rows()) + "x" + std::to_string(y.cols()) +
                             " but spectra expect " + std::to_string(sx.n()) + "x" + std::to_string(sz.n()));
    TransformedData t;
    t.Yt = sx.A.transpose() * y * sz.A;
    t.yty = y.squaredNorm();
    return t;
}

SseTerms sse_terms(const TransformedData& t, const Eigen::VectorXd& s1, const Eigen::VectorXd& s2, double lambda1,
                   double lambda2) {
    if (t.Yt.rows() != s1.size() || t.Yt.cols() != s2.size())
        throw DimensionError("transformed data does not match eigenvalue vectors");
    const Eigen::ArrayXd a = shrinkage(s1, lambda1).array();
    const Eigen::ArrayXd b = shrinkage(s2, lambda2).array();
    const Eigen::ArrayXXd w = t.Yt.array().square();
    const Eigen::ArrayXXd ab = a.matrix() * b.matrix().transpose();
    SseTerms out;
    out.fitted_sq = (w * ab.square()).sum();
    out.cross = (w * ab).sum();
    out.yty = t.yty;
    return out;
}

double sse_fast(const TransformedData& t, const Eigen::VectorXd& s1, const Eigen::VectorXd& s2, double lambda1,
                double lambda2) {
    return sse_terms(t, s1, s2, lambda1, lambda2).sse();
}

double gcv_score(double sse, double edf, double n) {
    if (!(n > 0.0)) throw DomainError("GCV needs a positive observation count");
    if (edf >= n)
        throw DegenerateFitError("smoother saturates the data (edf " + std::to_string(edf) + " >= n " +
                                 std::to_string(n) + ")");
    const double denom = 1.0 - edf / n;
    return (sse / n) / (denom * denom);
}

GridIndex argmin_gcv(const GcvSurface& surface) {
    GridIndex best{-1, -1};
    double best_value = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < surface.gcv.rows(); ++i) {
        for (Eigen::Index j = 0; j < surface.gcv.cols(); ++j) {
            const double v = surface.gcv(i, j);
            if (!std::isfinite(v)) continue;
            bool take = best.i < 0 || v < best_value;
            if (!take && v == best_value) {
                const double l2 = surface.lambda2[static_cast<std::size_t>(j)];
                const double b2 = surface.lambda2[static_cast<std::size_t>(best.j)];
                const double l1 = surface.lambda1[static_cast<std::size_t>(i)];
                const double b1 = surface.lambda1[static_cast<std::size_t>(best.i)];
                take = l2 > b2 || (l2 == b2 && l1 > b1);
            }
            if (take) {
                best = {i, j};
                best_value = v;
            }
        }
    }
    if (best.i < 0) throw DegenerateFitError("GCV is undefined at every grid point (smoother saturates the data)");
    return best;
}

SandwichSmoother::SandwichSmoother(std::span<const double> x, std::span<const double> z, const AxisSpec& spec1,
                                   const AxisSpec& spec2)
    : axis1_(build_axis_spectrum(x, spec1)), axis2_(build_axis_spectrum(z, spec2)) {}

SandwichSmoother::SandwichSmoother(AxisSpectrum axis1, AxisSpectrum axis2)
    : axis1_(std::move(axis1)), axis2_(std::move(axis2)) {}

TransformedData SandwichSmoother::transform(const Eigen::MatrixXd& y) const {
    return transform_data(y, axis1_, axis2_);
}

GcvSurface SandwichSmoother::gcv_surface(const TransformedData& t, std::span<const double> lambda1,
                                         std::span<const double> lambda2) const {
    const Eigen::Index r1 = static_cast<Eigen::Index>(lambda1.size());
    const Eigen::Index r2 = static_cast<Eigen::Index>(lambda2.size());
    GcvSurface out;
    out.lambda1.assign(lambda1.begin(), lambda1.end());
    out.lambda2.assign(lambda2.begin(), lambda2.end());
    out.gcv.resize(r1, r2);
    out.sse.resize(r1, r2);
    out.edf.resize(r1, r2);

    const double n = static_cast<double>(axis1_.n()) * static_cast<double>(axis2_.n());
    const Eigen::MatrixXd w = t.Yt.array().square().matrix();

    // Shrinkage along axis 2 is shared by every row of the surface.
    Eigen::MatrixXd shrink2(axis2_.c(), r2);
    std::vector<double> tr2(static_cast<std::size_t>(r2));
    for (Eigen::Index j = 0; j < r2; ++j) {
        shrink2.col(j) = shrinkage(axis2_.s, lambda2[static_cast<std::size_t>(j)]);
        tr2[static_cast<std::size_t>(j)] = trace_smoother(axis2_.s, lambda2[static_cast<std::size_t>(j)]);
    }

    detail::ExceptionSlot failure;
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < r1; ++i) failure.run([&] {
        const double l1 = lambda1[static_cast<std::size_t>(i)];
        const Eigen::VectorXd a = shrinkage(axis1_.s, l1);
        const double tr1 = trace_smoother(axis1_.s, l1);
        // Contract the squared transform along axis 1 once per λ₁.
        const Eigen::RowVectorXd u = a.array().square().matrix().transpose() * w;
        const Eigen::RowVectorXd v = a.transpose() * w;
        for (Eigen::Index j = 0; j < r2; ++j) {
            const auto b = shrink2.col(j).array();
            SseTerms terms;
            terms.fitted_sq = (u.array().transpose() * b.square()).sum();
            terms.cross = (v.array().transpose() * b).sum();
            terms.yty = t.yty;
            const double sse = terms.sse();
            const double edf = tr1 * tr2[static_cast<std::size_t>(j)];
            out.sse(i, j) = sse;
            out.edf(i, j) = edf;
            out.gcv(i, j) = edf < n ? gcv_score(sse, edf, n) : std::numeric_limits<double>::infinity();
        }
    });
    failure.rethrow();
    return out;
}

Eigen::MatrixXd SandwichSmoother::fitted(const TransformedData& t, double lambda1, double lambda2) const {
    const Eigen::VectorXd a = shrinkage(axis1_.s, lambda1);
    const Eigen::VectorXd b = shrinkage(axis2_.s, lambda2);
    const Eigen::MatrixXd core = a.asDiagonal() * t.Yt * b.asDiagonal();
    return axis1_.A * core * axis2_.A.transpose();
}

Eigen::MatrixXd SandwichSmoother::coefficients(const TransformedData& t, double lambda1, double lambda2) const {
    const Eigen::VectorXd a = shrinkage(axis1_.s, lambda1);
    const Eigen::VectorXd b = shrinkage(axis2_.s, lambda2);
    const Eigen::MatrixXd core = a.asDiagonal() * t.Yt * b.asDiagonal();
    return axis1_.coef_map * core * axis2_.coef_map.transpose();
}

SandwichFit SandwichSmoother::finish(const Eigen::MatrixXd& y, const TransformedData& t, double lambda1,
                                     double lambda2) const {
    SandwichFit fit;
    fit.lambda1 = lambda1;
    fit.lambda2 = lambda2;
    fit.fitted = fitted(t, lambda1, lambda2);
    fit.theta = coefficients(t, lambda1, lambda2);
    fit.edf = trace_smoother(axis1_.s, lambda1) * trace_smoother(axis2_.s, lambda2);
    fit.sse = (fit.fitted - y).squaredNorm();
    fit.spec1 = axis1_.spec.value_or(AxisSpec{});
    fit.spec2 = axis2_.spec.value_or(AxisSpec{});
    return fit;
}

SandwichFit SandwichSmoother::fit(const Eigen::MatrixXd& y, double lambda1, double lambda2) const {
    const TransformedData t = transform(y);
    const double l1[] = {lambda1};
    const double l2[] = {lambda2};
    GcvSurface surface = gcv_surface(t, l1, l2);
    SandwichFit out = finish(y, t, lambda1, lambda2);
    out.gcv_value = surface.gcv(0, 0);
    out.gcv_surface = std::move(surface);
    return out;
}

SandwichFit SandwichSmoother::select(const Eigen::MatrixXd& y, const LambdaGrid& grid,
                                     const SearchOptions& options) const {
    grid.validate();
    const TransformedData t = transform(y);
    GcvSurface coarse = gcv_surface(t, grid.axis1, grid.axis2);
    const GridIndex best = argmin_gcv(coarse);
    double l1 = coarse.lambda1[static_cast<std::size_t>(best.i)];
    double l2 = coarse.lambda2[static_cast<std::size_t>(best.j)];
    double value = coarse.gcv(best.i, best.j);

    std::optional<GcvSurface> fine_surface;
    if (options.fine) {
        const auto f1 = refine(grid.axis1, l1, *options.fine);
        const auto f2 = refine(grid.axis2, l2, *options.fine);
        GcvSurface fine = gcv_surface(t, f1, f2);
        const GridIndex fb = argmin_gcv(fine);
        if (fine.gcv(fb.i, fb.j) < value) {
            l1 = fine.lambda1[static_cast<std::size_t>(fb.i)];
            l2 = fine.lambda2[static_cast<std::size_t>(fb.j)];
            value = fine.gcv(fb.i, fb.j);
        }
        fine_surface = std::move(fine);
    }

    SandwichFit out = finish(y, t, l1, l2);
    out.gcv_value = value;
    out.gcv_surface = std::move(coarse);
    out.fine_surface = std::move(fine_surface);
    return out;
}

SandwichFit select_lambda(const GridData& data, const AxisSpec& spec1, const AxisSpec& spec2, const LambdaGrid& grid,
                          const SearchOptions& options) {
    data.validate();
    const SandwichSmoother smoother(data.x, data.z, spec1, spec2);
    return smoother.select(data.Y, grid, options);
}

Eigen::MatrixXd solve_coefficients(const Eigen::MatrixXd& y, const AxisSpectrum& sx, const AxisSpectrum& sz,
                                   double lambda1, double lambda2) {
    const TransformedData t = transform_data(y, sx, sz);
    const Eigen::VectorXd a = shrinkage(sx.s, lambda1);
    const Eigen::VectorXd b = shrinkage(sz.s, lambda2);
    return sx.coef_map * (a.asDiagonal() * t.Yt * b.asDiagonal()) * sz.coef_map.transpose();
}

double predict(const Eigen::MatrixXd& theta, const AxisSpec& spec1, const AxisSpec& spec2, double x, double z) {
    if (theta.rows() != static_cast<Eigen::Index>(spec1.size()) ||
        theta.cols() != static_cast<Eigen::Index>(spec2.size()))
        throw DimensionError("coefficient matrix does not match the axis specs");
    const BasisSpan bx = eval_basis_span(make_knots(spec1), spec1.degree, x);
    const BasisSpan bz = eval_basis_span(make_knots(spec2), spec2.degree, z);
    double acc = 0.0;
    for (std::size_t k = 0; k < bx.values.size(); ++k) {
        double row = 0.0;
        for (std::size_t l = 0; l < bz.values.size(); ++l)
            row += theta(static_cast<Eigen::Index>(bx.first + k), static_cast<Eigen::Index>(bz.first + l)) *
                   bz.values[l];
        acc += bx.values[k] * row;
    }
    return acc;
}

double predict(const SandwichFit& fit, double x, double z) {
    return predict(fit.theta, fit.spec1, fit.spec2, x, z);
}

} // namespace sandwich
