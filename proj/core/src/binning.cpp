#include "sandwich/binning.hpp"

#include "sandwich/error.hpp"

#include "exception_slot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace sandwich {

void ScatterData::validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (!(p.x >= 0.0 && p.x <= 1.0 && p.z >= 0.0 && p.z <= 1.0))
            throw DomainError("scatter point " + std::to_string(i) + " lies outside the unit square");
        if (!std::isfinite(p.y)) throw DomainError("scatter response " + std::to_string(i) + " is not finite");
    }
}

std::size_t BinnedGrid::empty_count() const {
    return static_cast<std::size_t>((counts.array() == 0).count());
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> BinnedGrid::empty_mask() const {
    return (counts.array() == 0).matrix();
}

GridData BinnedGrid::as_grid() const {
    return GridData{means, x_centers, z_centers};
}

Eigen::Index bin_index(double v, Eigen::Index bins) {
    const auto k = static_cast<Eigen::Index>(std::floor(v * static_cast<double>(bins)));
    return std::clamp<Eigen::Index>(k, 0, bins - 1);
}

BinnedGrid bin_scatter(const ScatterData& data, Eigen::Index bins1, Eigen::Index bins2) {
    if (bins1 < 1 || bins2 < 1) throw DomainError("bin counts must be positive");
    data.validate();
    BinnedGrid g;
    g.means = Eigen::MatrixXd::Zero(bins1, bins2);
    g.counts = Eigen::MatrixXi::Zero(bins1, bins2);
    g.x_centers = midpoints(static_cast<std::size_t>(bins1));
    g.z_centers = midpoints(static_cast<std::size_t>(bins2));
    for (const auto& p : data.points) {
        const Eigen::Index k = bin_index(p.x, bins1);
        const Eigen::Index l = bin_index(p.z, bins2);
        g.means(k, l) += p.y;
        g.counts(k, l) += 1;
    }
    for (Eigen::Index k = 0; k < bins1; ++k)
        for (Eigen::Index l = 0; l < bins2; ++l)
            if (g.counts(k, l) > 0) g.means(k, l) /= g.counts(k, l);
    return g;
}

BinnedGrid fill_nearest(const BinnedGrid& grid, const ScatterData& data, std::size_t m) {
    if (data.points.empty()) throw DomainError("cannot impute empty bins without any observations");
    if (m < 1) throw DomainError("nearest-neighbour count must be positive");
    BinnedGrid out = grid;
    const std::size_t take = std::min(m, data.points.size());
    std::vector<std::size_t> order(data.points.size());
    std::vector<double> dist(data.points.size());
    for (Eigen::Index k = 0; k < grid.rows(); ++k) {
        for (Eigen::Index l = 0; l < grid.cols(); ++l) {
            if (!grid.empty(k, l)) continue;
            const double cx = grid.x_centers[static_cast<std::size_t>(k)];
            const double cz = grid.z_centers[static_cast<std::size_t>(l)];
            for (std::size_t i = 0; i < data.points.size(); ++i) {
                const double dx = data.points[i].x - cx;
                const double dz = data.points[i].z - cz;
                dist[i] = dx * dx + dz * dz;
            }
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                              [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
            double sum = 0.0;
            for (std::size_t r = 0; r < take; ++r) sum += data.points[order[r]].y;
            out.means(k, l) = sum / static_cast<double>(take);
        }
    }
    return out;
}

Eigen::Index default_bins(std::size_t n) {
    const double target = std::min(std::sqrt(static_cast<double>(n)) / 2.0, 35.0);
    return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(target)));
}

double masked_sse(const Eigen::MatrixXd& fitted, const Eigen::MatrixXd& y, const Eigen::MatrixXi& counts) {
    if (fitted.rows() != y.rows() || fitted.cols() != y.cols() || counts.rows() != y.rows() ||
        counts.cols() != y.cols())
        throw DimensionError("masked_sse: shape mismatch");
    double acc = 0.0;
    for (Eigen::Index l = 0; l < y.cols(); ++l)
        for (Eigen::Index k = 0; k < y.rows(); ++k)
            if (counts(k, l) > 0) {
                const double r = fitted(k, l) - y(k, l);
                acc += r * r;
            }
    return acc;
}

GcvSurface masked_gcv_surface(const SandwichSmoother& smoother, const Eigen::MatrixXd& y,
                              const Eigen::MatrixXi& counts, std::span<const double> lambda1,
                              std::span<const double> lambda2) {
    const TransformedData t = smoother.transform(y);
    const auto& ax1 = smoother.axis1();
    const auto& ax2 = smoother.axis2();
    const Eigen::Index r1 = static_cast<Eigen::Index>(lambda1.size());
    const Eigen::Index r2 = static_cast<Eigen::Index>(lambda2.size());
    const double n_obs = static_cast<double>((counts.array() > 0).count());
    if (n_obs == 0.0) throw DomainError("no bin contains data");

    GcvSurface out;
    out.lambda1.assign(lambda1.begin(), lambda1.end());
    out.lambda2.assign(lambda2.begin(), lambda2.end());
    out.gcv.resize(r1, r2);
    out.sse.resize(r1, r2);
    out.edf.resize(r1, r2);

    const Eigen::MatrixXd a2t = ax2.A.transpose();
    detail::ExceptionSlot failure;
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < r1; ++i) failure.run([&] {
        const double l1 = lambda1[static_cast<std::size_t>(i)];
        const Eigen::MatrixXd left = ax1.A * (shrinkage(ax1.s, l1).asDiagonal() * t.Yt);
        const double tr1 = trace_smoother(ax1.s, l1);
        for (Eigen::Index j = 0; j < r2; ++j) {
            const double l2 = lambda2[static_cast<std::size_t>(j)];
            const Eigen::MatrixXd fitted = left * shrinkage(ax2.s, l2).asDiagonal() * a2t;
            const double sse = masked_sse(fitted, y, counts);
            const double edf = tr1 * trace_smoother(ax2.s, l2);
            out.sse(i, j) = sse;
            out.edf(i, j) = edf;
            out.gcv(i, j) = edf < n_obs ? gcv_score(sse, edf, n_obs) : std::numeric_limits<double>::infinity();
        }
    });
    failure.rethrow();
    return out;
}

IterativeFit iterative_fit(const ScatterData& data, Eigen::Index bins1, Eigen::Index bins2, const AxisSpec& spec1,
                           const AxisSpec& spec2, const LambdaGrid& grid, const IterativeOptions& options) {
    grid.validate();
    IterativeFit result;
    result.grid = bin_scatter(data, bins1, bins2);
    const SandwichSmoother smoother(result.grid.x_centers, result.grid.z_centers, spec1, spec2);

    if (result.grid.empty_count() == 0) {
        result.fit = smoother.select(result.grid.means, grid, options.search);
        result.iterations = 1;
        result.converged = true;
        result.changes.push_back(0.0);
        return result;
    }

    if (options.init == EmptyBinInit::Nearest) result.grid = fill_nearest(result.grid, data, options.nearest);

    double scale = 0.0;
    for (const auto& p : data.points) scale = std::max(scale, std::abs(p.y));
    if (scale == 0.0) scale = 1.0;
    const double threshold = options.tol * scale;

    Eigen::MatrixXd& y = result.grid.means;
    const Eigen::MatrixXi& counts = result.grid.counts;
    double l1 = 0.0, l2 = 0.0, value = 0.0;
    GcvSurface surface;

    for (std::size_t iter = 1; iter <= std::max<std::size_t>(options.max_iter, 1); ++iter) {
        surface = masked_gcv_surface(smoother, y, counts, grid.axis1, grid.axis2);
        const GridIndex best = argmin_gcv(surface);
        l1 = surface.lambda1[static_cast<std::size_t>(best.i)];
        l2 = surface.lambda2[static_cast<std::size_t>(best.j)];
        value = surface.gcv(best.i, best.j);

        const Eigen::MatrixXd fitted = smoother.fitted(smoother.transform(y), l1, l2);
        double change = 0.0;
        for (Eigen::Index l = 0; l < y.cols(); ++l)
            for (Eigen::Index k = 0; k < y.rows(); ++k)
                if (counts(k, l) == 0) {
                    change = std::max(change, std::abs(fitted(k, l) - y(k, l)));
                    y(k, l) = fitted(k, l);
                }
        result.changes.push_back(change);
        result.iterations = iter;
        if (change <= threshold) {
            result.converged = true;
            break;
        }
    }

    result.fit = smoother.fit(y, l1, l2);
    result.fit.gcv_value = value;
    result.fit.gcv_surface = std::move(surface);
    result.fit.sse = masked_sse(result.fit.fitted, y, counts);
    return result;
}

} // namespace sandwich
