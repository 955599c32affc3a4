#include "sandwich/glam.hpp"

#include "sandwich/error.hpp"
#include "sandwich/sandwich2d.hpp"

#include "exception_slot.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

namespace sandwich {

namespace {

std::size_t product(std::span<const std::size_t> dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

// Contracts the leading axis (length `lead`) of a flat array with `w`.
std::vector<double> contract_first(std::span<const double> data, std::size_t lead, const Eigen::VectorXd& w) {
    const std::size_t rest = data.size() / lead;
    std::vector<double> out(rest, 0.0);
    for (std::size_t r = 0; r < rest; ++r) {
        const double* col = data.data() + r * lead;
        double acc = 0.0;
        for (std::size_t k = 0; k < lead; ++k) acc += w(static_cast<Eigen::Index>(k)) * col[k];
        out[r] = acc;
    }
    return out;
}

// True when tuple a should replace b at equal GCV: larger λ on the last axis first.
bool smoother_tuple(std::span<const double> a, std::span<const double> b) {
    for (std::size_t k = a.size(); k-- > 0;) {
        if (a[k] > b[k]) return true;
        if (a[k] < b[k]) return false;
    }
    return false;
}

} // namespace

NdArray::NdArray(std::vector<std::size_t> dims, double fill) : shape(std::move(dims)) {
    data.assign(product(shape), fill);
}

std::size_t NdArray::offset(std::span<const std::size_t> index) const {
    if (index.size() != shape.size()) throw DimensionError("array index has the wrong rank");
    std::size_t off = 0, stride = 1;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (index[k] >= shape[k]) throw DimensionError("array index out of range");
        off += index[k] * stride;
        stride *= shape[k];
    }
    return off;
}

NdArray NdArray::from_matrix(const Eigen::MatrixXd& m) {
    NdArray out({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    Eigen::Map<Eigen::MatrixXd>(out.data.data(), m.rows(), m.cols()) = m;
    return out;
}

Eigen::MatrixXd NdArray::to_matrix() const {
    if (rank() != 2) throw DimensionError("to_matrix needs a rank-2 array");
    return Eigen::Map<const Eigen::MatrixXd>(data.data(), static_cast<Eigen::Index>(shape[0]),
                                             static_cast<Eigen::Index>(shape[1]));
}

NdArray rh(const Eigen::MatrixXd& s, const NdArray& a) {
    if (a.rank() == 0 || static_cast<std::size_t>(s.cols()) != a.shape[0])
        throw DimensionError("rh: matrix has " + std::to_string(s.cols()) + " columns but leading axis is " +
                             (a.rank() ? std::to_string(a.shape[0]) : std::string("absent")));
    const auto lead = static_cast<Eigen::Index>(a.shape[0]);
    const auto rest = static_cast<Eigen::Index>(a.size() / a.shape[0]);
    std::vector<std::size_t> dims(a.shape.begin() + 1, a.shape.end());
    dims.push_back(static_cast<std::size_t>(s.rows()));
    NdArray out(std::move(dims));
    const Eigen::Map<const Eigen::MatrixXd> in(a.data.data(), lead, rest);
    Eigen::Map<Eigen::MatrixXd>(out.data.data(), rest, s.rows()) = (s * in).transpose();
    return out;
}

NdArray mode_product(const Eigen::MatrixXd& s, const NdArray& a, std::size_t axis) {
    if (axis >= a.rank() || static_cast<std::size_t>(s.cols()) != a.shape[axis])
        throw DimensionError("mode_product: axis length does not match matrix");
    const std::size_t pre = product(std::span(a.shape).first(axis));
    const std::size_t post = product(std::span(a.shape).subspan(axis + 1));
    const std::size_t len = a.shape[axis];
    std::vector<std::size_t> dims = a.shape;
    dims[axis] = static_cast<std::size_t>(s.rows());
    NdArray out(dims);
    const std::size_t m = dims[axis];
    for (std::size_t q = 0; q < post; ++q)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t i = 0; i < len; ++i) {
                const double w = s(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
                if (w == 0.0) continue;
                const double* src = a.data.data() + (q * len + i) * pre;
                double* dst = out.data.data() + (q * m + j) * pre;
                for (std::size_t p = 0; p < pre; ++p) dst[p] += w * src[p];
            }
    return out;
}

void ArrayData::validate() const {
    if (values.rank() < 2) throw DimensionError("array data needs at least two dimensions");
    if (coords.size() != values.rank())
        throw DimensionError("array has " + std::to_string(values.rank()) + " axes but " +
                             std::to_string(coords.size()) + " coordinate lists");
    for (std::size_t k = 0; k < coords.size(); ++k) {
        if (coords[k].size() != values.shape[k])
            throw DimensionError("axis " + std::to_string(k) + " coordinate count does not match the array shape");
        for (std::size_t i = 0; i < coords[k].size(); ++i) {
            if (!(coords[k][i] >= 0.0 && coords[k][i] <= 1.0))
                throw DomainError("axis " + std::to_string(k) + " coordinate outside [0,1]");
            if (i > 0 && !(coords[k][i] > coords[k][i - 1]))
                throw DomainError("axis " + std::to_string(k) + " coordinates must be strictly increasing");
        }
    }
    for (double v : values.data)
        if (!std::isfinite(v)) throw DomainError("array values must be finite");
}

ArrayData ArrayData::on_midpoints(NdArray values) {
    ArrayData out;
    for (std::size_t n : values.shape) out.coords.push_back(midpoints(n));
    out.values = std::move(values);
    return out;
}

std::size_t default_lambda_count(std::size_t dims) {
    if (dims <= 2) return 20;
    if (dims == 3) return 10;
    if (dims == 4) return 6;
    return 4;
}

std::vector<std::vector<double>> default_lambda_grids(std::size_t dims) {
    return std::vector<std::vector<double>>(dims, LambdaGrid::log_spaced(default_lambda_count(dims), -5.0, 4.0));
}

ArraySmoother::ArraySmoother(const std::vector<std::vector<double>>& coords, std::span<const AxisSpec> specs) {
    if (coords.size() != specs.size())
        throw DimensionError("need one axis spec per array axis (" + std::to_string(coords.size()) + " axes, " +
                             std::to_string(specs.size()) + " specs)");
    axes_.reserve(coords.size());
    for (std::size_t k = 0; k < coords.size(); ++k) axes_.push_back(build_axis_spectrum(coords[k], specs[k]));
}

NdArray ArraySmoother::transform(const NdArray& y, double* yty) const {
    if (y.rank() != axes_.size()) throw DimensionError("array rank does not match the smoother");
    NdArray x = y;
    for (const auto& ax : axes_) x = rh(ax.A.transpose(), x);
    if (yty) *yty = std::inner_product(y.data.begin(), y.data.end(), y.data.begin(), 0.0);
    return x;
}

double ArraySmoother::sse(const NdArray& transformed, double yty, std::span<const double> lambdas) const {
    if (lambdas.size() != axes_.size()) throw DimensionError("need one lambda per axis");
    std::vector<double> w(transformed.data.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = transformed.data[i] * transformed.data[i];
    std::vector<double> fsq = w, cross = std::move(w);
    for (std::size_t k = 0; k < axes_.size(); ++k) {
        const Eigen::VectorXd a = shrinkage(axes_[k].s, lambdas[k]);
        const auto lead = static_cast<std::size_t>(axes_[k].c());
        fsq = contract_first(fsq, lead, a.array().square().matrix());
        cross = contract_first(cross, lead, a);
    }
    return SseTerms{fsq[0], cross[0], yty}.sse();
}

double ArraySmoother::edf(std::span<const double> lambdas) const {
    if (lambdas.size() != axes_.size()) throw DimensionError("need one lambda per axis");
    double tr = 1.0;
    for (std::size_t k = 0; k < axes_.size(); ++k) tr *= trace_smoother(axes_[k].s, lambdas[k]);
    return tr;
}

NdArray ArraySmoother::fitted(const NdArray& transformed, std::span<const double> lambdas) const {
    if (lambdas.size() != axes_.size()) throw DimensionError("need one lambda per axis");
    NdArray x = transformed;
    for (std::size_t k = 0; k < axes_.size(); ++k)
        x = rh(axes_[k].A * shrinkage(axes_[k].s, lambdas[k]).asDiagonal(), x);
    return x;
}

MultiFit fit_array(const ArrayData& data, std::span<const AxisSpec> specs,
                   const std::vector<std::vector<double>>& grids) {
    data.validate();
    const std::size_t d = data.values.rank();
    if (grids.size() != d) throw DimensionError("need one lambda list per axis");
    std::size_t combos = 1;
    for (const auto& g : grids) {
        if (g.empty()) throw DomainError("lambda lists must be nonempty");
        for (double v : g)
            if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("lambda values must be positive and finite");
        combos *= g.size();
        if (combos > kMaxLambdaCombinations)
            throw GridExplosionError("lambda grid has more than " + std::to_string(kMaxLambdaCombinations) +
                                     " combinations");
    }

    const ArraySmoother smoother(data.coords, specs);
    double yty = 0.0;
    const NdArray yt = smoother.transform(data.values, &yty);
    const double n = static_cast<double>(data.values.size());

    std::vector<double> w(yt.data.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = yt.data[i] * yt.data[i];

    // Per-axis shrinkage and traces, reused by every tuple.
    std::vector<std::vector<Eigen::VectorXd>> shrink(d), shrink_sq(d);
    std::vector<std::vector<double>> traces(d);
    for (std::size_t k = 0; k < d; ++k)
        for (double lam : grids[k]) {
            shrink[k].push_back(shrinkage(smoother.axis(k).s, lam));
            shrink_sq[k].push_back(shrink[k].back().array().square().matrix());
            traces[k].push_back(trace_smoother(smoother.axis(k).s, lam));
        }

    MultiFit out;
    out.gcv_values.assign(combos, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> strides(d, 1);
    for (std::size_t k = 1; k < d; ++k) strides[k] = strides[k - 1] * grids[k - 1].size();

    // Depth-first over axes: partial contractions along the leading axes are shared by all deeper tuples.
    std::function<void(std::size_t, const std::vector<double>&, const std::vector<double>&, std::size_t, double)>
        descend = [&](std::size_t k, const std::vector<double>& fsq, const std::vector<double>& cross,
                      std::size_t flat, double edf) {
            const auto lead = static_cast<std::size_t>(smoother.axis(k).c());
            for (std::size_t g = 0; g < grids[k].size(); ++g) {
                const std::vector<double> f2 = contract_first(fsq, lead, shrink_sq[k][g]);
                const std::vector<double> c2 = contract_first(cross, lead, shrink[k][g]);
                const std::size_t idx = flat + g * strides[k];
                const double e = edf * traces[k][g];
                if (k + 1 < d) {
                    descend(k + 1, f2, c2, idx, e);
                } else {
                    const double sse = SseTerms{f2[0], c2[0], yty}.sse();
                    out.gcv_values[idx] = e < n ? gcv_score(sse, e, n) : std::numeric_limits<double>::infinity();
                }
            }
        };

    detail::ExceptionSlot failure;
    const auto lead0 = static_cast<std::size_t>(smoother.axis(0).c());
    const auto g0 = static_cast<std::ptrdiff_t>(grids[0].size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t g = 0; g < g0; ++g) failure.run([&] {
        const auto gi = static_cast<std::size_t>(g);
        const std::vector<double> f1 = contract_first(w, lead0, shrink_sq[0][gi]);
        const std::vector<double> c1 = contract_first(w, lead0, shrink[0][gi]);
        descend(1, f1, c1, gi, traces[0][gi]);
    });
    failure.rethrow();

    std::size_t best = combos;
    std::vector<double> best_tuple(d), tuple(d);
    for (std::size_t flat = 0; flat < combos; ++flat) {
        const double v = out.gcv_values[flat];
        if (!std::isfinite(v)) continue;
        for (std::size_t k = 0, rem = flat; k < d; ++k) {
            tuple[k] = grids[k][rem % grids[k].size()];
            rem /= grids[k].size();
        }
        if (best == combos || v < out.gcv_values[best] ||
            (v == out.gcv_values[best] && smoother_tuple(tuple, best_tuple))) {
            best = flat;
            best_tuple = tuple;
        }
    }
    if (best == combos) throw DegenerateFitError("GCV is undefined at every lambda tuple (smoother saturates the data)");

    out.lambdas = best_tuple;
    out.gcv_value = out.gcv_values[best];
    out.edf = smoother.edf(best_tuple);
    out.fitted = smoother.fitted(yt, best_tuple);
    double sse = 0.0;
    for (std::size_t i = 0; i < out.fitted.size(); ++i) {
        const double r = out.fitted.data[i] - data.values.data[i];
        sse += r * r;
    }
    out.sse = sse;
    return out;
}

} // namespace sandwich
