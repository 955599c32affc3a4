#include "sandwich/fda.hpp"

#include "sandwich/error.hpp"
#include "sandwich/rng.hpp"
#include "sandwich/sandwich2d.hpp"
#include "sandwich/spectra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace sandwich {

void CurveSet::validate() const {
    if (Y.cols() < 2) throw DimensionError("curves need at least two sample points");
    if (static_cast<Eigen::Index>(t.size()) != Y.cols())
        throw DimensionError("curve grid has " + std::to_string(t.size()) + " points but curves have " +
                             std::to_string(Y.cols()));
    if (!Y.allFinite()) throw DomainError("curve values must be finite");
}

Eigen::MatrixXd sample_cov(const CurveSet& curves, bool center) {
    curves.validate();
    const Eigen::Index n = curves.Y.rows();
    if (n < 2) throw DomainError("sample covariance needs at least two curves, got " + std::to_string(n));
    if (!center) return curves.Y.transpose() * curves.Y / static_cast<double>(n);
    const Eigen::MatrixXd centered = curves.Y.rowwise() - curves.Y.colwise().mean();
    return centered.transpose() * centered / static_cast<double>(n);
}

AxisSpec default_cov_spec(std::size_t j) {
    AxisSpec spec;
    spec.segments = AxisSpec::auto_segments(j, spec.degree, spec.penalty_order);
    return spec;
}

CovModel smooth_cov(const Eigen::MatrixXd& cov, const AxisSpec& spec, const std::vector<double>& lambdas,
                    const CovSmoothOptions& options, std::optional<std::vector<double>> t) {
    if (cov.rows() != cov.cols()) throw DimensionError("covariance matrix must be square");
    if (lambdas.empty()) throw DomainError("need at least one candidate lambda");
    const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-8) throw DomainError("covariance matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
    const auto j = static_cast<std::size_t>(cov.rows());

    CovModel model;
    model.raw_cov = cov;
    model.spec = spec;
    model.t = t ? std::move(*t) : midpoints(j);
    if (model.t.size() != j) throw DimensionError("grid length does not match the covariance matrix");

    Eigen::MatrixXd input = cov;
    if (options.exclude_diagonal && j > 1) {
        for (std::size_t a = 0; a < j; ++a) {
            const auto i = static_cast<Eigen::Index>(a);
            double sum = 0.0;
            int count = 0;
            if (a > 0) sum += cov(i - 1, i), ++count;
            if (a + 1 < j) sum += cov(i, i + 1), ++count;
            input(i, i) = sum / count;
        }
    }

    const AxisSpectrum axis = build_axis_spectrum(model.t, spec);
    const SandwichSmoother smoother(axis, axis);
    const TransformedData td = smoother.transform(input);
    const double n = static_cast<double>(j) * static_cast<double>(j);

    model.lambda_grid = lambdas;
    model.gcv_path.resize(lambdas.size());
    std::size_t best = lambdas.size();
    for (std::size_t r = 0; r < lambdas.size(); ++r) {
        if (!(lambdas[r] >= 0.0)) throw DomainError("lambda values must be nonnegative");
        const double sse = sse_fast(td, axis.s, axis.s, lambdas[r], lambdas[r]);
        const double tr = trace_smoother(axis.s, lambdas[r]);
        const double edf = tr * tr;
        model.gcv_path[r] = edf < n ? gcv_score(sse, edf, n) : std::numeric_limits<double>::infinity();
        if (!std::isfinite(model.gcv_path[r])) continue;
        if (best == lambdas.size() || model.gcv_path[r] < model.gcv_path[best] ||
            (model.gcv_path[r] == model.gcv_path[best] && lambdas[r] > lambdas[best]))
            best = r;
    }
    if (best == lambdas.size()) {
        // Every candidate interpolates (edf = J²); only the identity smoother does that, so any choice is the raw matrix.
        best = static_cast<std::size_t>(std::max_element(lambdas.begin(), lambdas.end()) - lambdas.begin());
    }

    model.lambda = lambdas[best];
    model.gcv_value = model.gcv_path[best];
    const double tr = trace_smoother(axis.s, model.lambda);
    model.edf = tr * tr;
    const Eigen::MatrixXd smoothed = smoother.fitted(td, model.lambda, model.lambda);
    model.smoothed_cov = 0.5 * (smoothed + smoothed.transpose());
    return model;
}

std::vector<EigenPair> eigenpairs(const Eigen::MatrixXd& cov, std::size_t k,
                                  const std::vector<Eigen::VectorXd>& reference) {
    if (cov.rows() != cov.cols()) throw DimensionError("eigenpairs needs a square matrix");
    const auto j = static_cast<std::size_t>(cov.rows());
    if (k > j) throw DomainError("requested " + std::to_string(k) + " eigenpairs from a " + std::to_string(j) + "-point grid");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (cov + cov.transpose()));
    if (eig.info() != Eigen::Success) throw ConsistencyError("covariance eigendecomposition failed");

    const double jd = static_cast<double>(j);
    std::vector<EigenPair> out;
    out.reserve(k);
    for (std::size_t r = 0; r < k; ++r) {
        const auto col = static_cast<Eigen::Index>(j - 1 - r);  // eigenvalues come out ascending
        EigenPair pair;
        pair.value = eig.eigenvalues()(col) / jd;
        pair.function = std::sqrt(jd) * eig.eigenvectors().col(col);
        bool flip = false;
        if (r < reference.size() && reference[r].size() == pair.function.size()) {
            flip = pair.function.dot(reference[r]) < 0.0;
        } else {
            for (Eigen::Index i = 0; i < pair.function.size(); ++i)
                if (std::abs(pair.function(i)) > 1e-12) {
                    flip = pair.function(i) < 0.0;
                    break;
                }
        }
        if (flip) pair.function = -pair.function;
        out.push_back(std::move(pair));
    }
    return out;
}

std::vector<EigenPair> eigenpairs(const CovModel& model, std::size_t k, const std::vector<Eigen::VectorXd>& reference) {
    return eigenpairs(model.smoothed_cov, k, reference);
}

double fda_eigenfunction(int fda_case, int k, double t) {
    constexpr double pi = std::numbers::pi;
    if (fda_case == 1) {
        const double r2 = std::numbers::sqrt2;
        switch (k) {
        case 0: return r2 * std::sin(2 * pi * t);
        case 1: return r2 * std::cos(2 * pi * t);
        case 2: return r2 * std::sin(4 * pi * t);
        case 3: return r2 * std::cos(4 * pi * t);
        default: break;
        }
    } else if (fda_case == 2) {
        switch (k) {
        case 0: return 1.0;
        case 1: return std::sqrt(3.0) * (2 * t - 1);
        case 2: return std::sqrt(5.0) * (6 * t * t - 6 * t + 1);
        case 3: return std::sqrt(7.0) * (20 * t * t * t - 30 * t * t + 12 * t - 1);
        default: break;
        }
    } else {
        throw DomainError("simulation case must be 1 or 2, got " + std::to_string(fda_case));
    }
    throw DomainError("eigenfunction index must be in 0..3, got " + std::to_string(k));
}

Eigen::MatrixXd true_covariance(int fda_case, const std::vector<double>& t) {
    const auto j = static_cast<Eigen::Index>(t.size());
    Eigen::MatrixXd psi(j, 4);
    for (Eigen::Index a = 0; a < j; ++a)
        for (int k = 0; k < 4; ++k) psi(a, k) = fda_eigenfunction(fda_case, k, t[static_cast<std::size_t>(a)]);
    const Eigen::Vector4d lam(kFdaEigenvalues[0], kFdaEigenvalues[1], kFdaEigenvalues[2], kFdaEigenvalues[3]);
    return psi * lam.asDiagonal() * psi.transpose();
}

CurveSet simulate_fda(int fda_case, std::size_t n, std::size_t j, double sigma, std::uint64_t seed) {
    if (fda_case != 1 && fda_case != 2) throw DomainError("simulation case must be 1 or 2");
    CurveSet out;
    out.t = midpoints(j);
    const auto jn = static_cast<Eigen::Index>(j);
    Eigen::MatrixXd psi(jn, 4);
    for (Eigen::Index a = 0; a < jn; ++a)
        for (int k = 0; k < 4; ++k) psi(a, k) = fda_eigenfunction(fda_case, k, out.t[static_cast<std::size_t>(a)]);

    out.Y.resize(static_cast<Eigen::Index>(n), jn);
    CounterRng rng(seed);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
        Eigen::Vector4d score;
        for (int k = 0; k < 4; ++k) score(k) = std::sqrt(kFdaEigenvalues[k]) * rng.normal();
        out.Y.row(i) = (psi * score).transpose();
        // Noise is always drawn so runs that differ only in sigma share their curves.
        for (Eigen::Index a = 0; a < jn; ++a) out.Y(i, a) += sigma * rng.normal();
    }
    return out;
}

double covariance_ise(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth) {
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
        throw DimensionError("covariance_ise: shape mismatch");
    return (estimate - truth).squaredNorm() / static_cast<double>(estimate.size());
}

} // namespace sandwich
