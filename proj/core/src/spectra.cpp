#include "sandwich/spectra.hpp"

#include "sandwich/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace sandwich {

namespace {

constexpr double kGramTolerance = 1e-10;
constexpr double kNullClamp = 1e-12;

[[noreturn]] void throw_singular(const Eigen::MatrixXd& gram, const Eigen::VectorXd& evec, double ratio) {
    // Basis functions with no data under them have an all-zero Gram row; those are the usual culprits.
    std::vector<std::size_t> idx;
    const char* label = "unsupported basis indices:";
    for (Eigen::Index k = 0; k < gram.rows(); ++k)
        if (gram(k, k) == 0.0) idx.push_back(static_cast<std::size_t>(k));
    if (idx.empty()) {
        label = "more basis functions than the data can identify; dominant indices in the null direction:";
        const double peak = evec.cwiseAbs().maxCoeff();
        for (Eigen::Index k = 0; k < evec.size(); ++k)
            if (std::abs(evec(k)) >= 0.5 * peak) idx.push_back(static_cast<std::size_t>(k));
    }
    std::ostringstream msg;
    msg << "singular Gram matrix (eigenvalue ratio " << ratio << "); " << label;
    for (auto k : idx) msg << ' ' << k;
    throw SingularGramError(msg.str(), std::move(idx));
}

} // namespace

Eigen::MatrixXd half_inverse(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw DimensionError("half_inverse needs a square matrix");
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.info() != Eigen::Success) throw ConsistencyError("eigendecomposition failed in half_inverse");
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double top = ev.maxCoeff();
    if (!(top > 0.0) || ev.minCoeff() < kGramTolerance * top)
        throw_singular(m, eig.eigenvectors().col(0), top > 0.0 ? ev.minCoeff() / top : 0.0);
    const Eigen::MatrixXd& v = eig.eigenvectors();
    Eigen::MatrixXd out = v * ev.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
    return 0.5 * (out + out.transpose());
}

AxisSpectrum build_spectrum(const Eigen::MatrixXd& b, const Eigen::MatrixXd& d) {
    if (d.cols() != b.cols())
        throw DimensionError("difference matrix has " + std::to_string(d.cols()) + " columns, basis has " +
                             std::to_string(b.cols()));
    const Eigen::MatrixXd gram = b.transpose() * b;
    const Eigen::MatrixXd g_half_inv = half_inverse(gram);

    Eigen::MatrixXd pen = g_half_inv * (d.transpose() * d) * g_half_inv;
    pen = 0.5 * (pen + pen.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(pen);
    if (eig.info() != Eigen::Success) throw ConsistencyError("penalty eigendecomposition failed");

    AxisSpectrum out;
    out.s = eig.eigenvalues();
    const double top = out.s.maxCoeff();
    for (Eigen::Index k = 0; k < out.s.size(); ++k)
        if (out.s(k) < kNullClamp * top) out.s(k) = 0.0;
    out.coef_map = g_half_inv * eig.eigenvectors();
    out.A = b * out.coef_map;
    return out;
}

AxisSpectrum build_axis_spectrum(std::span<const double> points, const AxisSpec& spec) {
    spec.validate();
    AxisSpectrum out = build_spectrum(design_matrix(points, spec), diff_matrix(spec.size(), spec.penalty_order));
    out.spec = spec;
    return out;
}

Eigen::VectorXd shrinkage(const Eigen::VectorXd& s, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("smoothing parameter must be nonnegative");
    return (1.0 + lambda * s.array()).inverse().matrix();
}

Eigen::MatrixXd apply_smoother(const AxisSpectrum& spectrum, double lambda, const Eigen::MatrixXd& v) {
    if (v.rows() != spectrum.n())
        throw DimensionError("apply_smoother: input has " + std::to_string(v.rows()) + " rows, expected " +
                             std::to_string(spectrum.n()));
    const Eigen::VectorXd w = shrinkage(spectrum.s, lambda);
    return spectrum.A * (w.asDiagonal() * (spectrum.A.transpose() * v));
}

double trace_smoother(const Eigen::VectorXd& s, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("smoothing parameter must be nonnegative");
    double tr = 0.0;
    for (Eigen::Index k = 0; k < s.size(); ++k) tr += 1.0 / (1.0 + lambda * s(k));
    return tr;
}

Eigen::MatrixXd smoother_matrix(const AxisSpectrum& spectrum, double lambda) {
    const Eigen::VectorXd w = shrinkage(spectrum.s, lambda);
    return spectrum.A * w.asDiagonal() * spectrum.A.transpose();
}

} // namespace sandwich
