#include "cli.hpp"

#include "io.hpp"

#include "sandwich/binning.hpp"
#include "sandwich/error.hpp"
#include "sandwich/fda.hpp"
#include "sandwich/glam.hpp"
#include "sandwich/kernelcheck.hpp"
#include "sandwich/parallel.hpp"
#include "sandwich/rng.hpp"
#include "sandwich/sandwich2d.hpp"
#include "sandwich/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace sandwich::cli {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct Common {
    int degree = 3;
    int penalty_order = 2;
    std::string knots = "auto";
    std::string lambda_grid;
    std::size_t fine_pass = 0;
    std::uint64_t seed = 1;
    std::size_t reps = 100;
    int threads = 0;
    bool emit_plotdata = false;
    bool no_timings = false;
    std::string output;
};

struct LambdaRange {
    std::size_t count = 20;
    double lo = -5.0;
    double hi = 4.0;

    std::vector<double> values() const { return LambdaGrid::log_spaced(count, lo, hi); }
    Json json() const { return Json{{"count", count}, {"log10_lo", lo}, {"log10_hi", hi}}; }
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError(what + ": not a number: '" + s + "'");
    }
}

long to_long(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const long v = std::stol(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError(what + ": not an integer: '" + s + "'");
    }
}

LambdaRange parse_lambda_range(const std::string& text, std::size_t default_count) {
    LambdaRange r;
    r.count = default_count;
    if (text.empty()) return r;
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw UsageError("--lambda-grid expects COUNT:LOG10_LO:LOG10_HI, got '" + text + "'");
    const long count = to_long(parts[0], "--lambda-grid count");
    if (count < 1) throw UsageError("--lambda-grid count must be positive");
    r.count = static_cast<std::size_t>(count);
    r.lo = to_double(parts[1], "--lambda-grid lower bound");
    r.hi = to_double(parts[2], "--lambda-grid upper bound");
    if (!(r.lo <= r.hi)) throw UsageError("--lambda-grid lower bound exceeds upper bound");
    return r;
}

/// "auto" gives min{n_k/2, 35} per axis; one number applies to every axis; otherwise one per axis.
std::vector<AxisSpec> resolve_specs(const Common& c, const std::vector<std::size_t>& sizes) {
    std::vector<AxisSpec> specs(sizes.size());
    std::vector<int> segments;
    if (c.knots != "auto") {
        for (const auto& part : split(c.knots, ',')) {
            const long k = to_long(part, "--knots");
            if (k < 1) throw UsageError("--knots values must be positive");
            segments.push_back(static_cast<int>(k));
        }
        if (segments.size() != 1 && segments.size() != sizes.size())
            throw UsageError("--knots needs 1 or " + std::to_string(sizes.size()) + " values, got " +
                             std::to_string(segments.size()));
    }
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        specs[k].degree = c.degree;
        specs[k].penalty_order = c.penalty_order;
        if (segments.empty())
            specs[k].segments = AxisSpec::auto_segments(sizes[k], c.degree, c.penalty_order);
        else
            specs[k].segments = segments.size() == 1 ? segments[0] : segments[k];
        specs[k].validate();
    }
    return specs;
}

SearchOptions search_options(const Common& c) {
    SearchOptions o;
    if (c.fine_pass > 0) o.fine = FinePass{c.fine_pass, 0.0};
    return o;
}

Json spec_json(const std::vector<AxisSpec>& specs) {
    Json seg = Json::array();
    for (const auto& s : specs) seg.push_back(s.segments);
    return Json{{"degree", specs.front().degree}, {"penalty_order", specs.front().penalty_order}, {"segments", seg}};
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void finish_summary(const Common& c, Json& summary, Clock::time_point t0, std::ostream& out) {
    if (!c.no_timings) summary["timings"] = Json{{"total_seconds", seconds_since(t0)}};
    const std::string text = summary.dump(2) + "\n";
    if (!c.output.empty()) write_text(c.output + ".summary.json", text);
    out << text;
}

std::string require_output(const Common& c, const char* what) {
    if (c.output.empty() && c.emit_plotdata)
        throw UsageError(std::string("--emit-plotdata needs --output to name the ") + what + " files");
    return c.output;
}

int cmd_smooth_grid(const Common& c, const std::string& input, std::ostream& out) {
    const auto t0 = Clock::now();
    const GridData data = read_grid_csv(input);
    data.validate();
    require_output(c, "plot");
    const auto specs = resolve_specs(c, {static_cast<std::size_t>(data.Y.rows()), static_cast<std::size_t>(data.Y.cols())});
    const LambdaRange range = parse_lambda_range(c.lambda_grid, 20);
    const LambdaGrid grid{range.values(), range.values()};
    const SandwichFit fit = select_lambda(data, specs[0], specs[1], grid, search_options(c));

    if (!c.output.empty()) {
        write_grid_csv(c.output + ".fitted.csv", fit.fitted, data.x, data.z);
        if (c.emit_plotdata) {
            write_gcv_csv(c.output + ".gcv.csv", fit.gcv_surface);
            std::ostringstream plot;
            plot << "x,z,observed,fitted\n";
            for (Eigen::Index i = 0; i < data.Y.rows(); ++i)
                for (Eigen::Index j = 0; j < data.Y.cols(); ++j)
                    plot << format_double(data.x[static_cast<std::size_t>(i)]) << ','
                         << format_double(data.z[static_cast<std::size_t>(j)]) << ',' << format_double(data.Y(i, j))
                         << ',' << format_double(fit.fitted(i, j)) << '\n';
            write_text(c.output + ".plot.csv", plot.str());
        }
    }
    Json summary{{"command", "smooth-grid"},
                 {"n1", data.Y.rows()},
                 {"n2", data.Y.cols()},
                 {"spec", spec_json(specs)},
                 {"lambda_grid", range.json()},
                 {"fine_pass", c.fine_pass},
                 {"lambda1", fit.lambda1},
                 {"lambda2", fit.lambda2},
                 {"edf", fit.edf},
                 {"gcv", fit.gcv_value},
                 {"sse", fit.sse}};
    finish_summary(c, summary, t0, out);
    return kSuccess;
}

struct ScatterOptions {
    std::string bins = "auto";
    std::size_t nearest = 3;
    std::size_t max_iter = 20;
    std::string init = "nearest";
};

int cmd_smooth_scatter(const Common& c, const std::string& input, const ScatterOptions& so, std::ostream& out) {
    const auto t0 = Clock::now();
    const ScatterData data = read_scatter_csv(input);
    data.validate();
    require_output(c, "plot");
    Eigen::Index b1 = default_bins(data.size()), b2 = b1;
    if (so.bins != "auto") {
        const auto parts = split(so.bins, ',');
        if (parts.size() != 1 && parts.size() != 2) throw UsageError("--bins expects auto, I or I1,I2");
        b1 = to_long(parts[0], "--bins");
        b2 = parts.size() == 2 ? to_long(parts[1], "--bins") : b1;
        if (b1 < 1 || b2 < 1) throw UsageError("--bins values must be positive");
    }
    IterativeOptions opts;
    if (so.init == "zero")
        opts.init = EmptyBinInit::Zero;
    else if (so.init != "nearest")
        throw UsageError("--init must be 'zero' or 'nearest'");
    opts.nearest = so.nearest;
    opts.max_iter = so.max_iter;
    opts.search = search_options(c);
    const auto specs = resolve_specs(c, {static_cast<std::size_t>(b1), static_cast<std::size_t>(b2)});
    const LambdaRange range = parse_lambda_range(c.lambda_grid, 20);
    const IterativeFit res =
        iterative_fit(data, b1, b2, specs[0], specs[1], LambdaGrid{range.values(), range.values()}, opts);

    if (!c.output.empty()) {
        write_grid_csv(c.output + ".fitted.csv", res.fit.fitted, res.grid.x_centers, res.grid.z_centers);
        if (c.emit_plotdata) {
            write_gcv_csv(c.output + ".gcv.csv", res.fit.gcv_surface);
            write_grid_csv(c.output + ".binned.csv", res.grid.means, res.grid.x_centers, res.grid.z_centers);
        }
    }
    Json changes = Json::array();
    for (double v : res.changes) changes.push_back(v);
    Json summary{{"command", "smooth-scatter"},
                 {"points", data.size()},
                 {"bins", {b1, b2}},
                 {"empty_bins", res.grid.empty_count()},
                 {"spec", spec_json(specs)},
                 {"lambda_grid", range.json()},
                 {"lambda1", res.fit.lambda1},
                 {"lambda2", res.fit.lambda2},
                 {"edf", res.fit.edf},
                 {"gcv", res.fit.gcv_value},
                 {"sse", res.fit.sse},
                 {"iterations", res.iterations},
                 {"converged", res.converged},
                 {"changes", changes}};
    finish_summary(c, summary, t0, out);
    return kSuccess;
}

struct CovOptions {
    bool center = false;
    bool exclude_diagonal = false;
    std::size_t components = 4;
};

int cmd_smooth_cov(const Common& c, const std::string& input, const CovOptions& co, std::ostream& out) {
    const auto t0 = Clock::now();
    const CurveSet curves = read_curves_csv(input);
    curves.validate();
    require_output(c, "plot");
    const auto j = static_cast<std::size_t>(curves.Y.cols());
    const auto specs = resolve_specs(c, {j});
    const LambdaRange range = parse_lambda_range(c.lambda_grid, 20);
    CovSmoothOptions opts;
    opts.exclude_diagonal = co.exclude_diagonal;
    const CovModel model = smooth_cov(sample_cov(curves, co.center), specs[0], range.values(), opts, curves.t);
    const std::size_t k = std::min(co.components, j);
    const auto pairs = eigenpairs(model, k);

    Json values = Json::array();
    for (const auto& p : pairs) values.push_back(p.value);
    if (!c.output.empty()) {
        write_grid_csv(c.output + ".smoothed.csv", model.smoothed_cov, model.t, model.t);
        std::ostringstream eig;
        eig << "component,eigenvalue";
        for (double t : model.t) eig << ",t:" << format_double(t);
        eig << '\n';
        for (std::size_t r = 0; r < pairs.size(); ++r) {
            eig << r + 1 << ',' << format_double(pairs[r].value);
            for (Eigen::Index a = 0; a < pairs[r].function.size(); ++a) eig << ',' << format_double(pairs[r].function(a));
            eig << '\n';
        }
        write_text(c.output + ".eigen.csv", eig.str());
        if (c.emit_plotdata) {
            std::ostringstream path;
            path << "lambda,gcv\n";
            for (std::size_t r = 0; r < model.lambda_grid.size(); ++r)
                path << format_double(model.lambda_grid[r]) << ',' << format_double(model.gcv_path[r]) << '\n';
            write_text(c.output + ".gcv.csv", path.str());
        }
    }
    Json summary{{"command", "smooth-cov"},
                 {"curves", curves.Y.rows()},
                 {"points", j},
                 {"center", co.center},
                 {"exclude_diagonal", co.exclude_diagonal},
                 {"spec", spec_json(specs)},
                 {"lambda_grid", range.json()},
                 {"lambda", model.lambda},
                 {"edf", model.edf},
                 {"gcv", model.gcv_value},
                 {"eigenvalues", values}};
    finish_summary(c, summary, t0, out);
    return kSuccess;
}

int cmd_smooth_array(const Common& c, const std::string& input, std::ostream& out) {
    const auto t0 = Clock::now();
    const ArrayData data = read_array_csv(input);
    data.validate();
    require_output(c, "plot");
    const auto specs = resolve_specs(c, data.values.shape);
    const LambdaRange range = parse_lambda_range(c.lambda_grid, default_lambda_count(data.values.rank()));
    const std::vector<std::vector<double>> grids(data.values.rank(), range.values());
    const MultiFit fit = fit_array(data, specs, grids);

    if (!c.output.empty()) {
        write_array_csv(c.output + ".fitted.csv", fit.fitted, data.coords);
        if (c.emit_plotdata) {
            std::ostringstream g;
            for (std::size_t k = 0; k < data.values.rank(); ++k) g << "lambda" << k + 1 << ',';
            g << "gcv\n";
            const std::size_t d = data.values.rank();
            for (std::size_t flat = 0; flat < fit.gcv_values.size(); ++flat) {
                std::size_t rem = flat;
                for (std::size_t k = 0; k < d; ++k) {
                    g << format_double(grids[k][rem % grids[k].size()]) << ',';
                    rem /= grids[k].size();
                }
                g << format_double(fit.gcv_values[flat]) << '\n';
            }
            write_text(c.output + ".gcv.csv", g.str());
        }
    }
    Json shape = Json::array();
    for (auto s : data.values.shape) shape.push_back(s);
    Json summary{{"command", "smooth-array"},
                 {"shape", shape},
                 {"spec", spec_json(specs)},
                 {"lambda_grid", range.json()},
                 {"lambdas", fit.lambdas},
                 {"edf", fit.edf},
                 {"gcv", fit.gcv_value},
                 {"sse", fit.sse}};
    finish_summary(c, summary, t0, out);
    return kSuccess;
}

struct SimulateOptions {
    std::string study = "surface";
    std::string function = "f1";
    std::optional<double> sigma;
    std::size_t n1 = 20;
    std::size_t n2 = 30;
    int fda_case = 1;
    std::size_t curves = 25;
    std::size_t points = 20;
    bool center = false;
    bool exclude_diagonal = false;
};

void write_replicates(const Common& c, const StudyResult& r) {
    if (c.output.empty()) return;
    std::ostringstream s;
    s << "replicate,ise,lambda1,lambda2\n";
    for (std::size_t k = 0; k < r.ise.size(); ++k)
        s << k << ',' << format_double(r.ise[k]) << ',' << format_double(r.lambda1[k]) << ','
          << format_double(r.lambda2[k]) << '\n';
    write_text(c.output + ".replicates.csv", s.str());
}

int cmd_simulate(const Common& c, const SimulateOptions& so, std::ostream& out) {
    const auto t0 = Clock::now();
    if (c.reps < 1) throw UsageError("--reps must be positive");
    Json summary{{"command", "simulate"}, {"study", so.study}, {"seed", c.seed}, {"reps", c.reps}};
    const LambdaRange range = parse_lambda_range(c.lambda_grid, 20);
    if (so.study == "surface") {
        SurfaceStudyConfig cfg;
        try {
            cfg.function = parse_test_function(so.function);
        } catch (const DomainError& e) {
            throw UsageError(e.what());
        }
        cfg.n1 = so.n1;
        cfg.n2 = so.n2;
        cfg.sigma = so.sigma.value_or(0.1);
        cfg.reps = c.reps;
        cfg.seed = c.seed;
        const auto specs = resolve_specs(c, {so.n1, so.n2});
        cfg.spec1 = specs[0];
        cfg.spec2 = specs[1];
        cfg.grid = LambdaGrid{range.values(), range.values()};
        cfg.search = search_options(c);
        const StudyResult r = run_surface_study(cfg);
        write_replicates(c, r);
        summary["function"] = so.function;
        summary["sigma"] = cfg.sigma;
        summary["n1"] = so.n1;
        summary["n2"] = so.n2;
        summary["spec"] = spec_json(specs);
        summary["lambda_grid"] = range.json();
        summary["mise"] = r.mean;
        summary["sd"] = r.sd;
    } else if (so.study == "covariance") {
        if (so.fda_case != 1 && so.fda_case != 2) throw UsageError("--case must be 1 or 2");
        CovStudyConfig cfg;
        cfg.fda_case = so.fda_case;
        cfg.n = so.curves;
        cfg.j = so.points;
        cfg.sigma = so.sigma.value_or(0.5);
        cfg.reps = c.reps;
        cfg.seed = c.seed;
        cfg.lambdas = range.values();
        cfg.center = so.center;
        cfg.exclude_diagonal = so.exclude_diagonal;
        const StudyResult r = run_cov_study(cfg);
        write_replicates(c, r);
        summary["case"] = so.fda_case;
        summary["sigma"] = cfg.sigma;
        summary["curves"] = so.curves;
        summary["points"] = so.points;
        summary["lambda_grid"] = range.json();
        summary["mise"] = r.mean;
        summary["sd"] = r.sd;
    } else {
        throw UsageError("--study must be 'surface' or 'covariance'");
    }
    finish_summary(c, summary, t0, out);
    return kSuccess;
}

struct KernelOptions {
    std::vector<int> orders{1, 2, 3};
    bool profile = false;
    double profile_lambda = 1280.0;
};

int cmd_kernel_check(const Common& c, const KernelOptions& ko, std::ostream& out) {
    const auto t0 = Clock::now();
    bool all_pass = true;
    Json kernels = Json::array();
    for (int m : ko.orders) {
        if (m < 1) throw UsageError("kernel orders must be positive");
        Json roots = Json::array();
        for (const auto& psi : kernel_roots(m)) roots.push_back({psi.real(), psi.imag()});
        Json moments = Json::array();
        for (int l = 0; l <= 2 * m; ++l) {
            const QuadratureResult q = kernel_moment_quadrature(m, l);
            const double target = kernel_moment_target(m, l);
            const double scale = l == 2 * m ? std::tgamma(2.0 * m + 1.0) : 1.0;
            const bool pass = std::abs(q.value - target) <= 1e-6 * scale;
            all_pass = all_pass && pass;
            moments.push_back(Json{{"l", l},
                                   {"value", q.value},
                                   {"target", target},
                                   {"abs_error", std::abs(q.value - target)},
                                   {"truncation", q.truncation},
                                   {"tail_bound", q.tail_bound},
                                   {"pass", pass}});
        }
        const QuadratureResult l2 = kernel_l2_quadrature(m);
        kernels.push_back(Json{{"m", m}, {"roots", roots}, {"moments", moments}, {"l2", l2.value}});
    }
    Json summary{{"command", "kernel-check"}, {"kernels", kernels}};
    if (ko.profile) {
        AxisSpec spec{3, 2, 80};
        const KernelProfile p = empirical_kernel_profile(400, spec, ko.profile_lambda);
        const bool pass = p.max_abs_error <= 0.1;
        all_pass = all_pass && pass;
        summary["profile"] = Json{{"n", 400},
                                  {"segments", 80},
                                  {"lambda", p.lambda},
                                  {"bandwidth", p.bandwidth},
                                  {"rows_checked", p.rows_checked},
                                  {"max_abs_error", p.max_abs_error},
                                  {"pass", pass}};
    }
    summary["pass"] = all_pass;
    finish_summary(c, summary, t0, out);
    return all_pass ? kSuccess : kNumericFailure;
}

struct BenchOptions {
    std::vector<std::size_t> sizes{20, 40, 80, 300, 500};
};

/// Default knots up to 80 points per axis; beyond that the knot counts used for the large-data timings.
int bench_segments(std::size_t n) {
    if (n <= 80) return AxisSpec::auto_segments(n);
    if (n == 300) return 42;
    if (n == 500) return 57;
    return static_cast<int>(std::lround(std::pow(static_cast<double>(n) * static_cast<double>(n), 0.325)));
}

int cmd_bench(const Common& c, const BenchOptions& bo, std::ostream& out) {
    const auto t0 = Clock::now();
    const LambdaRange range = parse_lambda_range(c.lambda_grid, 20);
    const LambdaGrid grid{range.values(), range.values()};
    Json rows = Json::array();
    for (std::size_t n : bo.sizes) {
        if (n < 4) throw UsageError("bench sizes must be at least 4");
        const int k = c.knots == "auto" ? bench_segments(n) : resolve_specs(c, {n, n})[0].segments;
        AxisSpec spec{c.degree, c.penalty_order, k};
        const Eigen::MatrixXd y = noisy_surface(test_surface(TestFunction::F2, n, n), 0.1, derive_seed(c.seed, n));
        const auto start = Clock::now();
        const GridData data{y, midpoints(n), midpoints(n)};
        const SandwichFit fit = select_lambda(data, spec, spec, grid, search_options(c));
        const double secs = seconds_since(start);
        Json row{{"n", n}, {"segments", k}, {"lambda_pairs", grid.axis1.size() * grid.axis2.size()},
                 {"lambda1", fit.lambda1}, {"lambda2", fit.lambda2}};
        if (!c.no_timings) row["seconds"] = secs;
        rows.push_back(row);
    }
    Json summary{{"command", "bench"}, {"threads", num_threads()}, {"results", rows}};
    finish_summary(c, summary, t0, out);
    return kSuccess;
}

void add_common(CLI::App& app, Common& c) {
    app.add_option("--degree", c.degree, "B-spline degree")->capture_default_str();
    app.add_option("--penalty-order", c.penalty_order, "Difference penalty order")->capture_default_str();
    app.add_option("--knots", c.knots, "Knot segments per axis: auto, K, or K1,K2,...")->capture_default_str();
    app.add_option("--lambda-grid", c.lambda_grid, "COUNT:LOG10_LO:LOG10_HI (default 20:-5:4)");
    app.add_option("--fine-pass", c.fine_pass, "Refine around the coarse minimum with N values per axis (0 = off)")
        ->capture_default_str();
    app.add_option("--seed", c.seed, "Master seed")->capture_default_str();
    app.add_option("--reps", c.reps, "Simulation replicates")->capture_default_str();
    app.add_option("--threads", c.threads, "Worker threads (0 = runtime default)")
        ->envname("SANDWICH_THREADS")
        ->capture_default_str();
    app.add_flag("--emit-plotdata", c.emit_plotdata, "Also write long-format CSVs for plotting");
    app.add_flag("--no-timings", c.no_timings, "Leave wall-clock timings out of the summary");
    app.add_option("-o,--output", c.output, "Prefix for output files");
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sandwich smoother: fast bivariate and array P-spline smoothing with GCV"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key = value file (flags override it)");

    Common common;
    add_common(app, common);

    std::string input;
    auto* grid = app.add_subcommand("smooth-grid", "Smooth a response surface given on a grid");
    grid->add_option("input", input, "Grid CSV")->required();

    ScatterOptions scatter_opts;
    auto* scatter = app.add_subcommand("smooth-scatter", "Bin scattered (x,z,y) data and smooth the bin means");
    scatter->add_option("input", input, "Scatter CSV with header x,z,y")->required();
    scatter->add_option("--bins", scatter_opts.bins, "auto, I, or I1,I2")->capture_default_str();
    scatter->add_option("--nearest", scatter_opts.nearest, "Observations averaged to seed an empty bin")
        ->capture_default_str();
    scatter->add_option("--max-iter", scatter_opts.max_iter, "Imputation iterations")->capture_default_str();
    scatter->add_option("--init", scatter_opts.init, "Empty-bin start: nearest or zero")->capture_default_str();

    CovOptions cov_opts;
    auto* cov = app.add_subcommand("smooth-cov", "Smooth the covariance of curves on a common grid");
    cov->add_option("input", input, "Curves CSV, one curve per row")->required();
    cov->add_flag("--center", cov_opts.center, "Subtract the mean curve first");
    cov->add_flag("--exclude-diagonal", cov_opts.exclude_diagonal, "Replace the diagonal by neighbour averages");
    cov->add_option("--components", cov_opts.components, "Eigenpairs to report")->capture_default_str();

    auto* array = app.add_subcommand("smooth-array", "Smooth d-dimensional array data");
    array->add_option("input", input, "Long-format CSV x1,...,xd,y")->required();

    SimulateOptions sim_opts;
    double sigma = 0.0;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo MISE study");
    sim->add_option("--study", sim_opts.study, "surface or covariance")->capture_default_str();
    sim->add_option("--function", sim_opts.function, "Test surface f1 or f2")->capture_default_str();
    auto* sigma_opt = sim->add_option("--sigma", sigma, "Noise sd (default 0.1 surface, 0.5 covariance)");
    sim->add_option("--n1", sim_opts.n1, "Grid points along x")->capture_default_str();
    sim->add_option("--n2", sim_opts.n2, "Grid points along z")->capture_default_str();
    sim->add_option("--case", sim_opts.fda_case, "Covariance case 1 or 2")->capture_default_str();
    sim->add_option("--curves", sim_opts.curves, "Curves per data set")->capture_default_str();
    sim->add_option("--points", sim_opts.points, "Grid points per curve")->capture_default_str();
    sim->add_flag("--center", sim_opts.center, "Centre curves before forming the covariance");
    sim->add_flag("--exclude-diagonal", sim_opts.exclude_diagonal, "Neighbour-average the covariance diagonal");

    KernelOptions kernel_opts;
    auto* kernel = app.add_subcommand("kernel-check", "Moments and L2 norms of the equivalent kernels");
    kernel->add_option("--orders", kernel_opts.orders, "Penalty orders m")->delimiter(',')->capture_default_str();
    kernel->add_flag("--profile", kernel_opts.profile, "Compare smoother weights at n=400, K=80 with the kernel");
    kernel->add_option("--profile-lambda", kernel_opts.profile_lambda, "Smoothing parameter for --profile")
        ->capture_default_str();

    BenchOptions bench_opts;
    auto* bench = app.add_subcommand("bench", "Time the full GCV search on square grids");
    bench->add_option("--sizes", bench_opts.sizes, "Points per axis")->delimiter(',')->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    if (*sigma_opt) sim_opts.sigma = sigma;

    try {
        if (common.threads < 0) throw UsageError("--threads must be nonnegative");
        set_num_threads(common.threads);
        if (*grid) return cmd_smooth_grid(common, input, out);
        if (*scatter) return cmd_smooth_scatter(common, input, scatter_opts, out);
        if (*cov) return cmd_smooth_cov(common, input, cov_opts, out);
        if (*array) return cmd_smooth_array(common, input, out);
        if (*sim) return cmd_simulate(common, sim_opts, out);
        if (*kernel) return cmd_kernel_check(common, kernel_opts, out);
        if (*bench) return cmd_bench(common, bench_opts, out);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kInputError;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const DomainError& e) {
        err << "invalid input: " << e.what() << "\n";
        return kInputError;
    } catch (const DimensionError& e) {
        err << "invalid input: " << e.what() << "\n";
        return kInputError;
    } catch (const Error& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kNumericFailure;
    }
    return kInputError;
}

} // namespace sandwich::cli
