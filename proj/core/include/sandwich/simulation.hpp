#pragma once

// Monte Carlo studies: surface estimation on a grid (test functions f1, f2)
// and covariance estimation for simulated curves. Replicate r draws from
// CounterRng(derive_seed(seed, r)), so results do not depend on thread count.

#include "sandwich/basis.hpp"
#include "sandwich/sandwich2d.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace sandwich {

enum class TestFunction { F1, F2 };

/// Parses "f1" / "f2". Throws DomainError otherwise.
TestFunction parse_test_function(const std::string& id);
std::string to_string(TestFunction f);

inline constexpr double kF2SigmaX = 0.3;
inline constexpr double kF2SigmaZ = 0.4;

/// f1(x,z) = sin{2π(x−.5)³} cos(4πz); f2 is the two-bump Gaussian mixture.
double test_function(TestFunction f, double x, double z);

/// ∂⁴f/∂x⁴ and ∂⁴f/∂z⁴ at (x,z), exact up to rounding.
struct FourthDerivatives {
    double dx = 0.0;
    double dz = 0.0;
};
FourthDerivatives test_function_d4(TestFunction f, double x, double z);

/// f on the n₁ x n₂ midpoint grid.
Eigen::MatrixXd test_surface(TestFunction f, std::size_t n1, std::size_t n2);

/// True surface plus N(0, σ²) noise, drawn row by row (x index outer).
Eigen::MatrixXd noisy_surface(const Eigen::MatrixXd& truth, double sigma, std::uint64_t seed);

struct SurfaceStudyConfig {
    TestFunction function = TestFunction::F1;
    std::size_t n1 = 20;
    std::size_t n2 = 30;
    AxisSpec spec1{3, 2, 10};
    AxisSpec spec2{3, 2, 15};
    double sigma = 0.1;
    std::size_t reps = 100;
    std::uint64_t seed = 1;
    LambdaGrid grid = LambdaGrid::log_uniform();
    SearchOptions search;
};

struct StudyResult {
    /// Per-replicate integrated squared error (midpoint rule on the observation grid).
    std::vector<double> ise;
    double mean = 0.0;
    /// Sample standard deviation; zero for a single replicate.
    double sd = 0.0;
    /// Selected smoothing parameters per replicate (λ₂ left at 0 for covariance studies).
    std::vector<double> lambda1;
    std::vector<double> lambda2;
};

StudyResult run_surface_study(const SurfaceStudyConfig& config);

struct CovStudyConfig {
    int fda_case = 1;
    std::size_t n = 25;
    std::size_t j = 20;
    double sigma = 0.5;
    std::size_t reps = 100;
    std::uint64_t seed = 1;
    std::vector<double> lambdas = LambdaGrid::log_spaced(20, -5.0, 4.0);
    bool center = false;
    bool exclude_diagonal = false;
};

StudyResult run_cov_study(const CovStudyConfig& config);

/// Mean and sample sd, filled into `r` from r.ise.
void summarize(StudyResult& r);

} // namespace sandwich
