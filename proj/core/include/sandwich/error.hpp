#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sandwich {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (x outside [0,1], λ < 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Shapes that do not line up (matrix sizes, coordinate counts, array ranks).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Gram matrix BᵀB is numerically singular: some basis functions have no data under them.
class SingularGramError : public Error {
public:
    SingularGramError(std::string what, std::vector<std::size_t> indices)
        : Error(std::move(what)), indices_(std::move(indices)) {}

    const std::vector<std::size_t>& basis_indices() const noexcept { return indices_; }

private:
    std::vector<std::size_t> indices_;
};

/// Smoother saturates the data (edf >= n), so GCV is undefined.
class DegenerateFitError : public Error {
public:
    using Error::Error;
};

/// A quantity that must be nonnegative by construction came out clearly negative.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// Search space too large to enumerate.
class GridExplosionError : public Error {
public:
    using Error::Error;
};

} // namespace sandwich
