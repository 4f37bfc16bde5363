#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace roughgp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument or a parsed document was violated.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A kernel descriptor violates its parameter domain.
class InvalidKernel : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// Grid is larger than the dense sampling cap.
class CapExceeded : public Error {
public:
    CapExceeded(std::size_t points, std::size_t cap)
        : Error("grid has " + std::to_string(points) + " points, above the exact-sampling cap of " +
                std::to_string(cap) +
                "; use a smaller grid or raise the cap explicitly (memory grows as N^2)"),
          points_(points), cap_(cap) {}

    std::size_t points() const noexcept { return points_; }
    std::size_t cap() const noexcept { return cap_; }

private:
    std::size_t points_;
    std::size_t cap_;
};

/// Cholesky failed even at the largest jitter of the ladder.
class NotPositiveDefinite : public Error {
public:
    NotPositiveDefinite(std::size_t pivot, double last_jitter)
        : Error("covariance matrix is not positive semidefinite within tolerance (failed at pivot " +
                std::to_string(pivot) + ", jitter " + std::to_string(last_jitter) + ")"),
          pivot_(pivot), last_jitter_(last_jitter) {}

    std::size_t pivot() const noexcept { return pivot_; }
    double last_jitter() const noexcept { return last_jitter_; }

private:
    std::size_t pivot_;
    double last_jitter_;
};

/// Every candidate of a hyperparameter fit failed.
class FitFailed : public Error {
public:
    using Error::Error;
};

} // namespace roughgp
