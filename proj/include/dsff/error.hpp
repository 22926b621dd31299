#pragma once

#include <stdexcept>
#include <string>

namespace dsff {

/// Argument outside the domain of a numerical routine (NaN, infinite, out of range).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A truncation or tolerance policy cannot satisfy the requested evaluation.
class PolicyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid caller-supplied configuration (empty grid, bad range, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The eigenvalue iteration did not converge for some sample.
class EigenSolverError : public std::runtime_error {
public:
    EigenSolverError(const std::string& what, std::size_t sample_index)
        : std::runtime_error(what), sample_index_(sample_index) {}

    std::size_t sample_index() const noexcept { return sample_index_; }

private:
    std::size_t sample_index_;
};

}  // namespace dsff
