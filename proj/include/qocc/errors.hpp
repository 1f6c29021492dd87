#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qocc {

/// Argument outside the mathematical domain of a function (x <= 0, beta2 = 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Caller violated an operation's precondition (step too large, wrong region, ...).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative or adaptive computation stopped before reaching its tolerance.
/// Carries the best available estimate and the refinement history so callers
/// can decide whether a degraded answer is still usable.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, double best_estimate,
                        std::vector<double> history = {})
        : std::runtime_error(what), best_estimate_(best_estimate),
          history_(std::move(history)) {}

    double best_estimate() const noexcept { return best_estimate_; }
    const std::vector<double>& history() const noexcept { return history_; }

private:
    double best_estimate_;
    std::vector<double> history_;
};

/// Least-squares system too ill-conditioned to solve without regularization.
class IllConditionedError : public std::runtime_error {
public:
    IllConditionedError(const std::string& what, double condition_number)
        : std::runtime_error(what), condition_number_(condition_number) {}

    double condition_number() const noexcept { return condition_number_; }

private:
    double condition_number_;
};

} // namespace qocc
