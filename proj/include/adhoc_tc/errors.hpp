#pragma once

#include <stdexcept>
#include <string>

namespace adhoc_tc {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// An iterative numeric procedure did not reach its tolerance. Carries the
// best estimate available when it gave up.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double partial)
        : std::runtime_error(what), partial_(partial) {}
    double partial_estimate() const noexcept { return partial_; }

private:
    double partial_;
};

// Root finder was handed an interval without a sign change.
class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Threshold t leaves no transmitters: P(W > t) == 0.
class DegenerateThresholdError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Outage target outside the range reachable with contention density <= lambda.
class WindowError : public std::domain_error {
public:
    WindowError(const std::string& what, double bound)
        : std::domain_error(what), bound_(bound) {}
    double window_bound() const noexcept { return bound_; }

private:
    double bound_;
};

// The optimal Aloha point needs lambda > 1/theta.
class UnsaturatedError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Monte Carlo capacity search cannot reach the outage target with p <= 1.
class SaturationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace adhoc_tc
