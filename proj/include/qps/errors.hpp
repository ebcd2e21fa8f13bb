#pragma once

#include <stdexcept>
#include <string>

namespace qps {

/// Base class for every error raised by the library.
class qps_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class invalid_input : public qps_error {
public:
    using qps_error::qps_error;
};

/// Continued-fraction expansion terminated: the input is rational to working precision.
class rational_input : public qps_error {
public:
    using qps_error::qps_error;
};

/// Evaluation requested outside the strip where the truncated series is trustworthy.
class strip_error : public qps_error {
public:
    strip_error(const std::string& what, double tail) : qps_error(what), tail_bound(tail) {}
    double tail_bound;
};

class period_mismatch : public qps_error {
public:
    using qps_error::qps_error;
};

/// A divisor |e^{2 pi i k alpha} - 1| fell below the configured cutoff.
class small_divisor_error : public qps_error {
public:
    small_divisor_error(const std::string& what, long k_, std::string entry_ = {})
        : qps_error(what), k(k_), entry(std::move(entry_)) {}
    long k;
    std::string entry;
};

/// Generic failure of a numerical stage; `stage` names where it happened.
class numerical_error : public qps_error {
public:
    numerical_error(std::string stage_, const std::string& what)
        : qps_error(stage_ + ": " + what), stage(std::move(stage_)) {}
    std::string stage;
};

/// Bad configuration text, flag value or frequency alias.
class config_error : public qps_error {
public:
    using qps_error::qps_error;
};

/// A cache entry failed its checksum or could not be parsed.
class cache_corruption : public qps_error {
public:
    using qps_error::qps_error;
};

} // namespace qps
