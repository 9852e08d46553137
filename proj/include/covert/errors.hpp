#pragma once

#include <stdexcept>
#include <string>

namespace covert {

// Requested accuracy cannot be reached within TruncationPolicy::max_dim.
struct truncation_overflow : std::runtime_error {
    explicit truncation_overflow(const std::string& what) : std::runtime_error(what) {}
};

// Numerical noise dominates a refinement sequence (e.g. a Taylor-coefficient fit).
struct unstable_fit : std::runtime_error {
    explicit unstable_fit(const std::string& what) : std::runtime_error(what) {}
};

// A simulation configuration violates a derived constraint (e.g. tau > 1).
struct config_rejected : std::runtime_error {
    explicit config_rejected(const std::string& what) : std::runtime_error(what) {}
};

// Root finding could not bracket the requested target.
struct invalid_bracket : std::runtime_error {
    explicit invalid_bracket(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace covert
