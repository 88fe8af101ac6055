#pragma once

#include <stdexcept>
#include <string>

namespace chorate {

/// A precondition or domain invariant was violated by caller-supplied data.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Exact convolution would exceed the configured composite-term budget.
/// Callers are expected to fall back to Monte Carlo.
class ExplosionLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An input file could not be opened or parsed.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An output file could not be created or written.
class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace chorate
