#pragma once

#include <stdexcept>
#include <string>

namespace rydblock {

// Error taxonomy maps onto CLI exit codes: ConfigError -> 2, NumericalError -> 3.
// Anything not derived from these is a programming error and escapes as-is.

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Inward Numerov integration failed to produce a usable wavefunction
// (divergence before the outer lobe, or no classically allowed region).
class IntegrationError : public NumericalError {
public:
    explicit IntegrationError(const std::string& what) : NumericalError(what) {}
};

// Dressed-state selection found two candidates with indistinguishable overlap
// and energy; refusing to pick silently.
class AmbiguityError : public NumericalError {
public:
    explicit AmbiguityError(const std::string& what) : NumericalError(what) {}
};

// blockade_shift(P2 = 0): the shift is infinite by definition, not a number.
class InfiniteBlockadeError : public NumericalError {
public:
    explicit InfiniteBlockadeError(const std::string& what) : NumericalError(what) {}
};

class FitError : public NumericalError {
public:
    explicit FitError(const std::string& what) : NumericalError(what) {}
};

} // namespace rydblock
