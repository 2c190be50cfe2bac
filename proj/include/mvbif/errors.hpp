#pragma once

#include <stdexcept>
#include <string>

namespace mvbif {

// Bad arguments or configuration. The CLI maps this to exit code 2.
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Anything that goes wrong inside a numerical method. Exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularJacobian : NumericalError { using NumericalError::NumericalError; };
struct Divergence : NumericalError { using NumericalError::NumericalError; };
struct ResonantDenominator : NumericalError {
    int index;
    ResonantDenominator(const std::string& what, int l) : NumericalError(what), index(l) {}
};
struct SideMismatch : NumericalError { using NumericalError::NumericalError; };
struct NoRoot : NumericalError { using NumericalError::NumericalError; };
struct Degenerate : NumericalError { using NumericalError::NumericalError; };
struct ResonanceDetected : NumericalError { using NumericalError::NumericalError; };
struct NotResonant : NumericalError { using NumericalError::NumericalError; };
struct RangeError : NumericalError { using NumericalError::NumericalError; };
struct InsufficientData : NumericalError { using NumericalError::NumericalError; };

}  // namespace mvbif
