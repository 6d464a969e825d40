#pragma once

#include <stdexcept>
#include <string>

namespace dephasim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent input data (normalization, ranges, kind mismatch).
struct ConfigInvalid : Error {
    using Error::Error;
};

// big_omega = 0 with omega != 0: the closed forms divide by big_omega; only
// the joint limit big_omega -> 0, omega -> 0 is well defined.
struct DegenerateMode : Error {
    using Error::Error;
};

// Fock basis cut too low for the requested state or accuracy target.
struct TruncationTooSmall : Error {
    using Error::Error;
};

// Symmetric tridiagonal eigensolver did not converge.
struct EigenFailure : Error {
    using Error::Error;
};

// Malformed ensemble specification.
struct SpecInvalid : Error {
    using Error::Error;
};

// Not enough usable points for a fit.
struct InsufficientData : Error {
    using Error::Error;
};

// Config file does not match the expected schema.
struct SchemaError : Error {
    using Error::Error;
};

}  // namespace dephasim
