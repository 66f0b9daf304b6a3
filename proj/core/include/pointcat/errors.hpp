#pragma once

#include <stdexcept>
#include <string>

namespace pointcat {

// Base class for every error this library throws on purpose. Catching
// pointcat::error at the CLI boundary is enough to map failures to exit codes.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user-supplied configuration (JSON config, CLI flags, model hyperparameters).
struct config_error : error {
    using error::error;
};

// Shape or size mismatch between tensors / point counts.
struct shape_error : error {
    using error::error;
};

// Index out of range (labels, neighbor indices, face indices, ...).
struct index_error : error {
    using error::error;
};

// Non-finite value produced where a finite one is required.
struct numeric_error : error {
    using error::error;
};

// Malformed external input (XYZ/OFF/manifest/checkpoint bytes).
struct parse_error : error {
    using error::error;
};

// Internal invariant violated (a bug in this library, not in user input).
struct contract_error : error {
    using error::error;
};

// A verification routine (gradient check, determinism check) failed.
struct check_error : error {
    using error::error;
};

}  // namespace pointcat
