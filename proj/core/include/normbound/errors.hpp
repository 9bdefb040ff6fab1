#ifndef NORMBOUND_ERRORS_HPP
#define NORMBOUND_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace normbound {

// Error taxonomy, mirrored by the CLI exit codes:
//   config_error -> 2, data_error -> 3, numeric_error / domain_error -> 4.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid operands (bad dimensions, non-finite inputs, out-of-range parameters).
struct domain_error : error {
    using error::error;
};

// Computation produced or encountered a non-finite / non-convergent result.
struct numeric_error : error {
    using error::error;
};

// Experiment configuration is malformed or inconsistent.
struct config_error : error {
    using error::error;
};

// Dataset files are missing, truncated or malformed.
struct data_error : error {
    using error::error;
};

} // namespace normbound

#endif
