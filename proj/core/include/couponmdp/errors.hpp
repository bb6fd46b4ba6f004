#pragma once

#include <stdexcept>
#include <string>

namespace couponmdp {

// Invalid parameters or malformed configuration. CLI exit code 2.
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A solver failed to produce a result (non-convergence, no consistent case,
// structure violation, zero evidence). CLI exit code 3.
struct solver_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File system trouble. CLI exit code 4.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace couponmdp
