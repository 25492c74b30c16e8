#pragma once

#include <stdexcept>
#include <string>

namespace jawab {

// Base for all recoverable failures raised by the library. The CLI maps
// these to exit code 1; programming errors stay as assertions.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace jawab
