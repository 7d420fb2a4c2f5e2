#pragma once

#include <stdexcept>
#include <string>

namespace qep {

/// Rejected input data or configuration (malformed files, unknown names,
/// inconsistent labels). The CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

} // namespace qep
