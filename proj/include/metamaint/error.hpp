#pragma once

#include <stdexcept>
#include <string>

namespace metamaint {

/// Errors caused by user input or corpus contents. The CLI maps these to
/// exit code 1; anything else escaping a subcommand is an internal error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace metamaint
