#pragma once

#include <stdexcept>
#include <string>

namespace drorl {

// Invalid inputs throw std::invalid_argument. The two classes below cover
// the remaining failure modes surfaced through the C API.

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A solver reached a state its invariants rule out.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace drorl
