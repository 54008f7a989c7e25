#pragma once

#include <stdexcept>

namespace risnoma {

// Guard against combinatorial blow-ups (exhaustive enumeration, K! matching).
struct ComplexityGuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace risnoma
