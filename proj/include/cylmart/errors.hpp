#pragma once

#include <stdexcept>
#include <string>

namespace cylmart {

// Raised when a scalar function applied through the spectral calculus is
// non-finite on some eigenvalue of the operator.
struct FunctionUnboundedOnSpectrum : std::domain_error {
    explicit FunctionUnboundedOnSpectrum(const std::string& what)
        : std::domain_error(what) {}
};

// Raised when an eigenvalue falls strictly between the kernel threshold and
// the lowest band edge, so no band of the requested depth covers it.
struct BandDepthInsufficient : std::domain_error {
    explicit BandDepthInsufficient(const std::string& what)
        : std::domain_error(what) {}
};

// Raised when a breakpoint or event time does not coincide with a grid point.
struct GridMisalignment : std::invalid_argument {
    explicit GridMisalignment(const std::string& what)
        : std::invalid_argument(what) {}
};

// Raised when a metric estimate needs sup over [0, n_max] but the grid
// horizon is shorter.
struct HorizonTooShort : std::invalid_argument {
    explicit HorizonTooShort(const std::string& what)
        : std::invalid_argument(what) {}
};

// Raised when an allegedly nondecreasing path decreases beyond tolerance.
struct NonMonotonePath : std::domain_error {
    explicit NonMonotonePath(const std::string& what)
        : std::domain_error(what) {}
};

// Raised when a changed-time query lies beyond the range of the clock path.
struct HorizonExceeded : std::invalid_argument {
    explicit HorizonExceeded(const std::string& what)
        : std::invalid_argument(what) {}
};

// Raised when a smoothing window does not fit inside the grid.
struct WindowTooLarge : std::invalid_argument {
    explicit WindowTooLarge(const std::string& what)
        : std::invalid_argument(what) {}
};

// Raised on any shape disagreement between operators, paths and functionals.
struct DimensionMismatch : std::invalid_argument {
    explicit DimensionMismatch(const std::string& what)
        : std::invalid_argument(what) {}
};

// Raised on malformed or fail-closed-rejected configuration input.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what)
        : std::invalid_argument(what) {}
};

}  // namespace cylmart
