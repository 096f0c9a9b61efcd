#pragma once

#include <stdexcept>
#include <string>

namespace ebsde {

// Base class for every failure this library raises on purpose.  Callers that
// want blanket handling catch `Error`; tests usually catch the precise type.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A simulated path left the guard ball before the horizon.
struct BlowUp : Error {
    using Error::Error;
};

// Explicit drift transport would violate the monotone time-step bound.
struct CflViolated : Error {
    using Error::Error;
};

// A requested time does not coincide (to tolerance) with a stored step.
struct TimeNotOnGrid : Error {
    using Error::Error;
};

// A structural smallness condition required by the requested operation fails.
struct GateViolated : Error {
    using Error::Error;
};

// The data are too noisy to support the requested fit.
struct InsufficientSignal : Error {
    using Error::Error;
};

// A solver layer picked up a NaN or infinity.
struct NonFiniteLayer : Error {
    using Error::Error;
};

// Pseudo-time relaxation hit its budget before the update norm dropped.
struct MaxPseudoTimeExceeded : Error {
    using Error::Error;
};

// Normal equations of a regression step are numerically singular.
struct SingularRegression : Error {
    using Error::Error;
};

// The vanishing-discount trace is not settling.
struct NonConvergent : Error {
    using Error::Error;
};

// A fit window refers to times outside the computed range.
struct WindowOutOfRange : Error {
    using Error::Error;
};

// Catalog lookup with an unknown name.
struct UnknownCatalogEntry : Error {
    using Error::Error;
};

// Catalog lookup missing a required parameter.
struct MissingParam : Error {
    using Error::Error;
};

// User-supplied callable returned NaN or infinity at a probed point.
struct NonFiniteEvaluation : Error {
    using Error::Error;
};

// Config file could not be parsed or misses required keys.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace ebsde
