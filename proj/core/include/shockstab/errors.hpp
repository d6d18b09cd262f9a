#pragma once

#include <stdexcept>
#include <string>

namespace shockstab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Wrong matrix shapes, broken block structure of the viscosity, bad dimensions.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// A structural or technical hypothesis does not hold for the supplied data.
class HypothesisError : public Error {
public:
    HypothesisError(std::string hypothesis, const std::string& what)
        : Error(what), hypothesis_(std::move(hypothesis)) {}
    const std::string& hypothesis() const noexcept { return hypothesis_; }

private:
    std::string hypothesis_;
};

/// Identical endstates: there is no shock to analyse.
class DegenerateShockError : public Error {
public:
    using Error::Error;
};

/// Solver failure (eigen-solver, Newton, integrator step collapse, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// No heteroclinic connection could be found between the endstates.
class NoProfileError : public Error {
public:
    using Error::Error;
};

/// Computed profile misses the requested residual tolerance.
class AccuracyError : public Error {
public:
    using Error::Error;
};

/// Exponential tail fit produced a non-negative slope.
class DecayFailureError : public Error {
public:
    using Error::Error;
};

/// Spectral parameter lies on or inside the essential spectrum.
class EssentialSpectrumError : public Error {
public:
    using Error::Error;
};

/// A case the library recognises but does not implement (e.g. profile manifolds with ell > 1).
class UnsupportedCaseError : public Error {
public:
    using Error::Error;
};

/// Invalid or incomplete run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Time integration produced NaN/overflow.
class BlowUpError : public Error {
public:
    BlowUpError(double time, const std::string& what) : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// The fixed-point iteration was stopped (guard exceeded, divergence, blow-up).
class IterationAbort : public Error {
public:
    using Error::Error;
};

}  // namespace shockstab
