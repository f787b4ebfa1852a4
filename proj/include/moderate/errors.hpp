#pragma once

#include <stdexcept>
#include <string>

namespace moderate {

// Base class for every library error. Validation-type errors derive from
// ValidationError so the CLI can map them to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

#define MODERATE_DEFINE_ERROR(Name, Base) \
    class Name : public Base {            \
    public:                               \
        using Base::Base;                 \
    };

// kernel catalog
MODERATE_DEFINE_ERROR(DomainError, Error)
MODERATE_DEFINE_ERROR(UnsupportedSymbol, ValidationError)
MODERATE_DEFINE_ERROR(DivergentNorm, ValidationError)
MODERATE_DEFINE_ERROR(OutOfCatalog, ValidationError)

// mollifier
MODERATE_DEFINE_ERROR(QuadratureFailure, Error)

// spectral solver
MODERATE_DEFINE_ERROR(BlowUpDetected, Error)
MODERATE_DEFINE_ERROR(NotCompleted, Error)

// particles
MODERATE_DEFINE_ERROR(BadMixture, ValidationError)

// measures
MODERATE_DEFINE_ERROR(BumpUnderresolved, ValidationError)
MODERATE_DEFINE_ERROR(NonProbability, ValidationError)
MODERATE_DEFINE_ERROR(NoConvergence, Error)

// rate formulas
MODERATE_DEFINE_ERROR(EmptyWindow, ValidationError)
MODERATE_DEFINE_ERROR(DeltaOutOfRange, ValidationError)

// configuration
MODERATE_DEFINE_ERROR(ConfigError, ValidationError)

#undef MODERATE_DEFINE_ERROR

}  // namespace moderate
