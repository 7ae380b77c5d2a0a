#pragma once

#include <stdexcept>
#include <string>

namespace fallingballs {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A trajectory hit a point where the flow (or its derivative) is undefined.
class SingularityError : public Error {
public:
    using Error::Error;
};

// Two candidate collision times coincide: multiple collision.
class MultipleCollision : public SingularityError {
public:
    using SingularityError::SingularityError;
};

// Approach speed below the grazing cutoff.
class GrazingSingularity : public SingularityError {
public:
    using SingularityError::SingularityError;
};

// Positions lost their ordering, which means an event was missed.
class OrderViolation : public SingularityError {
public:
    using SingularityError::SingularityError;
};

// Too many collisions inside the accumulation window.
class AccumulationSuspected : public SingularityError {
public:
    using SingularityError::SingularityError;
};

// No collision candidate at all. Impossible on the compact energy surface.
class NoEvent : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class PreconditionViolated : public Error {
public:
    using Error::Error;
};

// The perturbed run of a finite-difference check left the reference symbolic sequence.
class SequenceChanged : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace fallingballs
