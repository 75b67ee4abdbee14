#pragma once

#include <stdexcept>
#include <string>

namespace lastiter {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument does not hold (dimension mismatch, h <= 0, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ScriptedPieceInactive : public Error {
 public:
  using Error::Error;
};

class AlphaOutOfRange : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class EmptySchedule : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ScheduleExhausted : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class OptimizationFailed : public Error {
 public:
  using Error::Error;
};

class IncompatibleLength : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class InfeasibleReference : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class MonotonicityViolation : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class StepTooSmall : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class StepOutOfRange : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// The operation needs a trace recorded in full mode.
class RecordModeError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

}  // namespace lastiter
