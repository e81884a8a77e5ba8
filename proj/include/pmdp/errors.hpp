#pragma once

#include <stdexcept>
#include <string>

namespace pmdp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model violates one of its structural invariants (row sums, supports, rewards).
class InvalidModel : public Error {
 public:
  using Error::Error;
};

/// Invalid environment or experiment parameters.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Every hypothesis with positive posterior mass assigns zero probability to
/// the realized observation.
class AllZeroLikelihood : public Error {
 public:
  using Error::Error;
};

/// Relative value iteration did not reach the span tolerance.
class NoConvergence : public Error {
 public:
  using Error::Error;
};

/// The policy-induced chain has more than one recurrent class.
class Multichain : public Error {
 public:
  using Error::Error;
};

/// Too few usable points for a least-squares fit.
class DegenerateFit : public Error {
 public:
  using Error::Error;
};

/// Malformed model, cache or curve file.
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pmdp
