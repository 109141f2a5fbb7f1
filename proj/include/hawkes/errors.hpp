#ifndef HAWKES_ERRORS_HPP
#define HAWKES_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hawkes {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NonPositiveKernel : public Error {
 public:
  using Error::Error;
};

class DuplicateRate : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Raised when a thinning candidate has intensity above its majorant.
class MajorantViolation : public Error {
 public:
  using Error::Error;
};

class ExplosionGuard : public Error {
 public:
  using Error::Error;
};

class BlowUp : public Error {
 public:
  BlowUp(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

class ZeroVariance : public Error {
 public:
  using Error::Error;
};

class MomentConditionViolated : public Error {
 public:
  using Error::Error;
};

}  // namespace hawkes

#endif  // HAWKES_ERRORS_HPP
