#pragma once

#include <stdexcept>
#include <string>

namespace locsim {

/// Base class for all locsim errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

class InvalidInput : public Error {
  public:
    using Error::Error;
};

/// Target position coincides with an anchor (zero range).
class DegenerateGeometry : public Error {
  public:
    using Error::Error;
};

/// H^T H numerically singular (collinear anchors etc.).
class SingularGeometry : public Error {
  public:
    using Error::Error;
};

/// The L x L Gram matrix of the channel basis is numerically singular.
class SingularChannel : public Error {
  public:
    using Error::Error;
};

class InfiniteVariance : public Error {
  public:
    using Error::Error;
};

class SingularCovariance : public Error {
  public:
    using Error::Error;
};

class SingularFim : public Error {
  public:
    using Error::Error;
};

class SingularNuisanceBlock : public Error {
  public:
    using Error::Error;
};

/// var_multipath < var_awgn beyond numerical tolerance; signals a bad
/// variance pipeline upstream.
class InconsistentVariances : public Error {
  public:
    using Error::Error;
};

class InvalidReference : public Error {
  public:
    using Error::Error;
};

/// Normal matrix of a Gauss-Newton step has condition number above 1e12
/// with no regularization.
class IllConditioned : public Error {
  public:
    using Error::Error;
};

class ParseError : public Error {
  public:
    using Error::Error;
};

class ValidationError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace locsim
