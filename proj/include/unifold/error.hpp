#ifndef UNIFOLD_ERROR_HPP
#define UNIFOLD_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace unifold {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sample (or folded sample) has fewer than two distinct locations.
class DegenerateSample : public Error {
 public:
  explicit DegenerateSample(const std::string& what)
      : Error("degenerate sample: " + what) {}
};

class InvalidWeight : public Error {
 public:
  explicit InvalidWeight(const std::string& what)
      : Error("invalid weight: " + what) {}
};

class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string& what)
      : Error("invalid parameter: " + what) {}
};

/// The sigma^2-parameterized family never crosses SFR = 1 on the bracket.
class NoCrossing : public Error {
 public:
  explicit NoCrossing(const std::string& what) : Error("no crossing: " + what) {}
};

/// Three-Dirac reconstruction is not possible for the given parameters.
class Infeasible : public Error {
 public:
  explicit Infeasible(const std::string& what) : Error("infeasible: " + what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io error: " + what) {}
};

/// Parse failure. `position` is a line number for data files and a
/// character offset for mixture specifications.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error("parse error at " + std::to_string(position) + ": " + what),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace unifold

#endif  // UNIFOLD_ERROR_HPP
