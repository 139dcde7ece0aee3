#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace magel {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class NotOrientationPreserving : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class UnitLengthViolation : public Error {
 public:
  using Error::Error;
};

class InvalidGrid : public Error {
 public:
  using Error::Error;
};

class InvalidModel : public Error {
 public:
  using Error::Error;
};

/// An element with det F <= 0 was met where a positive determinant is required.
class DegenerateElement : public Error {
 public:
  DegenerateElement(std::string what, std::vector<int> elements)
      : Error(std::move(what)), elements_(std::move(elements)) {}
  const std::vector<int>& elements() const { return elements_; }

 private:
  std::vector<int> elements_;
};

/// State is outside the admissible class (orientation lost or body left the box).
class Inadmissible : public Error {
 public:
  Inadmissible(std::string what, std::vector<int> elements)
      : Error(std::move(what)), elements_(std::move(elements)) {}
  const std::vector<int>& elements() const { return elements_; }

 private:
  std::vector<int> elements_;
};

class NoConvergence : public Error {
 public:
  NoConvergence(std::string what, int iterations)
      : Error(std::move(what)), iterations_(iterations) {}
  int iterations() const { return iterations_; }

 private:
  int iterations_;
};

/// Configuration problem; `path` names the offending JSON field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace magel
