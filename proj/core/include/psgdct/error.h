#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace psgdct {

// Base of every error thrown by the library. The CLI maps ConfigError to
// exit code 2 and any other Error to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class EmptySignal : public Error {
 public:
  using Error::Error;
};

// Non-finite value produced inside a network layer.
class NumericError : public Error {
 public:
  NumericError(std::string layer, const std::string& what)
      : Error(layer + ": " + what), layer_(std::move(layer)) {}
  const std::string& layer() const noexcept { return layer_; }

 private:
  std::string layer_;
};

class InvalidCheckpoint : public Error {
 public:
  using Error::Error;
};

class TrainingFailure : public Error {
 public:
  TrainingFailure(long step, const std::string& what)
      : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

class StratificationError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

// A fold of a cross-validation run failed; wraps the underlying message.
class FoldFailure : public Error {
 public:
  FoldFailure(std::size_t fold, const std::string& what)
      : Error("fold " + std::to_string(fold) + ": " + what), fold_(fold) {}
  std::size_t fold() const noexcept { return fold_; }

 private:
  std::size_t fold_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(long line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace psgdct
