#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tactile {

// Every stage reports contract violations through one of these. The runner
// catches Error and maps it to a stage-tagged diagnostic and exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

class RoutingError : public Error {
 public:
  using Error::Error;
};

class FramingError : public Error {
 public:
  FramingError(const std::string& what, std::size_t bit_offset)
      : Error(what + " at bit " + std::to_string(bit_offset)), bit_offset_(bit_offset) {}

  std::size_t bit_offset() const noexcept { return bit_offset_; }

 private:
  std::size_t bit_offset_;
};

}  // namespace tactile

namespace tactile {

class CalibrationError : public Error {
 public:
  using Error::Error;
};

// Runtime failure inside one pipeline stage; the message is prefixed with the
// stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace tactile
