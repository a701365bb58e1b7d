#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace arpoison {

enum class ErrorKind {
  ZeroSumCoefficients,
  InvalidCoefficients,
  DimensionTooSmall,
  ZeroPerturbation,
  SearchExhausted,
  ChannelOutOfRange,
  ClassOutOfRange,
  ChannelMismatch,
  NonSquareP,
  IndivisibleGrid,
  InvalidArgument,
  Format,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace arpoison
