#include "arpoison/error.hpp"

namespace arpoison {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ZeroSumCoefficients: return "ZeroSumCoefficients";
    case ErrorKind::InvalidCoefficients: return "InvalidCoefficients";
    case ErrorKind::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorKind::ZeroPerturbation: return "ZeroPerturbation";
    case ErrorKind::SearchExhausted: return "SearchExhausted";
    case ErrorKind::ChannelOutOfRange: return "ChannelOutOfRange";
    case ErrorKind::ClassOutOfRange: return "ClassOutOfRange";
    case ErrorKind::ChannelMismatch: return "ChannelMismatch";
    case ErrorKind::NonSquareP: return "NonSquareP";
    case ErrorKind::IndivisibleGrid: return "IndivisibleGrid";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Format: return "Format";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace arpoison
