#include "arpoison/ar_core.hpp"

namespace arpoison {

std::string to_string(NormKind kind) { return kind == NormKind::L2 ? "l2" : "linf"; }

NormKind parse_norm_kind(const std::string& text) {
  if (text == "l2" || text == "L2") return NormKind::L2;
  if (text == "linf" || text == "LINF" || text == "Linf") return NormKind::LInf;
  throw Error(ErrorKind::InvalidArgument, "unknown norm '" + text + "' (expected l2 or linf)");
}

template class ARCoefficients<double>;

}  // namespace arpoison
