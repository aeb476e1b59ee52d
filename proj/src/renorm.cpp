#include "renorm_nbody/renorm.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace renorm {

std::string_view to_string(RenormKind kind) {
  switch (kind) {
    case RenormKind::S0: return "s0";
    case RenormKind::S1: return "s1";
    case RenormKind::S2: return "s2";
    case RenormKind::S3: return "s3";
    case RenormKind::S4: return "s4";
  }
  return "?";
}

RenormKind parse_renorm_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "s0") return RenormKind::S0;
  if (lower == "s1") return RenormKind::S1;
  if (lower == "s2") return RenormKind::S2;
  if (lower == "s3") return RenormKind::S3;
  if (lower == "s4") return RenormKind::S4;
  throw ParseError("unknown renormalization '" + std::string(text) + "' (expected s0..s4)");
}

}  // namespace renorm
