#pragma once

#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>

#ifdef RENORM_NBODY_HAVE_EXTENDED
#include <boost/multiprecision/float128.hpp>
#endif

#include "renorm_nbody/errors.hpp"

namespace renorm {

#ifdef RENORM_NBODY_HAVE_EXTENDED
/// 113-bit mantissa backend (IEEE binary128 via libquadmath).
using Extended = boost::multiprecision::float128;
inline constexpr bool kHaveExtended = true;
#else
inline constexpr bool kHaveExtended = false;
#endif

template <class Real>
Real pi_value() {
  if constexpr (std::is_floating_point_v<Real>) {
    return static_cast<Real>(3.141592653589793238462643383279502884L);
  } else {
    return Real("3.14159265358979323846264338327950288419716939937510");
  }
}

template <class Real>
Real epsilon_of() {
  return std::numeric_limits<Real>::epsilon();
}

/// Locale-independent decimal parsing. For binary64 this is correctly
/// rounded (std::from_chars); other backends use their own string ctor.
template <class Real>
Real parse_real(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (text.empty()) throw ParseError("empty numeric field");
  if constexpr (std::is_same_v<Real, double>) {
    double value = 0.0;
    auto first = text.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
      throw ParseError("malformed number '" + std::string(text) + "'");
    return value;
  } else {
    try {
      return Real(std::string(text));
    } catch (const std::exception&) {
      throw ParseError("malformed number '" + std::string(text) + "'");
    }
  }
}

template <class Real>
double to_double(const Real& x) {
  return static_cast<double>(x);
}

template <class Real>
bool is_finite(const Real& x) {
  using std::isfinite;
  if constexpr (std::is_floating_point_v<Real>) {
    return std::isfinite(x);
  } else {
    return isfinite(x);
  }
}

}  // namespace renorm
