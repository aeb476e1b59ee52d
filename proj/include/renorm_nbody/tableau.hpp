#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "renorm_nbody/scalar.hpp"

namespace renorm {

/// Explicit embedded Runge-Kutta pair. Coefficients are kept as the decimal
/// strings from the source file so any scalar backend can parse them at full
/// precision.
class ButcherTableau {
 public:
  /// Keyed text format: '#' comments, a header 'stages p phat', then rows
  /// 'c i v', 'a i j v', 'b i v', 'bhat i v'. Unlisted entries are zero.
  static ButcherTableau parse(std::string_view text, const std::string& source = "<memory>");
  static ButcherTableau load(const std::string& path);

  /// The bundled Verner 9(8) pair (16 stages).
  static const ButcherTableau& verner98();

  std::size_t stages() const { return stages_; }
  int order() const { return p_; }
  int embedded_order() const { return phat_; }

  const std::string& c_text(std::size_t i) const { return c_[i]; }
  const std::string& a_text(std::size_t i, std::size_t j) const { return a_[i * stages_ + j]; }
  const std::string& b_text(std::size_t i) const { return b_[i]; }
  const std::string& bhat_text(std::size_t i) const { return bhat_[i]; }

  /// Residuals of the row-sum and weight-sum invariants evaluated with 50
  /// significant digits.
  struct Residuals {
    double row_sum;   // max_i |c_i - sum_j a_ij|
    double b_sum;     // |sum b_i - 1|
    double bhat_sum;  // |sum bhat_i - 1|
  };
  Residuals residuals() const;

  /// Throws InvariantError if any residual exceeds `tol`.
  void validate(double tol = 1e-30) const;

 private:
  std::size_t stages_ = 0;
  int p_ = 0;
  int phat_ = 0;
  std::vector<std::string> c_, a_, b_, bhat_;
};

/// Tableau coefficients materialized in one scalar type. `a` rows are
/// truncated to their strictly lower-triangular part.
template <class Real>
struct RKCoefficients {
  std::size_t stages;
  int order;
  int embedded_order;
  std::vector<Real> c;
  std::vector<std::vector<Real>> a;
  std::vector<Real> b;
  std::vector<Real> e;  // b - bhat

  explicit RKCoefficients(const ButcherTableau& tab)
      : stages(tab.stages()), order(tab.order()), embedded_order(tab.embedded_order()) {
    c.resize(stages);
    a.resize(stages);
    b.resize(stages);
    e.resize(stages);
    for (std::size_t i = 0; i < stages; ++i) {
      c[i] = parse_real<Real>(tab.c_text(i));
      for (std::size_t j = 0; j < i; ++j) a[i].push_back(parse_real<Real>(tab.a_text(i, j)));
      b[i] = parse_real<Real>(tab.b_text(i));
      e[i] = b[i] - parse_real<Real>(tab.bhat_text(i));
    }
  }
};

}  // namespace renorm
