#include <doctest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <functional>
#include <string>

#include "renorm_nbody/errors.hpp"
#include "renorm_nbody/scalar.hpp"
#include "renorm_nbody/tableau.hpp"

using namespace renorm;
using D50 = boost::multiprecision::cpp_dec_float_50;

namespace {

const char* kHeun = R"(# Heun-Euler 2(1)
2 2 1
c 1 1
a 1 0 1
b 0 0.5
b 1 0.5
bhat 0 1
)";

bool message_has(const std::function<void()>& f, const std::string& needle) {
  try {
    f();
  } catch (const ParseError& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_SUITE("tableau") {
  TEST_CASE("bundled 9(8) pair") {
    const auto& t = ButcherTableau::verner98();
    CHECK(t.stages() == 16);
    CHECK(t.order() == 9);
    CHECK(t.embedded_order() == 8);
    CHECK_NOTHROW(t.validate());
    const auto r = t.residuals();
    CHECK(r.row_sum < 1e-40);
    CHECK(r.b_sum < 1e-40);
    CHECK(r.bhat_sum < 1e-40);
  }

  TEST_CASE("quadrature conditions at 50 digits") {
    const auto& t = ButcherTableau::verner98();
    const std::size_t S = t.stages();
    for (int k = 1; k <= 10; ++k) {
      D50 sb = 0, sbh = 0;
      for (std::size_t i = 0; i < S; ++i) {
        const D50 ck = pow(D50(t.c_text(i)), k - 1);
        sb += D50(t.b_text(i)) * ck;
        sbh += D50(t.bhat_text(i)) * ck;
      }
      const D50 exact = D50(1) / k;
      const double eb = abs(sb - exact).convert_to<double>();
      const double ebh = abs(sbh - exact).convert_to<double>();
      if (k <= 9) CHECK(eb < 1e-40);
      if (k <= 8) CHECK(ebh < 1e-40);
      if (k == 9) CHECK(ebh > 1e-8);  // the embedded weights are genuinely order 8
    }
    // a second-level condition: sum b_i c_i a_ij c_j = 1/8
    D50 acc = 0;
    for (std::size_t i = 0; i < S; ++i)
      for (std::size_t j = 0; j < i; ++j)
        acc += D50(t.b_text(i)) * D50(t.c_text(i)) * D50(t.a_text(i, j)) * D50(t.c_text(j));
    CHECK(abs(acc - D50(1) / 8).convert_to<double>() < 1e-40);
  }

  TEST_CASE("materialized coefficients") {
    const RKCoefficients<double> rk(ButcherTableau::verner98());
    CHECK(rk.stages == 16);
    CHECK(rk.a[0].empty());
    CHECK(rk.a[15].size() == 15);
    double s = 0;
    for (double e : rk.e) s += e;
    CHECK(std::abs(s) < 1e-15);
  }

  TEST_CASE("parse small tableau") {
    const auto t = ButcherTableau::parse(kHeun);
    CHECK(t.stages() == 2);
    CHECK(t.c_text(1) == "1");
    CHECK(t.a_text(1, 0) == "1");
    CHECK(t.a_text(0, 1) == "0");
    CHECK(t.bhat_text(1) == "0");
    CHECK_NOTHROW(t.validate());
  }

  TEST_CASE("parse errors carry the line number") {
    CHECK(message_has([] { ButcherTableau::parse("2 2 1\nc 1 abc\n", "t.tab"); }, "t.tab:2"));
    CHECK(message_has([] { ButcherTableau::parse("2 2 1\nx 1 1\n"); }, "unknown row key"));
    CHECK(message_has([] { ButcherTableau::parse("2 2 1\n\n# c\nc 5 1\n"); }, ":4:"));
    CHECK(message_has([] { ButcherTableau::parse("2 2\n"); }, "header"));
    CHECK(message_has([] { ButcherTableau::parse("# only a comment\n"); }, "missing header"));
    CHECK(message_has([] { ButcherTableau::parse("2 2 1\na 0 1 0.5\n"); }, "strictly lower"));
    CHECK(message_has([] { ButcherTableau::parse("2 2 1\na 1 1 0.5\n"); }, "strictly lower"));
    CHECK_THROWS_AS(ButcherTableau::load("/nonexistent/file.tab"), ParseError);
  }

  TEST_CASE("validation rejects inconsistent rows") {
    const std::string bad = std::string(kHeun) + "c 1 0.75\n";
    CHECK_THROWS_AS(ButcherTableau::parse(bad).validate(), InvariantError);
    const std::string badb = std::string(kHeun) + "b 1 0.6\n";
    CHECK_THROWS_AS(ButcherTableau::parse(badb).validate(), InvariantError);
  }

  TEST_CASE("parse_real") {
    CHECK(parse_real<double>("0.1") == 0.1);
    CHECK(parse_real<double>(" +2.5e-3 ") == 2.5e-3);
    CHECK(parse_real<double>("-1") == -1.0);
    CHECK(parse_real<double>("0.30000000000000004") == 0.1 + 0.2);
    CHECK_THROWS_AS(parse_real<double>("1.0x"), ParseError);
    CHECK_THROWS_AS(parse_real<double>(""), ParseError);
  }
}
