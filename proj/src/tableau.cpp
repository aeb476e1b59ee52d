#include "renorm_nbody/tableau.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "renorm_nbody/errors.hpp"

namespace renorm {

namespace detail {
extern const char* const kVerner98Text;
}

namespace {

using Dec50 = boost::multiprecision::cpp_dec_float_50;

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& msg) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + msg);
}

std::size_t parse_index(const std::string& tok, std::size_t n, const std::string& source,
                        std::size_t line) {
  std::size_t pos = 0;
  long long value = -1;
  try {
    value = std::stoll(tok, &pos);
  } catch (const std::exception&) {
    fail(source, line, "bad index '" + tok + "'");
  }
  if (pos != tok.size() || value < 0 || static_cast<std::size_t>(value) >= n)
    fail(source, line, "index '" + tok + "' out of range");
  return static_cast<std::size_t>(value);
}

}  // namespace

ButcherTableau ButcherTableau::parse(std::string_view text, const std::string& source) {
  ButcherTableau tab;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    if (!have_header) {
      if (tok.size() != 3) fail(source, line_no, "expected header 'stages p phat'");
      const std::size_t s = parse_index(tok[0], 1000, source, line_no);
      if (s == 0) fail(source, line_no, "stage count must be positive");
      tab.stages_ = s;
      tab.p_ = static_cast<int>(parse_index(tok[1], 100, source, line_no));
      tab.phat_ = static_cast<int>(parse_index(tok[2], 100, source, line_no));
      tab.c_.assign(s, "0");
      tab.a_.assign(s * s, "0");
      tab.b_.assign(s, "0");
      tab.bhat_.assign(s, "0");
      have_header = true;
      continue;
    }

    const std::size_t s = tab.stages_;
    auto check_value = [&](const std::string& v) {
      try {
        (void)parse_real<double>(v);
      } catch (const ParseError& e) {
        fail(source, line_no, e.what());
      }
      return v;
    };
    const std::string& key = tok[0];
    if (key == "a") {
      if (tok.size() != 4) fail(source, line_no, "expected 'a i j value'");
      const std::size_t i = parse_index(tok[1], s, source, line_no);
      const std::size_t j = parse_index(tok[2], s, source, line_no);
      if (j >= i) fail(source, line_no, "a must be strictly lower triangular");
      tab.a_[i * s + j] = check_value(tok[3]);
    } else if (key == "c" || key == "b" || key == "bhat") {
      if (tok.size() != 3) fail(source, line_no, "expected '" + key + " i value'");
      const std::size_t i = parse_index(tok[1], s, source, line_no);
      auto& row = key == "c" ? tab.c_ : key == "b" ? tab.b_ : tab.bhat_;
      row[i] = check_value(tok[2]);
    } else {
      fail(source, line_no, "unknown row key '" + key + "'");
    }
  }
  if (!have_header) fail(source, line_no, "missing header line");
  return tab;
}

ButcherTableau ButcherTableau::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open tableau file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  ButcherTableau tab = parse(buf.str(), path);
  tab.validate();
  return tab;
}

const ButcherTableau& ButcherTableau::verner98() {
  static const ButcherTableau tab = [] {
    ButcherTableau t = parse(detail::kVerner98Text, "verner98.tab");
    t.validate();
    return t;
  }();
  return tab;
}

ButcherTableau::Residuals ButcherTableau::residuals() const {
  Residuals r{0.0, 0.0, 0.0};
  Dec50 sb(0), sbh(0);
  for (std::size_t i = 0; i < stages_; ++i) {
    Dec50 row(0);
    for (std::size_t j = 0; j < stages_; ++j) row += Dec50(a_[i * stages_ + j]);
    r.row_sum = std::max(r.row_sum, static_cast<double>(abs(Dec50(c_[i]) - row)));
    sb += Dec50(b_[i]);
    sbh += Dec50(bhat_[i]);
  }
  r.b_sum = static_cast<double>(abs(sb - 1));
  r.bhat_sum = static_cast<double>(abs(sbh - 1));
  return r;
}

void ButcherTableau::validate(double tol) const {
  const Residuals r = residuals();
  if (r.row_sum > tol) throw InvariantError("tableau row sums differ from c");
  if (r.b_sum > tol) throw InvariantError("tableau weights b do not sum to 1");
  if (r.bhat_sum > tol) throw InvariantError("tableau weights bhat do not sum to 1");
}

}  // namespace renorm
