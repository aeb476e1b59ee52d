#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace renorm {

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

/// Minimal CSV emitter: a header row, then numeric or text rows.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);

  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);
  void row_text(const std::vector<std::string>& cells);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

}  // namespace renorm
