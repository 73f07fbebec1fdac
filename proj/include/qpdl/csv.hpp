#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpdl {

/// Deterministic CSV writer: fixed %.12g formatting, '#'-prefixed header line.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header) : out_(path) {
    if (!out_) throw std::invalid_argument("csv: cannot open " + path);
    out_ << "# " << header << "\n";
  }

  void row(const std::vector<double>& values) {
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.12g", values[i]);
      out_ << buf << (i + 1 == values.size() ? "\n" : ",");
    }
  }

 private:
  std::ofstream out_;
};

}  // namespace qpdl
