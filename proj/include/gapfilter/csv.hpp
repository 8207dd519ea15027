#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "gapfilter/common.hpp"

namespace gapfilter {

/// Locale-independent shortest round-trip formatting; identical inputs give
/// byte-identical files.
inline std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  if (res.ec != std::errc()) throw io_error("number formatting failed");
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw io_error("cannot open " + path + " for writing");
    path_ = path;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out_ << ',';
      out_ << header[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ',';
      out_ << format_number(values[i]);
    }
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw io_error("write failed for " + path_);
  }

 private:
  std::ofstream out_;
  std::string path_;
};

}  // namespace gapfilter
