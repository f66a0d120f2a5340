#pragma once

// Comma-separated tables and number formatting shared by all outputs.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hcho/errors.hpp"

namespace hcho {

// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}
inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

inline std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

// %.17g round-trips every double; %a gives the exact bits.
inline std::string format_number(double x, bool hexfloat = false) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, hexfloat ? "%a" : "%.17g", x);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header, bool hexfloat = false)
      : header_(std::move(header)), hexfloat_(hexfloat) {}

  class Row {
   public:
    Row(CsvTable& t) : t_(t) {}
    Row& num(double x) {
      cells_.push_back(format_number(x, t_.hexfloat_));
      return *this;
    }
    Row& integer(long long x) {
      cells_.push_back(std::to_string(x));
      return *this;
    }
    Row& text(std::string s) {
      cells_.push_back(std::move(s));
      return *this;
    }
    ~Row() noexcept(false) { t_.rows_.push_back(std::move(cells_)); }

   private:
    CsvTable& t_;
    std::vector<std::string> cells_;
  };

  Row row() { return Row(*this); }
  std::size_t size() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) {
      if (r.size() != header_.size()) throw ConfigError("table: row width does not match header");
      line(r);
    }
    return out;
  }

  void write(const std::filesystem::path& path) const { write_text(path, str()); }

  static void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw ConfigError("write failed: " + path.string());
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  bool hexfloat_;
};

}  // namespace hcho
