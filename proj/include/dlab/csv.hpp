#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace dlab {

// Fixed formatting so identical inputs give identical bytes.
class Csv {
 public:
  Csv() = default;
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}

  template <class... T>
  void row(const T&... v) {
    if (sizeof...(T) != header_.size()) throw std::invalid_argument("csv row width does not match header");
    std::vector<std::string> r;
    (r.push_back(cell(v)), ...);
    rows_.push_back(std::move(r));
  }

  const std::vector<std::string>& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }

  std::string str() const {
    std::ostringstream os;
    line(os, header_);
    for (const auto& r : rows_) line(os, r);
    return os.str();
  }

  void write(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << str();
  }

  template <class T>
  static std::string cell(const T& v) {
    if constexpr (std::is_same_v<T, bool>) {
      return v ? "1" : "0";
    } else if constexpr (std::is_floating_point_v<T>) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.10g", static_cast<double>(v));
      return buf;
    } else if constexpr (std::is_integral_v<T>) {
      return std::to_string(v);
    } else {
      return quote(std::string(v));
    }
  }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + '"';
  }

  static void line(std::ostream& os, const std::vector<std::string>& r) {
    for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << r[k];
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace dlab
