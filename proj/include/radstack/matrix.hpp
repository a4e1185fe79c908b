#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "radstack/common.hpp"
#include "radstack/descriptors.hpp"

namespace radstack {

/// subjects x descriptors value table. NaN is permitted pre-imputation.
struct FeatureMatrix {
  std::vector<FeatureDescriptor> descriptors;
  std::vector<std::string> subject_ids;
  std::vector<double> values;  // row-major, shape |subjects| x |descriptors|

  std::size_t rows() const { return subject_ids.size(); }
  std::size_t cols() const { return descriptors.size(); }

  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> col(rows());
    for (std::size_t r = 0; r < rows(); ++r) col[r] = at(r, c);
    return col;
  }

  int column_index(const std::string& descriptor_str) const {
    for (std::size_t c = 0; c < descriptors.size(); ++c)
      if (descriptors[c].str() == descriptor_str) return static_cast<int>(c);
    return -1;
  }

  /// New matrix restricted to the given column indices, order preserved.
  FeatureMatrix select_columns(const std::vector<std::size_t>& cols_keep) const {
    FeatureMatrix out;
    out.subject_ids = subject_ids;
    out.descriptors.reserve(cols_keep.size());
    for (auto c : cols_keep) out.descriptors.push_back(descriptors[c]);
    out.values.resize(rows() * cols_keep.size());
    for (std::size_t r = 0; r < rows(); ++r)
      for (std::size_t j = 0; j < cols_keep.size(); ++j)
        out.values[r * cols_keep.size() + j] = at(r, cols_keep[j]);
    return out;
  }
};

namespace detail {

inline std::string format_value(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[40];
  // 17 significant digits round-trips doubles exactly
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

}  // namespace detail

inline void write_feature_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write feature table: " + path.string());
  out << "subject_id";
  for (const auto& d : m.descriptors) out << ',' << d.str();
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << m.subject_ids[r];
    for (std::size_t c = 0; c < m.cols(); ++c) out << ',' << detail::format_value(m.at(r, c));
    out << '\n';
  }
}

inline FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open feature table: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw validation_error("empty feature table: " + path.string());
  const auto header = detail::split_csv_line(line);
  if (header.empty() || header[0] != "subject_id")
    throw validation_error("feature table header must start with subject_id: " + path.string());

  FeatureMatrix m;
  m.descriptors.reserve(header.size() - 1);
  for (std::size_t i = 1; i < header.size(); ++i) m.descriptors.push_back(parse_descriptor(header[i]));

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw validation_error("row width mismatch in " + path.string() + " at subject '" +
                             (fields.empty() ? "" : fields[0]) + "'");
    m.subject_ids.push_back(fields[0]);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const std::string& f = fields[i];
      if (f == "NaN" || f == "nan") {
        m.values.push_back(kNaN);
      } else {
        char* end = nullptr;
        const double v = std::strtod(f.c_str(), &end);
        if (end == f.c_str()) throw validation_error("bad numeric value '" + f + "' in " + path.string());
        m.values.push_back(v);
      }
    }
  }
  return m;
}

}  // namespace radstack
