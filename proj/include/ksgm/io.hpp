#pragma once

// Plain-text formats
//
// Panel CSV: optional leading `# key: value` comment lines, then the header
// `label,t,x1,...,xd`, then one row per observation. Subjects are written
// one after another in label order with t = 1..T_i; a new subject starts when
// the label changes or t does not continue the previous row. Reals use 17
// significant digits so text round-trips are exact.
//
// Edge CSV: `label,j,k,value` with 1-based variable indices and j < k.
//
// Matrix CSV: d rows of d comma-separated reals.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ksgm/covariance.hpp"
#include "ksgm/error.hpp"
#include "ksgm/simulate.hpp"

namespace ksgm::io {

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_real(*v) : std::string("NA");
}

using Comments = std::vector<std::pair<std::string, std::string>>;

inline void write_comments(std::ostream& os, const Comments& comments) {
  for (const auto& [key, value] : comments) os << "# " << key << ": " << value << '\n';
}

inline void write_panel(std::ostream& os, const Panel& panel, const Comments& comments = {}) {
  write_comments(os, comments);
  os << "label,t";
  for (int k = 1; k <= panel.dim(); ++k) os << ",x" << k;
  os << '\n';
  for (const auto& s : panel.subjects()) {
    const std::string label = format_real(s.label);
    for (Eigen::Index t = 0; t < s.observations.rows(); ++t) {
      os << label << ',' << (t + 1);
      for (Eigen::Index k = 0; k < s.observations.cols(); ++k) {
        os << ',' << format_real(s.observations(t, k));
      }
      os << '\n';
    }
  }
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_real(std::string_view field, std::size_t line_no) {
  std::string s(field);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_no) + ": not a number: '" + s + "'");
  }
  return v;
}

struct PanelFile {
  Panel panel;
  std::map<std::string, std::string> comments;
};

inline PanelFile read_panel(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  PanelFile out;

  // comments and header
  int d = -1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        auto key = line.substr(1, colon - 1);
        auto value = line.substr(colon + 1);
        auto trim = [](std::string& s) {
          s.erase(0, s.find_first_not_of(' '));
          s.erase(s.find_last_not_of(' ') + 1);
        };
        trim(key);
        trim(value);
        out.comments[key] = value;
      }
      continue;
    }
    const auto fields = split_commas(line);
    if (fields.size() < 3 || fields[0] != "label" || fields[1] != "t") {
      throw Error(ErrorCode::ParseError, "expected header label,t,x1,...");
    }
    for (std::size_t k = 2; k < fields.size(); ++k) {
      if (fields[k] != "x" + std::to_string(k - 1)) {
        throw Error(ErrorCode::ParseError, "unexpected header column '" + std::string(fields[k]) + "'");
      }
    }
    d = static_cast<int>(fields.size()) - 2;
    break;
  }
  if (d < 0) throw Error(ErrorCode::ParseError, "missing header");

  std::vector<Subject> subjects;
  std::vector<std::vector<double>> rows;
  double current_label = 0.0;
  long long last_t = 0;
  auto flush = [&] {
    if (rows.empty()) return;
    Matrix x(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t t = 0; t < rows.size(); ++t) {
      for (int k = 0; k < d; ++k) x(static_cast<Eigen::Index>(t), k) = rows[t][k];
    }
    subjects.push_back({current_label, std::move(x)});
    rows.clear();
  };

  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_commas(line);
    if (static_cast<int>(fields.size()) != d + 2) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": wrong field count");
    }
    const double label = parse_real(fields[0], line_no);
    const double tv = parse_real(fields[1], line_no);
    const auto t = static_cast<long long>(tv);
    if (static_cast<double>(t) != tv || t < 1) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad t");
    }
    if (!(label >= 0.0 && label <= 1.0)) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": label outside [0, 1]");
    }
    if (rows.empty() || label != current_label || t != last_t + 1) {
      flush();
      if (t != 1) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": subject must start at t = 1");
      }
      current_label = label;
    }
    std::vector<double> row(d);
    for (int k = 0; k < d; ++k) row[k] = parse_real(fields[k + 2], line_no);
    rows.push_back(std::move(row));
    last_t = t;
  }
  flush();
  if (subjects.empty()) throw Error(ErrorCode::ParseError, "panel has no observations");
  for (std::size_t i = 1; i < subjects.size(); ++i) {
    if (subjects[i].label < subjects[i - 1].label) {
      throw Error(ErrorCode::ParseError, "rows must be sorted by label");
    }
  }
  out.panel = Panel(std::move(subjects));
  return out;
}

inline PanelFile read_panel_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  return read_panel(in);
}

inline void write_edges_header(std::ostream& os) { os << "label,j,k,value\n"; }

inline void write_edges(std::ostream& os, double label, const std::vector<Edge>& edges) {
  const std::string l = format_real(label);
  for (const auto& e : edges) {
    os << l << ',' << (e.j + 1) << ',' << (e.k + 1) << ',' << format_real(e.value) << '\n';
  }
}

inline void write_matrix(std::ostream& os, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_real(m(i, j));
    }
    os << '\n';
  }
}

inline Matrix read_matrix(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    for (auto f : split_commas(line)) row.push_back(parse_real(f, line_no));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::ParseError, "ragged matrix");
    }
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << content;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ksgm::io
