// Copyright pplog contributors
// SPDX-License-Identifier: Apache-2.0
//! \file pplog/report.hpp
//! Machine-readable outputs: deterministic CSV bodies (17 significant
//! digits, '.' decimal, '\n' line ends) and the per-run report JSON.

#ifndef PPLOG_REPORT_HPP
#define PPLOG_REPORT_HPP

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pplog/scenario.hpp"

namespace pplog {

class CsvWriter {
 public:
  explicit CsvWriter(std::initializer_list<std::string> columns) {
    bool first = true;
    for (const auto& c : columns) {
      if (!first) body_ << ',';
      body_ << c;
      first = false;
    }
    body_ << '\n';
  }

  CsvWriter& cell(double v) {
    sep();
    body_ << format_double(v);
    return *this;
  }
  CsvWriter& cell(int v) {
    sep();
    body_ << v;
    return *this;
  }
  CsvWriter& cell(const std::string& v) {
    sep();
    body_ << v;
    return *this;
  }
  void endrow() {
    body_ << '\n';
    at_row_start_ = true;
  }

  std::string str() const { return body_.str(); }

 private:
  void sep() {
    if (!at_row_start_) body_ << ',';
    at_row_start_ = false;
  }
  std::ostringstream body_;
  bool at_row_start_ = true;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

//! Per-run metadata; every warning raised by inner modules appears once.
struct RunReport {
  std::string command;
  std::string scenario_hash;
  int nx = 0, nt = 0;
  double wall_time_s = 0;
  std::vector<std::string> outputs;
  std::set<std::string> warnings;

  void warn(const std::string& w) { warnings.insert(w); }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["scenario_hash"] = scenario_hash;
    j["nx"] = nx;
    j["nt"] = nt;
    j["wall_time_s"] = wall_time_s;
    j["outputs"] = outputs;
    j["warnings"] = std::vector<std::string>(warnings.begin(), warnings.end());
    return j;
  }
};

}  // namespace pplog

#endif
