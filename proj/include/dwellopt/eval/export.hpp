#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dwellopt/atomic_file.hpp"
#include "dwellopt/case_io.hpp"
#include "dwellopt/eval/report.hpp"
#include "dwellopt/evaluator.hpp"
#include "dwellopt/moea/archive.hpp"

namespace dwellopt::eval {

/// Front as CSV: lci, lsi, constraint, one column per aim (dvi:<id>), one per
/// dwell (t<index>). Values carry 17 significant digits; NaN marks DVIs that
/// were not evaluated.
inline std::string front_csv(std::span<const Solution> plans, const ProtocolConfig& p, std::size_t n_dwells) {
  std::ostringstream os;
  os.precision(17);
  os << "lci,lsi,constraint";
  for (const auto& a : p.aims) os << ",dvi:" << a.id;
  for (std::size_t j = 0; j < n_dwells; ++j) os << ",t" << j;
  os << '\n';
  for (const auto& s : plans) {
    if (s.dwell_times.size() != n_dwells || s.dvi_values.size() != p.aims.size()) throw ContractError("front_csv: plan does not match the header");
    os << s.objectives.lci << ',' << s.objectives.lsi << ',' << s.objectives.constraint;
    for (double v : s.dvi_values) os << ',' << v;
    for (double t : s.dwell_times) os << ',' << t;
    os << '\n';
  }
  return os.str();
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ContractError("csv: no column " + std::string(name));
  }
};

/// Reads a numeric CSV with a header row (as written by front_csv).
inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    return cells;
  };
  if (!std::getline(in, line)) throw ParseError("csv: missing header");
  t.header = split(line);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) throw ParseError("csv: row " + std::to_string(row) + " has the wrong number of cells");
    std::vector<double> values;
    for (const auto& c : cells) {
      try {
        values.push_back(c == "nan" || c == "-nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(c));
      } catch (const std::exception&) {
        throw ParseError("csv: row " + std::to_string(row) + ": not a number '" + c + "'");
      }
    }
    t.rows.push_back(std::move(values));
  }
  return t;
}

/// Generation-indexed best-LCI / best min(LCI, LSI) trace for plotting.
inline std::string trace_csv(std::span<const double> best_lci, std::span<const double> best_balanced) {
  std::ostringstream os;
  os.precision(17);
  os << "generation,best_lci,best_min_lci_lsi\n";
  for (std::size_t g = 0; g < best_lci.size(); ++g)
    os << g + 1 << ',' << best_lci[g] << ',' << (g < best_balanced.size() ? best_balanced[g] : std::numeric_limits<double>::quiet_NaN()) << '\n';
  return os.str();
}

/// LCI/LSI scatter; `acceptable` flags plans with LCI > 0 and LSI > 0.
inline std::string scatter_csv(std::span<const Solution> plans) {
  std::ostringstream os;
  os.precision(17);
  os << "lci,lsi,acceptable\n";
  for (const auto& s : plans) os << s.objectives.lci << ',' << s.objectives.lsi << ',' << (s.objectives.lci > 0 && s.objectives.lsi > 0 ? 1 : 0) << '\n';
  return os.str();
}

inline std::vector<Solution> archive_plans(const moea::ElitistArchive& a) {
  std::vector<Solution> out;
  out.reserve(a.size());
  for (const auto& e : a.members()) out.push_back(e.solution);
  return out;
}

inline void export_front(std::span<const Solution> plans, const ProtocolConfig& p, std::size_t n_dwells, const std::filesystem::path& path,
                         const json& metadata) {
  write_file_atomic(path, front_csv(plans, p, n_dwells));
  auto meta_path = path;
  meta_path += ".meta.json";
  write_file_atomic(meta_path, metadata.dump(2) + "\n");
}

}  // namespace dwellopt::eval
