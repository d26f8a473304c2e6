#pragma once

#include <string>
#include <vector>

namespace finslerforge {

struct Check {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool informational = false;  // measured, never asserted

  bool pass() const { return informational || max_residual < tolerance; }
};

struct Report {
  std::string command;
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  double wall_ms = 0.0;  // console only, never written to the report file

  bool pass() const;
  /// Deterministic JSON text (sorted keys, shortest round-trip floats,
  /// no volatile fields).
  std::string to_json() const;
};

void emit_report(const Report& r, const std::string& path);

/// Deterministic CSV writer (shortest round-trip float formatting).
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::string format_shortest(double v);

}  // namespace finslerforge
