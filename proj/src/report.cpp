#include "finslerforge/report.hpp"

#include <charconv>
#include <fstream>

#include <json.hpp>

namespace finslerforge {

std::string format_shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool Report::pass() const {
  for (const auto& c : checks)
    if (!c.pass()) return false;
  return true;
}

std::string Report::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["pass"] = pass();
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json cj;
    cj["name"] = c.name;
    cj["max_residual"] = c.max_residual;
    cj["tolerance"] = c.tolerance;
    cj["pass"] = c.pass();
    cj["informational"] = c.informational;
    arr.push_back(cj);
  }
  j["checks"] = arr;
  nlohmann::json warn = nlohmann::json::array();
  for (const auto& w : warnings) warn.push_back(w);
  if (checks.empty()) warn.push_back("no checks defined for this run");
  j["warnings"] = warn;
  return j.dump(2) + "\n";
}

void emit_report(const Report& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report to " + path);
  out << r.to_json();
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write CSV to " + path);
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_shortest(row[i]);
    out << "\n";
  }
}

}  // namespace finslerforge
