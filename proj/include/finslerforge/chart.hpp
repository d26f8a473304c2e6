#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace finslerforge {

/// Names and ordering of the coordinates of a computation chart, with the
/// base/fiber split and the shell tags used by the 2+2+2+2 ansatz.
class Chart {
 public:
  /// 8-d tangent-bundle chart: base x1..x4 (x3 doubles as the first-shell
  /// fiber variable v), fibers y5..y8. Aliases: y1..y4 -> y5..y8, v -> x3.
  static Chart tangent_bundle8();
  /// 4-d spacetime chart x1..x4 with alias t -> x1 (ADM splitting).
  static Chart spacetime4();

  int size() const { return static_cast<int>(names_.size()); }
  int nbase() const { return nbase_; }
  int nfiber() const { return size() - nbase_; }

  /// Coordinate index for a name or alias, -1 when undeclared.
  int index_of(const std::string& name) const;
  const std::string& name(int index) const { return names_[index]; }

  /// Coordinate indices of base resp. fiber blocks.
  std::vector<int> base_indices() const;
  std::vector<int> fiber_indices() const;
  std::vector<int> all_indices() const;

  /// Coordinate index pair of a shell (0, 1 or 2) on the 8-d chart.
  std::pair<int, int> shell(int s) const { return shells_.at(s); }
  bool has_shells() const { return !shells_.empty(); }

 private:
  std::vector<std::string> names_;
  std::map<std::string, int> lookup_;
  int nbase_ = 0;
  std::vector<std::pair<int, int>> shells_;
};

}  // namespace finslerforge
