#include "finslerforge/chart.hpp"

namespace finslerforge {

Chart Chart::tangent_bundle8() {
  Chart c;
  c.names_ = {"x1", "x2", "x3", "x4", "y5", "y6", "y7", "y8"};
  c.nbase_ = 4;
  for (int i = 0; i < 8; ++i) c.lookup_[c.names_[i]] = i;
  // fiber aliases used by 4-d generating functions and the MDR block
  c.lookup_["y1"] = 4;
  c.lookup_["y2"] = 5;
  c.lookup_["y3"] = 6;
  c.lookup_["y4"] = 7;
  c.lookup_["v"] = 2;
  c.shells_ = {{2, 3}, {4, 5}, {6, 7}};
  return c;
}

Chart Chart::spacetime4() {
  Chart c;
  c.names_ = {"x1", "x2", "x3", "x4"};
  c.nbase_ = 4;
  for (int i = 0; i < 4; ++i) c.lookup_[c.names_[i]] = i;
  c.lookup_["t"] = 0;
  return c;
}

int Chart::index_of(const std::string& name) const {
  auto it = lookup_.find(name);
  return it == lookup_.end() ? -1 : it->second;
}

std::vector<int> Chart::base_indices() const {
  std::vector<int> out;
  for (int i = 0; i < nbase_; ++i) out.push_back(i);
  return out;
}

std::vector<int> Chart::fiber_indices() const {
  std::vector<int> out;
  for (int i = nbase_; i < size(); ++i) out.push_back(i);
  return out;
}

std::vector<int> Chart::all_indices() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) out.push_back(i);
  return out;
}

}  // namespace finslerforge
