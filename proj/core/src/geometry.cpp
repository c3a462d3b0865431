#include "gradobs/geometry.hpp"

#include <string>

namespace gradobs {

bool contained_in_domain(const Subregion& s, const DomainGeometry& g) {
  if (s.dim != g.dim) return false;
  for (int ax = 0; ax < g.dim; ++ax) {
    if (!(s.lo[ax] < s.hi[ax])) return false;
    if (s.lo[ax] < 0.0 || s.hi[ax] > g.length[ax]) return false;
  }
  return true;
}

bool inside_closure(const Point& p, const DomainGeometry& g) {
  for (int ax = 0; ax < g.dim; ++ax)
    if (p[ax] < 0.0 || p[ax] > g.length[ax]) return false;
  return true;
}

bool inside_open(const Point& p, const DomainGeometry& g) {
  for (int ax = 0; ax < g.dim; ++ax)
    if (p[ax] <= 0.0 || p[ax] >= g.length[ax]) return false;
  return true;
}

std::string describe(const DomainGeometry& g) {
  if (g.dim == 1) return "interval ]0," + std::to_string(g.length[0]) + "[";
  return "rectangle ]0," + std::to_string(g.length[0]) + "[ x ]0," +
         std::to_string(g.length[1]) + "[";
}

std::string ModeIndex::label() const {
  if (!is_rect()) return std::to_string(i);
  return std::to_string(i) + "_" + std::to_string(j);
}

}  // namespace gradobs
