#pragma once

#include <array>
#include <string>

namespace gradobs {

/// Spatial point. Axis 1 in x[0]; x[1] is unused (zero) on interval domains.
using Point = std::array<double, 2>;

/// Open interval ]0,a[ (dim 1) or open rectangle ]0,a1[ x ]0,a2[ (dim 2)
/// with homogeneous Dirichlet boundary.
struct DomainGeometry {
  int dim = 1;
  std::array<double, 2> length{1.0, 0.0};

  static DomainGeometry interval(double a) { return {1, {a, 0.0}}; }
  static DomainGeometry rectangle(double a1, double a2) { return {2, {a1, a2}}; }
};

/// Axis-aligned open box; used both for observation subregions and zone
/// sensor supports. Must have the same dim as its geometry.
struct Subregion {
  int dim = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 0.0};

  static Subregion interval(double alpha, double beta) { return {1, {alpha, 0.0}, {beta, 0.0}}; }
  static Subregion rectangle(double a1, double b1, double a2, double b2) {
    return {2, {a1, a2}, {b1, b2}};
  }
  static Subregion full(const DomainGeometry& g) {
    Subregion s;
    s.dim = g.dim;
    s.lo = {0.0, 0.0};
    s.hi = g.length;
    return s;
  }

  double measure() const {
    double m = hi[0] - lo[0];
    if (dim == 2) m *= hi[1] - lo[1];
    return m;
  }
  bool contains(const Point& p) const {
    for (int ax = 0; ax < dim; ++ax)
      if (p[ax] < lo[ax] || p[ax] > hi[ax]) return false;
    return true;
  }
};

/// True when s lies inside the closure of the domain.
bool contained_in_domain(const Subregion& s, const DomainGeometry& g);

/// True when p lies inside the closure of the domain.
bool inside_closure(const Point& p, const DomainGeometry& g);

/// True when p is an interior point of the domain.
bool inside_open(const Point& p, const DomainGeometry& g);

std::string describe(const DomainGeometry& g);

/// Spectral mode label. Interval modes use n (j == 0 marks the interval case);
/// rectangle modes use the pair (i, j), both >= 1.
struct ModeIndex {
  int i = 1;
  int j = 0;

  bool is_rect() const { return j > 0; }
  bool operator==(const ModeIndex&) const = default;
  /// Lexicographic; the deterministic tie-break for equal eigenvalues.
  bool operator<(const ModeIndex& o) const { return i != o.i ? i < o.i : j < o.j; }

  static ModeIndex interval(int n) { return {n, 0}; }
  static ModeIndex rectangle(int i, int j) { return {i, j}; }

  /// "3" for interval mode 3, "1_2" for rectangle mode (1,2).
  std::string label() const;
};

}  // namespace gradobs
