#include "gradobs/sensors.hpp"

#include <cmath>
#include <stdexcept>

#include "gradobs/errors.hpp"

namespace gradobs {
namespace {

struct EdgeFrame {
  int in_axis;       // axis the segment runs along
  int normal_axis;   // axis the edge is orthogonal to
  double fixed;      // coordinate on the normal axis
};

EdgeFrame edge_frame(BoundaryEdge edge, const DomainGeometry& g) {
  switch (edge) {
    case BoundaryEdge::Left: return {1, 0, 0.0};
    case BoundaryEdge::Right: return {1, 0, g.length[0]};
    case BoundaryEdge::Bottom: return {0, 1, 0.0};
    case BoundaryEdge::Top: return {0, 1, g.length[1]};
  }
  throw ConfigError("unknown boundary edge");
}

Point edge_point(const EdgeFrame& frame, double along) {
  Point p{0.0, 0.0};
  p[frame.in_axis] = along;
  p[frame.normal_axis] = frame.fixed;
  return p;
}

// int_lo^hi sin(k xi) dxi
double sine_integral(double k, double lo, double hi) {
  return (std::cos(k * lo) - std::cos(k * hi)) / k;
}

void check_weight(const SensorWeight& w, int dim) {
  if (w.kind != SensorWeight::Kind::Tabulated) return;
  for (int ax = 0; ax < dim; ++ax) {
    if (w.table[ax].size() < 2)
      throw ConfigError("tabulated weight needs at least 2 samples per axis");
    for (double v : w.table[ax])
      if (!std::isfinite(v)) throw ConfigError("tabulated weight values must be finite");
  }
}

double zone_measurement(const ZoneSensor& s, const DiffusionModel& model,
                        const ModeIndex& m, int order) {
  const auto& g = model.geometry;
  if (s.weight.kind == SensorWeight::Kind::Constant) {
    if (g.dim == 1) {
      const double a = g.length[0], k = m.i * M_PI / a;
      return std::sqrt(2.0 / a) * sine_integral(k, s.support.lo[0], s.support.hi[0]);
    }
    const double a1 = g.length[0], a2 = g.length[1];
    const double k1 = m.i * M_PI / a1, k2 = m.j * M_PI / a2;
    return 2.0 / std::sqrt(a1 * a2) *
           sine_integral(k1, s.support.lo[0], s.support.hi[0]) *
           sine_integral(k2, s.support.lo[1], s.support.hi[1]);
  }
  const QuadratureGrid grid = make_grid(s.support, order);
  double acc = 0.0;
  for (int n = 0; n < grid.size(); ++n) {
    double f = 1.0;
    for (int ax = 0; ax < g.dim; ++ax)
      f *= s.weight.evaluate_axis(ax, s.support.lo[ax], s.support.hi[ax],
                                  grid.nodes[n][ax]);
    acc += grid.weights[n] * f * evaluate_mode(model, m, grid.nodes[n]);
  }
  return acc;
}

double boundary_segment_measurement(const BoundarySegment& part, const SensorWeight& weight,
                                    const DiffusionModel& model, const ModeIndex& m,
                                    int order) {
  const auto& g = model.geometry;
  const EdgeFrame frame = edge_frame(part.edge, g);
  if (weight.kind == SensorWeight::Kind::Constant) {
    // d phi / d nu restricted to an edge is (+/-) c k_normal sin(k_in xi),
    // with the sign from the outward normal and the cos factor at the fixed
    // coordinate.
    const double a1 = g.length[0], a2 = g.length[1];
    const double c = 2.0 / std::sqrt(a1 * a2);
    const double k1 = m.i * M_PI / a1, k2 = m.j * M_PI / a2;
    const double k_in = frame.in_axis == 0 ? k1 : k2;
    const double k_n = frame.normal_axis == 0 ? k1 : k2;
    const double outward = frame.fixed == 0.0 ? -1.0 : 1.0;
    const double cos_fixed = std::cos(k_n * frame.fixed);
    return outward * c * k_n * cos_fixed * sine_integral(k_in, part.lo, part.hi);
  }
  std::vector<double> nodes, weights;
  gauss_legendre(order, part.lo, part.hi, nodes, weights);
  double acc = 0.0;
  for (int n = 0; n < order; ++n) {
    const double f = weight.evaluate_axis(0, part.lo, part.hi, nodes[n]);
    acc += weights[n] * f *
           mode_normal_derivative(model, m, edge_point(frame, nodes[n]));
  }
  return acc;
}

double filament_measurement(const FilamentSensor& s, const DiffusionModel& model,
                            const ModeIndex& m) {
  std::vector<double> nodes, weights;
  gauss_legendre(s.nodes_per_segment, 0.0, 1.0, nodes, weights);
  double acc = 0.0;
  for (size_t seg = 0; seg + 1 < s.points.size(); ++seg) {
    const Point& p = s.points[seg];
    const Point& q = s.points[seg + 1];
    double len = 0.0;
    for (int ax = 0; ax < model.geometry.dim; ++ax)
      len += (q[ax] - p[ax]) * (q[ax] - p[ax]);
    len = std::sqrt(len);
    const double w_seg = s.segment_weights.empty() ? 1.0 : s.segment_weights[seg];
    double seg_acc = 0.0;
    for (int n = 0; n < s.nodes_per_segment; ++n) {
      Point at{0.0, 0.0};
      for (int ax = 0; ax < model.geometry.dim; ++ax)
        at[ax] = p[ax] + nodes[n] * (q[ax] - p[ax]);
      seg_acc += weights[n] * evaluate_mode(model, m, at);
    }
    acc += w_seg * len * seg_acc;
  }
  return acc;
}

}  // namespace

double SensorWeight::evaluate_axis(int axis, double lo, double hi, double xi) const {
  switch (kind) {
    case Kind::Constant:
      return 1.0;
    case Kind::Symmetric: {
      const double c = 0.5 * (lo + hi), l = 0.5 * (hi - lo);
      const double u = (xi - c) / l;
      return 1.0 - u * u;
    }
    case Kind::Tabulated: {
      const auto& t = table[axis];
      const double u = (xi - lo) / (hi - lo) * (t.size() - 1);
      const int k = std::min(static_cast<int>(t.size()) - 2,
                             std::max(0, static_cast<int>(std::floor(u))));
      const double frac = u - k;
      return t[k] * (1.0 - frac) + t[k + 1] * frac;
    }
  }
  return 1.0;
}

void validate_sensor(const Sensor& sensor, const DomainGeometry& geometry) {
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PointwiseSensor>) {
          if (!inside_open(s.b, geometry))
            throw ConfigError("pointwise sensor location must be strictly inside the domain");
        } else if constexpr (std::is_same_v<T, ZoneSensor>) {
          if (s.support.dim != geometry.dim)
            throw ConfigError("zone support dimension does not match the domain");
          for (int ax = 0; ax < geometry.dim; ++ax) {
            if (!(s.support.lo[ax] < s.support.hi[ax]))
              throw ConfigError("zone support must have positive measure");
            if (!(s.support.lo[ax] > 0.0 && s.support.hi[ax] < geometry.length[ax]))
              throw ConfigError("zone support must lie strictly inside the domain");
          }
          check_weight(s.weight, geometry.dim);
        } else if constexpr (std::is_same_v<T, BoundaryZoneSensor>) {
          if (geometry.dim != 2)
            throw ConfigError("boundary zone sensors require a rectangle domain");
          if (s.parts.empty()) throw ConfigError("boundary zone sensor needs >= 1 segment");
          for (const auto& part : s.parts) {
            const EdgeFrame frame = edge_frame(part.edge, geometry);
            const double len = geometry.length[frame.in_axis];
            if (!(part.lo < part.hi))
              throw ConfigError("boundary zone segment must have positive length");
            if (part.lo < 0.0 || part.hi > len)
              throw ConfigError("boundary zone segment exceeds its edge");
          }
          check_weight(s.weight, 1);
        } else if constexpr (std::is_same_v<T, BoundaryPointwiseSensor>) {
          if (!inside_closure(s.b, geometry))
            throw ConfigError("boundary pointwise sensor must lie on the closure");
          bool on_boundary = false;
          for (int ax = 0; ax < geometry.dim; ++ax)
            on_boundary |= s.b[ax] == 0.0 || s.b[ax] == geometry.length[ax];
          if (!on_boundary)
            throw ConfigError("boundary pointwise sensor must lie on the boundary");
        } else if constexpr (std::is_same_v<T, FilamentSensor>) {
          if (s.points.size() < 2) throw ConfigError("filament needs at least 2 points");
          for (const auto& p : s.points)
            if (!inside_closure(p, geometry))
              throw ConfigError("filament points must lie in the closure of the domain");
          for (size_t k = 0; k + 1 < s.points.size(); ++k)
            if (s.points[k] == s.points[k + 1])
              throw ConfigError("filament segments must have positive length");
          if (!s.segment_weights.empty() &&
              s.segment_weights.size() != s.points.size() - 1)
            throw ConfigError("filament weight count must equal segment count");
          if (s.nodes_per_segment < 1)
            throw ConfigError("filament quadrature needs >= 1 node per segment");
        }
      },
      sensor);
}

double mode_measurement(const Sensor& sensor, const DiffusionModel& model,
                        const ModeIndex& m, int quadrature_order) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PointwiseSensor>) {
          return evaluate_mode(model, m, s.b);
        } else if constexpr (std::is_same_v<T, ZoneSensor>) {
          return zone_measurement(s, model, m, quadrature_order);
        } else if constexpr (std::is_same_v<T, BoundaryZoneSensor>) {
          double acc = 0.0;
          for (const auto& part : s.parts)
            acc += boundary_segment_measurement(part, s.weight, model, m, quadrature_order);
          return acc;
        } else if constexpr (std::is_same_v<T, BoundaryPointwiseSensor>) {
          return mode_normal_derivative(model, m, s.b);
        } else {
          return filament_measurement(s, model, m);
        }
      },
      sensor);
}

OutputOperator build_output_matrix(const std::vector<Sensor>& sensors,
                                   const DiffusionModel& model, int quadrature_order) {
  validate_model(model);
  if (sensors.empty()) throw ConfigError("at least one sensor is required");
  for (const auto& s : sensors) validate_sensor(s, model.geometry);
  OutputOperator out;
  out.model = model;
  out.sensors = sensors;
  const auto pairs = eigenpairs(model);
  out.C.resize(static_cast<Eigen::Index>(sensors.size()),
               static_cast<Eigen::Index>(pairs.size()));
  for (size_t i = 0; i < sensors.size(); ++i)
    for (size_t mpos = 0; mpos < pairs.size(); ++mpos)
      out.C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(mpos)) =
          mode_measurement(sensors[i], model, pairs[mpos].index, quadrature_order);
  return out;
}

}  // namespace gradobs
