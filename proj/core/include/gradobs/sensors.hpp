#pragma once

#include <variant>
#include <vector>

#include <Eigen/Core>

#include "gradobs/model.hpp"
#include "gradobs/quadrature.hpp"

namespace gradobs {

/// Spatial weight attached to zone-type sensors. Separable across axes.
struct SensorWeight {
  enum class Kind { Constant, Symmetric, Tabulated } kind = Kind::Constant;
  /// Tabulated only: per-axis sample values, linearly interpolated on a
  /// uniform grid spanning the support along that axis. table[1] unused in 1D.
  std::array<std::vector<double>, 2> table;

  static SensorWeight constant() { return {}; }
  /// Parabolic bump 1 - ((xi-c)/l)^2 per axis: even about the support center,
  /// zero at the support edges.
  static SensorWeight symmetric() { return {Kind::Symmetric, {}}; }
  static SensorWeight tabulated(std::vector<double> axis1,
                                std::vector<double> axis2 = {}) {
    return {Kind::Tabulated, {std::move(axis1), std::move(axis2)}};
  }

  /// Evaluate on [lo,hi] per axis at the in-support coordinate xi.
  double evaluate_axis(int axis, double lo, double hi, double xi) const;
};

/// Interior point evaluation phi_m(b).
struct PointwiseSensor {
  Point b{0.5, 0.0};
};

/// Weighted zone average int_D phi_m f over an axis-aligned box D strictly
/// inside the domain.
struct ZoneSensor {
  Subregion support;
  SensorWeight weight;
};

enum class BoundaryEdge { Left, Right, Bottom, Top };  // x1=0, x1=a1, x2=0, x2=a2

/// One edge segment of a boundary zone sensor. Rectangle domains only.
struct BoundarySegment {
  BoundaryEdge edge = BoundaryEdge::Bottom;
  double lo = 0.0;  // in-edge coordinate range
  double hi = 1.0;
};

/// Weighted flux average int_Gamma0 (d phi_m / d nu) f over one or more edge
/// segments forming a single sensor (a multi-segment support contributes the
/// sum of its segment integrals to one output row). The weight applies per
/// segment, centered on that segment.
struct BoundaryZoneSensor {
  std::vector<BoundarySegment> parts;
  SensorWeight weight;
};

/// Boundary point flux evaluation (d phi_m / d nu)(b); b on the boundary.
/// The plain trace phi_m(b) vanishes identically there, so the flux is the
/// informative pointwise boundary measurement.
struct BoundaryPointwiseSensor {
  Point b{0.0, 0.0};
};

/// Weighted line integral int_sigma phi_m f ds over a polyline; per-segment
/// constant weights (empty = all ones). Integrated with fixed-order
/// Gauss-Legendre per segment.
struct FilamentSensor {
  std::vector<Point> points;
  std::vector<double> segment_weights;
  int nodes_per_segment = 16;
};

using Sensor = std::variant<PointwiseSensor, ZoneSensor, BoundaryZoneSensor,
                            BoundaryPointwiseSensor, FilamentSensor>;

/// Geometry validation; throws ConfigError with a description of the offense.
void validate_sensor(const Sensor& sensor, const DomainGeometry& geometry);

/// Modal measurement coefficient of one sensor against mode m. Constant-weight
/// zone and boundary-zone integrals use closed forms; other weights integrate
/// with Gauss-Legendre of the given per-axis order.
double mode_measurement(const Sensor& sensor, const DiffusionModel& model,
                        const ModeIndex& m, int quadrature_order = 64);

/// Output operator C: q x M, row i = measurements of sensor i across
/// eigenpairs(model) order.
struct OutputOperator {
  DiffusionModel model;
  std::vector<Sensor> sensors;
  Eigen::MatrixXd C;

  int sensor_count() const { return static_cast<int>(sensors.size()); }
};

OutputOperator build_output_matrix(const std::vector<Sensor>& sensors,
                                   const DiffusionModel& model,
                                   int quadrature_order = 64);

}  // namespace gradobs
