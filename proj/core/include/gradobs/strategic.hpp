#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "gradobs/field.hpp"
#include "gradobs/sensors.hpp"

namespace gradobs {

/// Group of retained modes sharing one eigenvalue up to a relative tolerance.
struct EigenCluster {
  double lambda = 0.0;                 // representative (largest member)
  std::vector<ModeIndex> members;      // in eigenpairs order
  std::vector<int> positions;          // positions inside eigenpairs(model)

  int multiplicity() const { return static_cast<int>(members.size()); }
};

/// Greedy clustering of the sorted eigenvalue sequence: consecutive
/// eigenvalues with |lambda_k - lambda_{k+1}| <= rel_tol * max(1, |lambda_k|)
/// join one cluster. Deterministic given the eigenpairs ordering.
std::vector<EigenCluster> cluster_eigenvalues(const DiffusionModel& model,
                                              double rel_tol = 1e-9);

/// Measurement matrix of one cluster: q x r_m, entry (s, k) = measurement of
/// sensor s against member k, plus its singular values and numerical rank.
struct ClusterMeasurement {
  EigenCluster cluster;
  Eigen::MatrixXd Gm;
  Eigen::VectorXd singular_values;  // descending
  int rank = 0;
};

/// Numerical rank thresholds. A singular value counts toward the rank when it
/// exceeds max(rank_rel_tol * sigma_max, rank_abs_tol); the absolute floor
/// absorbs roundoff like fl(sin(pi)) != 0 in analytically-zero rows.
struct RankTolerances {
  double rank_rel_tol = 1e-10;
  double rank_abs_tol = 1e-12;
};

ClusterMeasurement build_cluster_measurement(const OutputOperator& output,
                                             const EigenCluster& cluster,
                                             const RankTolerances& tol = {});

/// Rank-test verdict over the unstable part of the spectrum.
struct StrategicReport {
  struct ClusterEntry {
    double lambda = 0.0;
    std::vector<ModeIndex> members;
    int multiplicity = 0;
    int rank = 0;
    int required_rank = 0;
    Eigen::VectorXd singular_values;
    bool full_rank() const { return rank == required_rank; }
  };
  std::vector<ClusterEntry> clusters;  // unstable clusters only, descending lambda
  int q = 0;                           // sensor count
  int r = 0;                           // max unstable multiplicity (0 if none)
  bool verdict = false;
  /// min over unstable clusters of the required_rank-th singular value;
  /// +infinity when no cluster is unstable.
  double margin = 0.0;
};

/// Sensor-count and per-cluster full-rank test over clusters with
/// lambda >= -unstable_margin. verdict = (q >= r) and every unstable cluster
/// full rank. omega is carried for context only; the rank data does not
/// depend on it.
StrategicReport check_strategic(const std::vector<Sensor>& sensors,
                                const DiffusionModel& model, const Subregion& omega,
                                double unstable_margin = 0.0,
                                const RankTolerances& tol = {},
                                int quadrature_order = 64);

StrategicReport check_strategic(const OutputOperator& output, const Subregion& omega,
                                double unstable_margin = 0.0,
                                const RankTolerances& tol = {});

nlohmann::json to_json(const StrategicReport& report);

/// Independent observability check used to cross-validate the rank test.
struct GramianVerdict {
  bool observable = false;
  Eigen::MatrixXd W;                 // modal gramian over the selected modes
  Eigen::VectorXd eigenvalues;       // ascending, from the symmetric eigensolve
  /// Null direction whose regional gradient norm violates observability;
  /// empty when observable. Coefficients live on the selected mode subset.
  Eigen::VectorXd violating_direction;
  double violating_norm = 0.0;
};

struct GramianOptions {
  double horizon = 1.0;
  double null_rel_tol = 1e-10;   // null space: sigma < tol * sigma_max
  double field_tol = 1e-8;       // H1(omega)^n norm below which a direction is
                                 // considered invisible on omega
  int quadrature_order = 64;
  /// Positions (into eigenpairs order) to restrict the gramian to; empty = all.
  std::vector<int> mode_subset;
};

/// Finite-horizon modal observability gramian
///   W_{m,m'} = sum_i c_{i,m} c_{i,m'} * int_0^T e^{(lambda_m + lambda_m') s} ds
/// (closed-form integrals). Null directions of W are accepted only when their
/// gradient field is numerically zero on omega in H1(omega)^n; otherwise the
/// verdict is not observable and the smallest violating direction is returned.
GramianVerdict gramian_oracle(const OutputOperator& output, const Subregion& omega,
                              const GramianOptions& options = {});

/// The rank verdict doubles as the detectability answer for the retained
/// dynamics: unstable clusters are exactly the ones that must be observable.
bool detectability_check(const StrategicReport& report);

}  // namespace gradobs
