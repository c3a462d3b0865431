#include "gradobs/strategic.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "gradobs/errors.hpp"

namespace gradobs {
namespace {

int numerical_rank(const Eigen::VectorXd& sv, const RankTolerances& tol) {
  if (sv.size() == 0) return 0;
  const double floor = std::max(tol.rank_rel_tol * sv[0], tol.rank_abs_tol);
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv[k] > floor) ++rank;
  return rank;
}

// (e^{sT} - 1)/s, continuous T at s = 0.
double exp_integral(double s, double T) {
  if (s == 0.0) return T;
  return std::expm1(s * T) / s;
}

}  // namespace

std::vector<EigenCluster> cluster_eigenvalues(const DiffusionModel& model, double rel_tol) {
  const auto pairs = eigenpairs(model);
  std::vector<EigenCluster> clusters;
  for (size_t k = 0; k < pairs.size(); ++k) {
    const double lambda = pairs[k].lambda;
    bool joins = false;
    if (!clusters.empty()) {
      const double prev = pairs[k - 1].lambda;
      joins = std::abs(prev - lambda) <= rel_tol * std::max(1.0, std::abs(prev));
    }
    if (!joins) {
      EigenCluster c;
      c.lambda = lambda;
      clusters.push_back(std::move(c));
    }
    clusters.back().members.push_back(pairs[k].index);
    clusters.back().positions.push_back(static_cast<int>(k));
  }
  return clusters;
}

ClusterMeasurement build_cluster_measurement(const OutputOperator& output,
                                             const EigenCluster& cluster,
                                             const RankTolerances& tol) {
  ClusterMeasurement cm;
  cm.cluster = cluster;
  const Eigen::Index q = output.C.rows();
  const Eigen::Index r = static_cast<Eigen::Index>(cluster.positions.size());
  cm.Gm.resize(q, r);
  for (Eigen::Index k = 0; k < r; ++k)
    cm.Gm.col(k) = output.C.col(cluster.positions[static_cast<size_t>(k)]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cm.Gm);
  cm.singular_values = svd.singularValues();
  cm.rank = numerical_rank(cm.singular_values, tol);
  return cm;
}

StrategicReport check_strategic(const OutputOperator& output, const Subregion& omega,
                                double unstable_margin, const RankTolerances& tol) {
  if (omega.dim != output.model.geometry.dim)
    throw ConfigError("observation subregion dimension does not match the domain");
  if (!contained_in_domain(omega, output.model.geometry))
    throw ConfigError("observation subregion must lie inside the domain");
  StrategicReport report;
  report.q = output.sensor_count();
  report.margin = std::numeric_limits<double>::infinity();
  bool all_full_rank = true;
  for (const auto& cluster : cluster_eigenvalues(output.model)) {
    if (cluster.lambda < -unstable_margin) continue;
    ClusterMeasurement cm = build_cluster_measurement(output, cluster, tol);
    StrategicReport::ClusterEntry entry;
    entry.lambda = cluster.lambda;
    entry.members = cluster.members;
    entry.multiplicity = cluster.multiplicity();
    entry.rank = cm.rank;
    entry.required_rank = cluster.multiplicity();
    entry.singular_values = cm.singular_values;
    report.r = std::max(report.r, entry.required_rank);
    all_full_rank &= entry.full_rank();
    const double sigma_required =
        cm.singular_values.size() >= entry.required_rank
            ? cm.singular_values[entry.required_rank - 1]
            : 0.0;
    report.margin = std::min(report.margin, sigma_required);
    report.clusters.push_back(std::move(entry));
  }
  report.verdict = report.q >= report.r && all_full_rank;
  return report;
}

StrategicReport check_strategic(const std::vector<Sensor>& sensors,
                                const DiffusionModel& model, const Subregion& omega,
                                double unstable_margin, const RankTolerances& tol,
                                int quadrature_order) {
  return check_strategic(build_output_matrix(sensors, model, quadrature_order), omega,
                         unstable_margin, tol);
}

nlohmann::json to_json(const StrategicReport& report) {
  nlohmann::json j;
  j["q"] = report.q;
  j["r"] = report.r;
  j["verdict"] = report.verdict;
  if (std::isfinite(report.margin))
    j["margin"] = report.margin;
  else
    j["margin"] = nullptr;
  j["clusters"] = nlohmann::json::array();
  for (const auto& entry : report.clusters) {
    nlohmann::json c;
    c["lambda"] = entry.lambda;
    c["members"] = nlohmann::json::array();
    for (const auto& m : entry.members) {
      if (m.is_rect())
        c["members"].push_back({m.i, m.j});
      else
        c["members"].push_back({m.i});
    }
    c["multiplicity"] = entry.multiplicity;
    c["rank"] = entry.rank;
    c["required_rank"] = entry.required_rank;
    c["singular_values"] = std::vector<double>(
        entry.singular_values.data(),
        entry.singular_values.data() + entry.singular_values.size());
    j["clusters"].push_back(std::move(c));
  }
  return j;
}

GramianVerdict gramian_oracle(const OutputOperator& output, const Subregion& omega,
                              const GramianOptions& options) {
  const auto pairs = eigenpairs(output.model);
  std::vector<int> subset = options.mode_subset;
  if (subset.empty()) {
    subset.resize(pairs.size());
    for (size_t k = 0; k < pairs.size(); ++k) subset[k] = static_cast<int>(k);
  }
  for (int pos : subset)
    if (pos < 0 || pos >= static_cast<int>(pairs.size()))
      throw std::invalid_argument("gramian_oracle: mode position out of range");

  const Eigen::Index n = static_cast<Eigen::Index>(subset.size());
  GramianVerdict verdict;
  verdict.W.resize(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double lam_sum = pairs[subset[a]].lambda + pairs[subset[b]].lambda;
      const double coupling = output.C.col(subset[a]).dot(output.C.col(subset[b]));
      const double w = coupling * exp_integral(lam_sum, options.horizon);
      verdict.W(a, b) = w;
      verdict.W(b, a) = w;
    }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(verdict.W);
  if (eig.info() != Eigen::Success)
    throw NumericalError("gramian_oracle: symmetric eigensolve failed");
  verdict.eigenvalues = eig.eigenvalues();  // ascending
  const double sigma_max = std::max(0.0, verdict.eigenvalues[n - 1]);
  const double floor = options.null_rel_tol * sigma_max;

  const QuadratureGrid grid = make_grid(omega, options.quadrature_order);
  verdict.observable = true;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (verdict.eigenvalues[k] > floor && sigma_max > 0.0) break;
    ModalState direction = ModalState::Zero(static_cast<Eigen::Index>(pairs.size()));
    for (Eigen::Index a = 0; a < n; ++a) direction[subset[a]] = eig.eigenvectors()(a, k);
    const double norm = h1_norm_omega(modal_gradient_field(output.model, direction, grid));
    if (norm >= options.field_tol) {
      verdict.observable = false;
      verdict.violating_direction = eig.eigenvectors().col(k);
      verdict.violating_norm = norm;
      break;
    }
  }
  return verdict;
}

bool detectability_check(const StrategicReport& report) { return report.verdict; }

}  // namespace gradobs
