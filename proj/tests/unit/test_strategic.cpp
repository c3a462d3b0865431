#include <cmath>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "gradobs/model.hpp"
#include "gradobs/sensors.hpp"
#include "gradobs/strategic.hpp"

using namespace gradobs;

namespace {

DiffusionModel drift_interval(int n) {
  DiffusionModel m;
  m.geometry = DomainGeometry::interval(1.0);
  m.gamma1 = 0.01;
  m.gamma2 = 1.0;
  m.n1 = n;
  return m;
}

DiffusionModel drift_square(int n) {
  DiffusionModel m;
  m.geometry = DomainGeometry::rectangle(1.0, 1.0);
  m.gamma1 = 0.01;
  m.gamma2 = 0.6;
  m.n1 = n;
  m.n2 = n;
  return m;
}

const Subregion kOmega = Subregion::interval(0.2, 0.8);

}  // namespace

TEST_SUITE_BEGIN("strategic");

TEST_CASE("eigenvalue clustering") {
  // Interval spectra are simple: one cluster per mode.
  const auto m = drift_interval(8);
  const auto clusters = cluster_eigenvalues(m);
  REQUIRE(clusters.size() == 8);
  for (size_t k = 0; k < clusters.size(); ++k) {
    CHECK(clusters[k].multiplicity() == 1);
    if (k > 0) CHECK(clusters[k - 1].lambda > clusters[k].lambda);
  }

  // On the square the swapped index pairs are exactly degenerate and must
  // land in one cluster with lexicographic member order.
  const auto sq = drift_square(3);
  const auto sc = cluster_eigenvalues(sq);
  bool found_pair = false;
  for (const auto& c : sc) {
    const auto pairs = eigenpairs(sq);
    for (size_t k = 0; k < c.members.size(); ++k)
      CHECK(pairs[c.positions[k]].index == c.members[k]);
    if (c.members == std::vector<ModeIndex>{ModeIndex::rectangle(1, 2),
                                            ModeIndex::rectangle(2, 1)}) {
      found_pair = true;
      CHECK(c.multiplicity() == 2);
      CHECK(c.lambda == doctest::Approx(0.6 - 0.05 * M_PI * M_PI).epsilon(1e-14));
    }
  }
  CHECK(found_pair);

  // A coarse tolerance merges the near-degenerate tail into wider clusters.
  const auto coarse = cluster_eigenvalues(m, 0.5);
  CHECK(coarse.size() < 8);
  int total = 0;
  for (const auto& c : coarse) total += c.multiplicity();
  CHECK(total == 8);
}

TEST_CASE("rank test across the unstable interval modes") {
  const auto m = drift_interval(16);
  const std::vector<Sensor> sensors = {PointwiseSensor{Point{1.0 / std::sqrt(2.0), 0.0}}};
  const auto report = check_strategic(sensors, m, kOmega);
  CHECK(report.q == 1);
  CHECK(report.r == 1);
  REQUIRE(report.clusters.size() == 3);  // modes 1..3 sit above zero
  CHECK(report.clusters[0].lambda == doctest::Approx(0.90130395598910641).epsilon(1e-14));
  for (const auto& c : report.clusters) {
    CHECK(c.multiplicity == 1);
    CHECK(c.rank == 1);
    CHECK(c.required_rank == 1);
  }
  CHECK(report.verdict);
  CHECK(report.margin == doctest::Approx(0.52605643217921451).epsilon(1e-12));
  CHECK(detectability_check(report));

  // Widening the margin pulls the first stable mode into the tested set.
  const auto wide = check_strategic(sensors, m, kOmega, 0.6);
  CHECK(wide.clusters.size() == 4);
  CHECK(wide.verdict);
}

TEST_CASE("midpoint sensor misses the second mode") {
  const auto m = drift_interval(16);
  const std::vector<Sensor> sensors = {PointwiseSensor{Point{0.5, 0.0}}};
  const auto report = check_strategic(sensors, m, kOmega);
  CHECK_FALSE(report.verdict);
  CHECK_FALSE(detectability_check(report));
  REQUIRE(report.clusters.size() == 3);
  // sin(2 pi b) vanishes at b = 1/2; the absolute floor must classify the
  // roundoff-sized entry as rank zero.
  CHECK(report.clusters[1].lambda == doctest::Approx(0.60521582395642566).epsilon(1e-14));
  CHECK(report.clusters[1].rank == 0);
  CHECK(report.margin < 1e-12);
}

TEST_CASE("degenerate square cluster needs as many sensors as its multiplicity") {
  const auto sq = drift_square(16);
  const Subregion omega = Subregion::rectangle(0.25, 0.75, 0.25, 0.75);
  const std::vector<Sensor> one = {
      PointwiseSensor{Point{1.0 / std::sqrt(2.0), 1.0 / M_PI}}};
  const auto single = check_strategic(one, sq, omega);
  CHECK(single.q == 1);
  CHECK(single.r == 2);
  CHECK_FALSE(single.verdict);

  const std::vector<Sensor> two = {
      PointwiseSensor{Point{1.0 / std::sqrt(2.0), 1.0 / M_PI}},
      PointwiseSensor{Point{1.0 / M_PI, 1.0 / std::exp(1.0)}}};
  const auto both = check_strategic(two, sq, omega);
  CHECK(both.q == 2);
  CHECK(both.r == 2);
  CHECK(both.verdict);
  CHECK(both.margin > 1e-6);

  // The degenerate pair must appear as one entry requiring rank 2.
  bool found = false;
  for (const auto& c : both.clusters)
    if (c.multiplicity == 2) {
      found = true;
      CHECK(c.required_rank == 2);
      CHECK(c.rank == 2);
      CHECK(c.singular_values.size() == 2);
    }
  CHECK(found);
}

TEST_CASE("verdict is invariant under output scaling") {
  const auto m = drift_interval(16);
  auto output = build_output_matrix(
      {PointwiseSensor{Point{1.0 / std::sqrt(2.0), 0.0}}}, m);
  const auto base = check_strategic(output, kOmega);
  output.C *= 1e-6;
  const auto scaled = check_strategic(output, kOmega);
  CHECK(scaled.verdict == base.verdict);
  REQUIRE(scaled.clusters.size() == base.clusters.size());
  for (size_t k = 0; k < base.clusters.size(); ++k)
    CHECK(scaled.clusters[k].rank == base.clusters[k].rank);
  CHECK(scaled.margin == doctest::Approx(1e-6 * base.margin).epsilon(1e-12));
}

TEST_CASE("cluster measurement matrix layout") {
  const auto sq = drift_square(4);
  const auto output = build_output_matrix(
      {PointwiseSensor{Point{1.0 / std::sqrt(2.0), 1.0 / M_PI}},
       PointwiseSensor{Point{0.3, 0.8}}},
      sq);
  for (const auto& cluster : cluster_eigenvalues(sq)) {
    const auto meas = build_cluster_measurement(output, cluster);
    REQUIRE(meas.Gm.rows() == 2);
    REQUIRE(meas.Gm.cols() == cluster.multiplicity());
    for (int s = 0; s < 2; ++s)
      for (int k = 0; k < cluster.multiplicity(); ++k)
        CHECK(meas.Gm(s, k) == output.C(s, cluster.positions[k]));
    for (int k = 1; k < meas.singular_values.size(); ++k)
      CHECK(meas.singular_values[k - 1] >= meas.singular_values[k]);
    CHECK(meas.rank <= std::min<int>(2, cluster.multiplicity()));
  }
}

TEST_CASE("stable spectrum yields a vacuous verdict") {
  DiffusionModel m;
  m.geometry = DomainGeometry::interval(1.0);
  m.gamma1 = 1.0;
  m.gamma2 = 0.0;
  m.n1 = 8;
  const auto report = check_strategic({PointwiseSensor{Point{0.5, 0.0}}}, m, kOmega);
  CHECK(report.clusters.empty());
  CHECK(report.r == 0);
  CHECK(report.verdict);
  CHECK(std::isinf(report.margin));
  CHECK(detectability_check(report));
}

TEST_CASE("gramian oracle cross-validates the rank verdict") {
  const auto m = drift_interval(16);
  GramianOptions opt;
  opt.mode_subset = {0, 1, 2};

  const auto good = build_output_matrix(
      {PointwiseSensor{Point{1.0 / std::sqrt(2.0), 0.0}}}, m);
  const auto gv = gramian_oracle(good, kOmega, opt);
  CHECK(gv.observable);
  REQUIRE(gv.W.rows() == 3);
  CHECK(gv.eigenvalues.minCoeff() > 0.0);
  CHECK((gv.W - gv.W.transpose()).cwiseAbs().maxCoeff() < 1e-14);

  const auto bad = build_output_matrix({PointwiseSensor{Point{0.5, 0.0}}}, m);
  const auto bv = gramian_oracle(bad, kOmega, opt);
  CHECK_FALSE(bv.observable);
  REQUIRE(bv.violating_direction.size() == 3);
  // The blind direction is the second retained mode, which is very visible
  // on omega, hence the violation.
  CHECK(std::abs(bv.violating_direction[1]) >
        0.99 * bv.violating_direction.norm());
  CHECK(bv.violating_norm > 1.0);
}

TEST_CASE("report serialization carries the cluster table") {
  const auto m = drift_interval(16);
  const auto report =
      check_strategic({PointwiseSensor{Point{1.0 / std::sqrt(2.0), 0.0}}}, m, kOmega);
  const nlohmann::json j = to_json(report);
  CHECK(j["q"] == 1);
  CHECK(j["r"] == 1);
  CHECK(j["verdict"] == true);
  CHECK(j["margin"].get<double>() == doctest::Approx(report.margin));
  REQUIRE(j["clusters"].size() == 3);
  CHECK(j["clusters"][0]["members"][0][0] == 1);
  CHECK(j["clusters"][0]["rank"] == 1);

  DiffusionModel stable = m;
  stable.gamma2 = 0.0;
  stable.gamma1 = 1.0;
  const auto vac =
      check_strategic({PointwiseSensor{Point{0.5, 0.0}}}, stable, kOmega);
  CHECK(to_json(vac)["margin"].is_null());
}

TEST_SUITE_END();
