#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "spectra/shrinkage.hpp"
#include "spectra/stieltjes.hpp"

using namespace spectra;

namespace {

PopulationModel two_component_model() {
  std::vector<double> vals;
  for (int i = 0; i < 200; ++i) vals.push_back(18.0);
  for (int i = 0; i < 200; ++i) vals.push_back(1.0);
  const BulkSpectrum bulk = build_bulk_from_eigenvalues(vals);
  const SpikeSet spikes =
      attach_spikes(bulk, {{1, 35.0 / 18.0 - 1.0}, {201, 3.0}});
  return make_model(bulk, spikes, 800);
}

PopulationModel null_model(int M = 400, int N = 800) {
  const BulkSpectrum bulk =
      build_bulk_from_eigenvalues(std::vector<double>(M, 1.0));
  return make_model(bulk, {}, N);
}

struct Setup {
  PopulationModel model;
  FFunction F;
  BulkStructure B;
};

Setup make_setup(PopulationModel m) {
  FFunction F = make_f_function(m);
  BulkStructure B = find_bulk_structure(F);
  return {std::move(m), std::move(F), std::move(B)};
}

}  // namespace

TEST_CASE("the outlier inversion recovers the population value") {
  const Setup s = make_setup(two_component_model());
  CHECK(invert_f_outlier(s.F, s.B, 44.5220588235294) ==
        doctest::Approx(35.0).epsilon(1e-8));
  CHECK(invert_f_outlier(s.F, s.B, 64.0 / 21.0) == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("the outlier inversion rejects energies off the outlier branches") {
  const Setup s = make_setup(two_component_model());
  CHECK_THROWS_AS(invert_f_outlier(s.F, s.B, 10.0), Error);     // inside comp 1
  CHECK_THROWS_AS(invert_f_outlier(s.F, s.B, 1.0), Error);      // inside comp 2
  CHECK_THROWS_AS(invert_f_outlier(s.F, s.B, 0.05), Error);     // left of support
  CHECK_THROWS_AS(invert_f_outlier(s.F, s.B, -1.0), Error);
}

TEST_CASE("cosine and pipeline reproduce the reference overlaps") {
  const Setup s = make_setup(two_component_model());
  CHECK(cosine_sq(s.F, s.B, 44.5220588235294) ==
        doctest::Approx(0.565623937436246).epsilon(1e-8));
  const ShrinkInputs si = shrink_pipeline(s.F, s.B, 44.5220588235294);
  CHECK(si.l == doctest::Approx(35.0).epsilon(1e-8));
  CHECK(si.c2 == doctest::Approx(0.565623937436246).epsilon(1e-8));
  CHECK(si.s2 == doctest::Approx(1.0 - si.c2).epsilon(1e-14));
  CHECK(si.mu == doctest::Approx(44.5220588235294));
}

TEST_CASE("every shrinker fixes the exact-information and null points") {
  for (const std::string& name : shrinker_names()) {
    CHECK(apply_shrinker(name, 7.5, 1.0) == doctest::Approx(7.5).epsilon(1e-14));
    CHECK(apply_shrinker(name, 1.0, 0.3) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("shrinker table matches hand-evaluated formulas at one point") {
  const double l = 4.0, c2 = 17.0 / 21.0, s2 = 4.0 / 21.0;
  CHECK(apply_shrinker("Frobenius", l, c2) ==
        doctest::Approx(l * c2 + s2).epsilon(1e-14));
  CHECK(apply_shrinker("InverseFrobenius", l, c2) ==
        doctest::Approx(l / (c2 + l * s2)).epsilon(1e-14));
  CHECK(apply_shrinker("RelativeFrobeniusA", l, c2) ==
        doctest::Approx((l * c2 + l * l * s2) / (c2 + l * l * s2)).epsilon(1e-14));
  CHECK(apply_shrinker("RelativeFrobeniusB", l, c2) ==
        doctest::Approx((l * l * c2 + s2) / (l * c2 + s2)).epsilon(1e-14));
  CHECK(apply_shrinker("SymmetrizedRelative", l, c2) ==
        doctest::Approx(1.0 + (l - 1.0) * c2 / ((c2 + l * s2) * (c2 + l * s2)))
            .epsilon(1e-14));
  CHECK(apply_shrinker("Entropy", l, c2) ==
        doctest::Approx(l * c2 + s2).epsilon(1e-14));
  CHECK(apply_shrinker("Stein", l, c2) ==
        doctest::Approx(l / (c2 + l * s2)).epsilon(1e-14));
  CHECK(apply_shrinker("Divergence", l, c2) ==
        doctest::Approx(std::sqrt((l * l * c2 + l * s2) / (c2 + l * s2)))
            .epsilon(1e-14));
  CHECK(apply_shrinker("MatusitaAffinity", l, c2) ==
        doctest::Approx(((1.0 + c2) * l + s2) / (1.0 + c2 + l * s2)).epsilon(1e-14));
  CHECK(apply_shrinker("Frechet", l, c2) ==
        doctest::Approx(std::pow(std::sqrt(l) * c2 + s2, 2)).epsilon(1e-14));
}

TEST_CASE("shrinkers stay between the null and full-information limits") {
  for (const std::string& name : shrinker_names()) {
    for (double l : {1.5, 4.0, 20.0}) {
      for (double c2 : {0.1, 0.5, 0.9}) {
        const double beta = apply_shrinker(name, l, c2);
        CHECK(beta >= 1.0 - 1e-12);
        CHECK(beta <= l + 1e-12);
      }
    }
  }
}

TEST_CASE("apply_shrinker validates its arguments") {
  CHECK_THROWS_AS(apply_shrinker("NoSuchLoss", 4.0, 0.5), Error);
  CHECK_THROWS_AS(apply_shrinker("Frobenius", 0.0, 0.5), Error);
  CHECK_THROWS_AS(apply_shrinker("Frobenius", 4.0, -0.1), Error);
  CHECK_THROWS_AS(apply_shrinker("Frobenius", 4.0, 1.1), Error);
}

TEST_CASE("the null-bulk identity ties the pipeline to the oracle value") {
  // aspect ratio 2, spike d volume 3: the asymptotic outlier sits at
  // 1 + d + (1 + 1/d)/c and both routes give exactly 24/7
  const Setup s = make_setup(null_model());
  const double mu = 1.0 + 3.0 + 0.5 * (1.0 + 1.0 / 3.0);
  const ShrinkInputs si = shrink_pipeline(s.F, s.B, mu);
  CHECK(si.l == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(si.c2 == doctest::Approx(17.0 / 21.0).epsilon(1e-10));
  const double beta = apply_shrinker("Frobenius", si.l, si.c2);
  const double oracle = oracle_outlier_value(s.F, 4.0, &s.B);
  CHECK(beta == doctest::Approx(24.0 / 7.0).epsilon(1e-12));
  CHECK(oracle == doctest::Approx(24.0 / 7.0).epsilon(1e-12));
  CHECK(f_eval(s.F, -0.25) == doctest::Approx(14.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("oracle outlier values for the two-component reference") {
  const Setup s = make_setup(two_component_model());
  CHECK(oracle_outlier_value(s.F, 35.0, &s.B) ==
        doctest::Approx(27.514450867052023).epsilon(1e-10));
  CHECK(oracle_outlier_value(s.F, 4.0, &s.B) == doctest::Approx(5.25).epsilon(1e-12));
  // sigma_g on the wrong side of the branch is refused
  CHECK_THROWS_AS(oracle_outlier_value(s.F, 18.0, &s.B), Error);
}

TEST_CASE("Stieltjes bulk values: tiny closed-form case") {
  // K = N = 1 with a single atom at mu: m(mu + i*eta) = i/eta, so the
  // estimator returns eta^2 / mu
  const std::vector<double> d = oracle_bulk_values({2.0}, 1, 1.0);
  REQUIRE(d.size() == 1);
  CHECK(d[0] == doctest::Approx(0.5).epsilon(1e-12));
  const std::vector<double> d2 = oracle_bulk_values({2.0}, 1, 0.25);
  CHECK(d2[0] == doctest::Approx(0.25 * 0.25 / 2.0).epsilon(1e-12));
}

TEST_CASE("companion-form route agrees with the direct Stieltjes route") {
  const Setup s = make_setup(two_component_model());
  // a deterministic stand-in spectrum: the classical locations
  const std::vector<std::vector<double>> gam =
      classical_locations(s.F, s.B, 800);
  std::vector<double> eigs;
  for (const auto& g : gam) eigs.insert(eigs.end(), g.begin(), g.end());
  const std::vector<double> a = oracle_bulk_values(eigs, 800);
  const std::vector<double> b = oracle_bulk_values_m1(eigs, 800, 400);
  REQUIRE(a.size() == eigs.size());
  REQUIRE(b.size() == eigs.size());
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-10));
}

TEST_CASE("shrink_spectrum classifies, shrinks outliers, and passes bulk through") {
  const Setup s = make_setup(two_component_model());
  const std::vector<double> eigs{44.52, 20.0, 10.0, 3.05, 1.0, 0.5, 0.2};
  const ShrinkagePlan plan = shrink_spectrum(eigs, s.model, s.B, "Frobenius");
  REQUIRE(plan.entries.size() == eigs.size());
  CHECK(plan.buffer ==
        doctest::Approx(std::pow(800.0, -2.0 / 3.0 + 0.1)).epsilon(1e-10));
  CHECK(plan.bulk_denominator == "mu");
  CHECK(plan.entries[0].method == "outlier-formula");  // 44.52 above the top edge
  CHECK(plan.entries[0].component == 1);
  CHECK(plan.entries[0].rank == 1);
  CHECK(plan.entries[1].method == "bulk");  // 20.0 inside component 1
  CHECK(plan.entries[2].method == "bulk");
  CHECK(plan.entries[3].method == "outlier-formula");  // 3.05 in the gap
  CHECK(plan.entries[3].component == 2);
  CHECK(plan.entries[4].method == "bulk");
  CHECK(plan.n_outliers == 2);
  // rank-aware pass-through: position j keeps the j-th population value
  CHECK(plan.entries[1].beta == doctest::Approx(18.0));
  CHECK(plan.entries[6].beta == doctest::Approx(18.0));  // still in the 18-block
  CHECK(std::isnan(plan.entries[1].l));
  CHECK(std::isnan(plan.entries[1].c2));
}

TEST_CASE("oracle loss matches detected outliers to model spikes by rank") {
  const Setup s = make_setup(two_component_model());
  const std::vector<double> eigs{44.52, 3.05, 1.5, 1.0, 0.5};
  const ShrinkagePlan plan =
      shrink_spectrum(eigs, s.model, s.B, "Frobenius-oracle");
  CHECK(plan.eta == doctest::Approx(1.0 / std::sqrt(800.0)).epsilon(1e-12));
  CHECK(plan.entries[0].method == "outlier-formula");
  CHECK(plan.entries[0].l == doctest::Approx(35.0));
  CHECK(std::isnan(plan.entries[0].c2));
  CHECK(plan.entries[0].beta == doctest::Approx(27.514450867052023).epsilon(1e-9));
  CHECK(plan.entries[1].beta == doctest::Approx(5.25).epsilon(1e-9));
  CHECK(plan.entries[2].method == "bulk-stieltjes");
  CHECK(plan.entries[2].beta > 0.0);
}

TEST_CASE("shrink_spectrum validates the loss name and the spectrum") {
  const Setup s = make_setup(two_component_model());
  CHECK_THROWS_AS(shrink_spectrum({1.0}, s.model, s.B, "NoSuchLoss"), Error);
  CHECK_THROWS_AS(shrink_spectrum({1.0, 2.0}, s.model, s.B, "Frobenius"),
                  Error);  // ascending input
  CHECK_THROWS_AS(shrink_spectrum({}, s.model, s.B, "Frobenius"), Error);
  CHECK_THROWS_AS(shrink_spectrum({-1.0}, s.model, s.B, "Frobenius"), Error);
}

TEST_CASE("a pure-bulk spectrum produces no outlier rows") {
  const Setup s = make_setup(null_model());
  const std::vector<double> eigs{2.5, 2.0, 1.0, 0.5};
  const ShrinkagePlan plan = shrink_spectrum(eigs, s.model, s.B, "Frobenius");
  CHECK(plan.n_outliers == 0);
  for (const auto& e : plan.entries) {
    CHECK(e.method == "bulk");
    CHECK(e.beta == doctest::Approx(1.0));
  }
}

TEST_CASE("inverse-Frobenius never exceeds the Frobenius value") {
  for (double l : {1.2, 2.0, 5.0, 30.0})
    for (double c2 : {0.05, 0.3, 0.7, 0.95})
      CHECK(apply_shrinker("InverseFrobenius", l, c2) <=
            apply_shrinker("Frobenius", l, c2) + 1e-12);
}
