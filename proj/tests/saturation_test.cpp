#include <doctest.h>

#include <cmath>
#include <random>

#include "satcm/saturation.hpp"

using namespace satcm;

TEST_SUITE_BEGIN("saturation");

TEST_CASE("scaling constant") {
  CHECK(scaling_constant({SaturationKind::likelihood, 0.5, 0.5, 1.0}) ==
        doctest::Approx(2.0));
  // u/eps * q/(1-q) with q = 0.9, eps = 0.015: (1/0.015) * 9 = 600.
  CHECK(scaling_constant({SaturationKind::likelihood, 0.9, 0.015, 1.0}) ==
        doctest::Approx(600.0).epsilon(1e-12));
  CHECK(scaling_constant({SaturationKind::likelihood, 1e-9, 0.015, 1.0}) <
        1e-6);  // q -> 0 limit
  CHECK_THROWS(scaling_constant({SaturationKind::identity, 0.5, 0.5, 1.0}));
}

TEST_CASE("weights per kind") {
  const SaturationSpec id{SaturationKind::identity, 0.5, 0.015, 1.0};
  const SaturationSpec trunc{SaturationKind::truncated, 0.5, 0.015, 1.0};
  SaturationSpec like{SaturationKind::likelihood, 0.9, 0.015, 1.0};

  CHECK(weight(id, 7, 3) == 1.0);
  CHECK(weight(trunc, 7, 1) == 1.0);
  CHECK(weight(trunc, 7, 2) == 0.0);
  // C = 600: w(1) for M=2 is ln((2 + 600)/2) = ln(301).
  CHECK(weight(like, 2, 1) == doctest::Approx(std::log(301.0)).epsilon(1e-12));
  CHECK_THROWS(weight(like, 2, 3));
  CHECK_THROWS(weight(like, 2, 0));
}

TEST_CASE("sigma per kind") {
  const SaturationSpec trunc{SaturationKind::truncated, 0.5, 0.015, 1.0};
  SaturationSpec like{SaturationKind::likelihood, 0.7, 0.02, 1.0};
  const double c = scaling_constant(like);
  for (SaturationKind kind : {SaturationKind::identity,
                              SaturationKind::truncated,
                              SaturationKind::likelihood}) {
    SaturationSpec spec = like;
    spec.kind = kind;
    CHECK(sigma(spec, 5, 0) == 0.0);
  }
  CHECK(sigma(trunc, 5, 1) == 1.0);
  CHECK(sigma(trunc, 5, 4) == 1.0);
  // Saturation value log(1 + C) independent of M_k.
  for (int m : {1, 3, 10, 500}) {
    CHECK(sigma(like, m, m) == doctest::Approx(std::log1p(c)).epsilon(1e-12));
  }
}

TEST_CASE("telescoping, diminishing returns, ambiguity penalty") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> uq(0.05, 0.95);
  std::uniform_real_distribution<double> ueps(1e-3, 0.2);
  std::uniform_int_distribution<int> um(1, 10000);
  for (int trial = 0; trial < 300; ++trial) {
    SaturationSpec spec{SaturationKind::likelihood, uq(rng), ueps(rng), 1.0};
    const int m = um(rng);
    std::uniform_int_distribution<int> un(0, m);
    const int n = un(rng);
    double sum = 0.0;
    for (int i = 1; i <= n; ++i) sum += weight(spec, m, i);
    CHECK(std::abs(sum - sigma(spec, m, n)) < 1e-12);

    if (n >= 1 && n < m) {
      CHECK(weight(spec, m, n + 1) < weight(spec, m, n));
      // strictly decreasing in M_k at fixed n
      CHECK(weight(spec, m + 1, n) < weight(spec, m, n));
    }
  }
  // Same identities for the other kinds.
  for (SaturationKind kind :
       {SaturationKind::identity, SaturationKind::truncated}) {
    SaturationSpec spec{kind, 0.5, 0.015, 1.0};
    for (int m : {1, 4, 33}) {
      for (int n = 0; n <= m; ++n) {
        double sum = 0.0;
        for (int i = 1; i <= n; ++i) sum += weight(spec, m, i);
        CHECK(std::abs(sum - sigma(spec, m, n)) < 1e-12);
      }
    }
  }
}

TEST_CASE("weight table matches the scalar functions") {
  SaturationSpec spec{SaturationKind::likelihood, 0.8, 0.03, 1.0};
  const std::vector<int> m = {4, 1, 4, 9, 0};
  const WeightTable table(spec, m);
  CHECK(table.sample_count() == 5);
  for (int k = 0; k < 5; ++k) {
    CHECK(table.association_count(k) == m[k]);
    for (int n = 0; n <= m[k]; ++n) {
      CHECK(table.sigma(k, n) == doctest::Approx(sigma(spec, m[k], n)));
      if (n >= 1) {
        CHECK(table.weight(k, n) == doctest::Approx(weight(spec, m[k], n)));
      }
    }
  }
}

TEST_SUITE_END();
