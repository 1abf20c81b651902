#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "arakelov/dynamics.hpp"

using namespace arakelov;
using namespace arakelov::dynamics;
using heights::RationalProjectivePoint;

namespace {

std::vector<BigInt> ints(std::initializer_list<long long> v) { return {v.begin(), v.end()}; }

Endomorphism square_plus() { return Endomorphism::binary({ints({1, 0, 0}), ints({1, 0, 1})}); }

// log-scale float Tate iteration for maps with resultant +-1, where the
// image of a coprime pair stays coprime.
double float_tate_oracle(const std::vector<std::vector<BigInt>>& f, long long a, long long b, int n) {
  long double u = a, v = b;
  long double scale = std::max(std::fabs(u), std::fabs(v));
  long double log_size = std::log(scale);
  u /= scale;
  v /= scale;
  const int q = static_cast<int>(f[0].size()) - 1;
  for (int step = 0; step < n; ++step) {
    long double f0 = 0, f1 = 0;
    for (int k = 0; k <= q; ++k) {
      long double mono = std::pow(u, q - k) * std::pow(v, k);
      f0 += f[0][static_cast<std::size_t>(k)].convert_to<long double>() * mono;
      f1 += f[1][static_cast<std::size_t>(k)].convert_to<long double>() * mono;
    }
    long double m = std::max(std::fabs(f0), std::fabs(f1));
    log_size = log_size * q + std::log(m);
    u = f0 / m;
    v = f1 / m;
  }
  return static_cast<double>(log_size / std::pow(static_cast<long double>(q), n));
}

}  // namespace

TEST_CASE("validate examples") {
  std::vector<Form> power = {{Term{1, {2, 0}}}, {Term{1, {0, 2}}}};
  auto p = Endomorphism::validate(1, power);
  CHECK(p.kind() == Endomorphism::Kind::PowerMap);
  CHECK(p.q() == 2);

  std::vector<Form> sq = {{Term{1, {2, 0}}}, {Term{1, {0, 2}}, Term{1, {2, 0}}}};
  auto s = Endomorphism::validate(1, sq);
  CHECK(s.kind() == Endomorphism::Kind::General);
  CHECK(s.resultant() != 0);
  CHECK(abs(s.resultant()) == 1);

  std::vector<Form> degenerate = {{Term{1, {1, 1}}}, {Term{1, {0, 2}}}};
  try {
    Endomorphism::validate(1, degenerate);
    FAIL("expected DegenerateMap");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateMap);
  }

  std::vector<Form> not_power = {{Term{1, {2, 0, 0}}}, {Term{1, {0, 2, 0}}}, {Term{1, {0, 1, 1}}}};
  try {
    Endomorphism::validate(2, not_power);
    FAIL("expected UnsupportedShape");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedShape);
  }
  std::vector<Form> power3 = {{Term{1, {3, 0, 0}}}, {Term{1, {0, 3, 0}}}, {Term{1, {0, 0, 3}}}};
  CHECK(Endomorphism::validate(2, power3).kind() == Endomorphism::Kind::PowerMap);

  std::vector<Form> inhomog = {{Term{1, {2, 0}}}, {Term{1, {0, 3}}}};
  CHECK_THROWS_AS(Endomorphism::validate(1, inhomog), Error);
}

TEST_CASE("transform bound for power maps is zero") {
  CHECK(height_transform_bound(Endomorphism::power_map(1, 2)) == 0.0);
  CHECK(height_transform_bound(Endomorphism::power_map(1, 3)) == 0.0);
  CHECK(height_transform_bound(Endomorphism::power_map(3, 2)) == 0.0);
}

TEST_CASE("property: transform bound holds on random rational points") {
  std::vector<Endomorphism> maps = {
      square_plus(),
      Endomorphism::binary({ints({1, 0, 1}), ints({1, 0, -1})}),
      Endomorphism::binary({ints({1, 0, 3}), ints({0, 2, 5})}),
      Endomorphism::binary({ints({2, -1, 0, 7}), ints({0, 3, 1, -4})}),
  };
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<long long> c(-1000000, 1000000);
  for (const auto& phi : maps) {
    const double bound = height_transform_bound(phi);
    CHECK(std::isfinite(bound));
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      long long a = c(rng), b = c(rng);
      if (a == 0 && b == 0) a = 1;
      auto x = RationalProjectivePoint::make({a, b});
      double gap = heights::naive_height_rational(phi.apply(x)) - phi.q() * heights::naive_height_rational(x);
      worst = std::max(worst, std::abs(gap));
    }
    CHECK(worst <= bound);
  }
}

TEST_CASE("power map canonical height equals naive height") {
  auto z2 = Endomorphism::power_map(1, 2);
  auto est = canonical_height(z2, RationalProjectivePoint::make(ints({1, 2})), 1e-8);
  CHECK(est.value == std::log(2.0));
  CHECK(est.error_bound == 0.0);
  CHECK(est.iterations == 0);
  for (long long m = 1; m <= 24; ++m) {
    auto root = heights::AlgebraicP1Point::from_minpoly(cyclotomic_polynomial(m));
    CHECK(canonical_height(z2, root, 1e-8).value == 0.0);
  }
  auto cube = heights::AlgebraicP1Point::from_minpoly(IntPolynomial::from_ints({-2, 0, 0, 1}));
  CHECK(canonical_height(Endomorphism::power_map(1, 3), cube, 1e-8).value ==
        doctest::Approx(std::log(2.0) / 3).epsilon(1e-14));
  CHECK(canonical_height(Endomorphism::power_map(2, 2), heights::CyclotomicTorusPoint::make(5, {1, 2}), 1e-8).value ==
        0.0);
}

TEST_CASE("Tate limit against a float iteration oracle") {
  auto phi = square_plus();
  const double eps = 1e-8;
  for (long long a = 1; a <= 4; ++a)
    for (long long b = 0; b <= 3; ++b) {
      if (std::gcd(a, b) != 1) continue;
      auto est = canonical_height(phi, RationalProjectivePoint::make({a, b}), eps);
      CHECK(est.error_bound <= eps);
      double oracle = float_tate_oracle(phi.binary_forms(), a, b, 40);
      CHECK(std::abs(est.value - oracle) <= est.error_bound + 1e-15);
    }
  // (1:0): orbit 0 -> 1 -> 2 -> 5 -> 26 in the chart x1/x0
  auto est = canonical_height(phi, RationalProjectivePoint::make(ints({1, 0})), eps);
  CHECK(std::abs(est.value - float_tate_oracle(phi.binary_forms(), 1, 0, 40)) <= 1e-8);
}

TEST_CASE("hybrid orbit tracking matches exact iteration") {
  std::vector<Endomorphism> maps = {
      Endomorphism::binary({ints({1, 0, 1}), ints({1, 0, -1})}),
      Endomorphism::binary({ints({1, 0, 3}), ints({0, 2, 5})}),
      Endomorphism::binary({ints({2, -1, 0, 7}), ints({0, 3, 1, -4})}),
  };
  OrbitOptions hybrid;
  hybrid.exact_bits = 8;
  OrbitOptions exact;
  exact.exact_bits = std::size_t{1} << 30;
  for (const auto& phi : maps)
    for (auto coords : {ints({1, 0}), ints({3, 5}), ints({7, -2}), ints({1, 1})}) {
      auto x = RationalProjectivePoint::make(coords);
      int n = phi.q() == 2 ? 12 : 8;
      double h_exact = tate_iterate(phi, x, n, exact).value;
      double h_hybrid = tate_iterate(phi, x, n, hybrid).value;
      CHECK(h_hybrid == doctest::Approx(h_exact).epsilon(1e-13));
    }
}

TEST_CASE("property: functional equation and nonnegativity") {
  std::vector<Endomorphism> maps = {square_plus(), Endomorphism::binary({ints({1, 0, 1}), ints({1, 0, -1})})};
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<long long> c(-50, 50);
  const double eps = 1e-8;
  for (const auto& phi : maps)
    for (int trial = 0; trial < 10; ++trial) {
      long long a = c(rng), b = c(rng);
      if (a == 0 && b == 0) b = 1;
      auto x = RationalProjectivePoint::make({a, b});
      auto hx = canonical_height(phi, x, eps);
      auto hfx = canonical_height(phi, phi.apply(x), eps);
      CHECK(std::abs(hfx.value - phi.q() * hx.value) <= (phi.q() + 1) * eps);
      CHECK(hx.value >= -eps);
    }
}

TEST_CASE("preperiodicity") {
  auto z2 = Endomorphism::power_map(1, 2);
  CHECK(is_preperiodic(z2, RationalProjectivePoint::make(ints({1, 1}))));
  CHECK_FALSE(is_preperiodic(z2, RationalProjectivePoint::make(ints({1, 2}))));
  CHECK(is_preperiodic(z2, RationalProjectivePoint::make(ints({1, -1}))));
  CHECK(is_preperiodic(z2, RationalProjectivePoint::make(ints({0, 1}))));
  auto zm1 = Endomorphism::binary({ints({1, 0, 0}), ints({-1, 0, 1})});
  CHECK(is_preperiodic(zm1, RationalProjectivePoint::make(ints({1, 0}))));
  CHECK_FALSE(is_preperiodic(zm1, RationalProjectivePoint::make(ints({1, 2}))));
  CHECK(is_preperiodic(Endomorphism::power_map(2, 3), RationalProjectivePoint::make(ints({1, -1, 0}))));
  // preperiodic => tiny canonical height
  auto est = canonical_height(zm1, RationalProjectivePoint::make(ints({1, 0})), 1e-8);
  CHECK(est.value <= 1e-8);
  CHECK(est.value >= -1e-8);
}

TEST_CASE("Brolin sampler for z^2 lives on the unit circle") {
  auto z2 = Endomorphism::power_map(1, 2);
  auto s = brolin_sample(z2, 20000, 30, 42);
  REQUIRE(s.points.size() == 20000);
  std::complex<double> mean = 0;
  double worst = 0;
  for (const auto& p : s.points) {
    auto z = p.to_complex();
    worst = std::max(worst, std::abs(std::abs(z) - 1.0));
    mean += z;
  }
  mean /= 20000.0;
  CHECK(worst <= 1e-9);
  CHECK(std::abs(mean) <= 0.04);
  double total = 0;
  for (double w : s.weights) total += w;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("Brolin sampler is seed deterministic") {
  auto phi = Endomorphism::binary({ints({1, 0, 0}), ints({-1, 0, 1})});
  auto a = brolin_sample(phi, 200, 30, 7);
  auto b = brolin_sample(phi, 200, 30, 7);
  auto c = brolin_sample(phi, 200, 30, 8);
  bool same = true, differ = false;
  for (std::size_t i = 0; i < 200; ++i) {
    same = same && a.points[i].to_complex() == b.points[i].to_complex();
    differ = differ || a.points[i].to_complex() != c.points[i].to_complex();
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("Brolin sampler for z^2 - 1 matches the backward tree") {
  // exhaustive depth-16 preimage tree from z = 2
  std::vector<std::complex<double>> level{2.0};
  for (int d = 0; d < 16; ++d) {
    std::vector<std::complex<double>> next;
    next.reserve(level.size() * 2);
    for (auto w : level) {
      auto r = std::sqrt(w + 1.0);
      next.push_back(r);
      next.push_back(-r);
    }
    level = std::move(next);
  }
  std::complex<double> tree_mean = 0;
  double tree_abs = 0;
  for (auto z : level) {
    tree_mean += z;
    tree_abs += std::abs(z);
  }
  tree_mean /= static_cast<double>(level.size());
  tree_abs /= static_cast<double>(level.size());

  auto phi = Endomorphism::binary({ints({1, 0, 0}), ints({-1, 0, 1})});
  auto s = brolin_sample(phi, 20000, 30, 3);
  std::complex<double> mean = 0;
  double mean_abs = 0;
  for (const auto& p : s.points) {
    mean += p.to_complex();
    mean_abs += std::abs(p.to_complex());
  }
  mean /= 20000.0;
  mean_abs /= 20000.0;
  CHECK(std::abs(mean - tree_mean) <= 0.05);
  CHECK(std::abs(mean_abs - tree_abs) <= 0.05);
}

TEST_CASE("property: Monte Carlo error shrinks with sample count") {
  auto z2 = Endomorphism::power_map(1, 2);
  auto avg_error = [&](std::size_t n) {
    double acc = 0;
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
      auto s = brolin_sample(z2, n, 30, 1000 + seed);
      std::complex<double> m = 0;
      for (const auto& p : s.points) m += p.to_complex();
      acc += std::abs(m / static_cast<double>(n));
    }
    return acc / 16;
  };
  double small = avg_error(300), large = avg_error(1200);
  // expected ratio 1/2 for four times the samples
  CHECK(large / small >= 0.2);
  CHECK(large / small <= 0.9);
}

TEST_CASE("sampler handles preimages at infinity") {
  // phi = (x0 x1 + x0^2, x1^2): degree drops in the finite chart at w = 0
  auto phi = Endomorphism::binary({ints({1, 1, 0}), ints({0, 0, 1})});
  auto s = brolin_sample(phi, 500, 10, 1);
  CHECK(s.points.size() == 500);
}

TEST_CASE("endomorphism JSON") {
  auto phi = endomorphism_from_json(nlohmann::json::parse(R"({"n":1,"q":2,"forms":[[1,0,0],[1,0,1]]})"));
  CHECK(phi.kind() == Endomorphism::Kind::General);
  auto back = endomorphism_from_json(to_json(phi));
  CHECK(back.binary_forms() == phi.binary_forms());
  auto p = endomorphism_from_json(nlohmann::json::parse(R"({"n":2,"q":3,"kind":"power"})"));
  CHECK(p.kind() == Endomorphism::Kind::PowerMap);
  auto sparse = endomorphism_from_json(nlohmann::json::parse(
      R"({"n":2,"forms":[[{"coeff":1,"exp":[2,0,0]}],[{"coeff":1,"exp":[0,2,0]}],[{"coeff":1,"exp":[0,0,2]}]]})"));
  CHECK(sparse.q() == 2);
  CHECK_THROWS_AS(endomorphism_from_json(nlohmann::json::parse(R"({"n":1,"q":3,"forms":[[1,0,0],[1,0,1]]})")),
                  Error);
}
