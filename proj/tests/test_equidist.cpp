#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "arakelov/equidist.hpp"

using namespace arakelov;
using namespace arakelov::equidist;

namespace {

// Sup over all arcs with endpoints at sample points: closed arcs measure
// excess mass, open arcs measure missing mass. O(m^2 * m) with exact rationals.
Rational brute_force_discrepancy(const std::vector<Rational>& x, const std::vector<Rational>& w) {
  auto frac = [](Rational v) {
    while (v < 0) v += 1;
    while (v >= 1) v -= 1;
    return v;
  };
  Rational best = 0;
  for (std::size_t a = 0; a < x.size(); ++a)
    for (std::size_t b = 0; b < x.size(); ++b) {
      Rational len = frac(x[b] - x[a]);
      Rational open_len = len == 0 ? Rational(1) : len;
      Rational closed = 0, open = 0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        Rational off = frac(x[j] - x[a]);
        if (off <= len) closed += w[j];
        if (off > 0 && off < open_len) open += w[j];
      }
      best = std::max<Rational>(best, closed - len);
      best = std::max<Rational>(best, open_len - open);
    }
  return best;
}

EmpiricalMeasure circle_measure(const std::vector<double>& angles) {
  std::vector<TorusPoint> pts;
  for (double t : angles) pts.push_back({std::polar(1.0, 2 * std::numbers::pi * t)});
  return EmpiricalMeasure::uniform(std::move(pts));
}

}  // namespace

TEST_CASE("minpoly orbits") {
  auto phi5 = galois_orbit_minpoly(heights::AlgebraicP1Point::from_minpoly(cyclotomic_polynomial(5)));
  CHECK(phi5.degree == 4);
  std::vector<long long> ks;
  for (const auto& p : phi5.measure.points) {
    double k = std::arg(p[0]) / (2 * std::numbers::pi) * 5;
    if (k < 0) k += 5;
    CHECK(std::abs(k - std::round(k)) < 1e-12);
    ks.push_back(std::lround(k));
  }
  std::sort(ks.begin(), ks.end());
  CHECK(ks == std::vector<long long>{1, 2, 3, 4});

  auto sq2 = galois_orbit_minpoly(heights::AlgebraicP1Point::from_minpoly(IntPolynomial::from_ints({-2, 0, 1})));
  CHECK(sq2.degree == 2);
  std::vector<double> re;
  for (const auto& p : sq2.measure.points) re.push_back(p[0].real());
  std::sort(re.begin(), re.end());
  CHECK(re[0] == doctest::Approx(-std::sqrt(2.0)));
  CHECK(re[1] == doctest::Approx(std::sqrt(2.0)));

  auto three = galois_orbit_minpoly(heights::AlgebraicP1Point::from_minpoly(IntPolynomial::from_ints({-3, 1})));
  CHECK(three.degree == 1);
  CHECK(three.measure.points[0][0] == Coord(3.0, 0.0));
}

TEST_CASE("property: minpoly orbits are closed under conjugation") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> c(-9, 9);
  int tested = 0;
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<BigInt> v(static_cast<std::size_t>(3 + trial % 5));
    for (auto& x : v) x = c(rng);
    if (v.back() == 0) v.back() = 1;
    if (v.front() == 0) v.front() = 1;
    heights::AlgebraicP1Point x = heights::AlgebraicP1Point::infinity();
    try {
      x = heights::AlgebraicP1Point::from_minpoly(IntPolynomial(v));
    } catch (const Error&) {
      continue;
    }
    auto orbit = galois_orbit_minpoly(x);
    for (const auto& p : orbit.measure.points) {
      double nearest = 1e300;
      for (const auto& q : orbit.measure.points) nearest = std::min(nearest, std::abs(std::conj(p[0]) - q[0]));
      CHECK(nearest < 1e-12 * (1 + std::abs(p[0])));
    }
    ++tested;
  }
  CHECK(tested > 30);
}

TEST_CASE("cyclotomic orbits") {
  auto o5 = galois_orbit_cyclotomic(heights::CyclotomicTorusPoint::make(5, {1}));
  CHECK(o5.degree == 4);
  CHECK(o5.residues == std::vector<std::vector<long long>>{{1}, {2}, {3}, {4}});
  auto o1 = galois_orbit_cyclotomic(heights::CyclotomicTorusPoint::make(1, {0}));
  CHECK(o1.degree == 1);
  CHECK(std::abs(o1.measure.points[0][0] - Coord(1.0, 0.0)) < 1e-15);
  auto o8 = galois_orbit_cyclotomic(heights::CyclotomicTorusPoint::make(8, {2}));
  CHECK(o8.degree == 2);
  CHECK(o8.residues == std::vector<std::vector<long long>>{{2}, {6}});
}

TEST_CASE("Weyl sum examples") {
  auto o12 = galois_orbit_minpoly(heights::AlgebraicP1Point::from_minpoly(cyclotomic_polynomial(12)));
  CHECK(std::abs(weyl_sum(o12.measure, {1})) < 1e-14);
  CHECK(weyl_sum(o12.measure, {0}) == Coord(1.0, 0.0));
  CHECK(weyl_sum_exact(galois_orbit_cyclotomic(heights::CyclotomicTorusPoint::make(12, {1})), {1}) == 0);
  for (long long p : {3LL, 5LL, 7LL, 101LL}) {
    auto o = galois_orbit_cyclotomic(heights::CyclotomicTorusPoint::make(p, {1}));
    CHECK(weyl_sum_exact(o, {1}) == Rational(-1, p - 1));
    CHECK(weyl_sum(o.measure, {1}).real() == doctest::Approx(-1.0 / static_cast<double>(p - 1)));
  }
  CHECK(ramanujan_sum(12, 1) == 0);
  CHECK(ramanujan_sum(12, 6) == -4);  // four odd t, each (-1)^t
  CHECK(ramanujan_sum(7, 0) == 6);
}

TEST_CASE("property: numeric and exact Weyl sums agree, with symmetry and bounds") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<long long> mdist(2, 120), adist(0, 200);
  for (int trial = 0; trial < 60; ++trial) {
    long long m = mdist(rng);
    std::vector<long long> a = {adist(rng)};
    if (trial % 2) a.push_back(adist(rng));
    auto o = galois_orbit_cyclotomic(heights::CyclotomicTorusPoint::make(m, a));
    for (const auto& k : character_bank(static_cast<int>(a.size()), 3)) {
      Coord num = weyl_sum(o.measure, k);
      double exact = weyl_sum_exact(o, k).convert_to<double>();
      CHECK(std::abs(num - Coord(exact, 0.0)) < 1e-12);
      CHECK(std::abs(num) <= 1 + 1e-12);
      std::vector<long long> neg;
      for (auto v : k) neg.push_back(-v);
      CHECK(std::abs(weyl_sum(o.measure, neg) - std::conj(num)) < 1e-12);
    }
  }
}

TEST_CASE("OffTorus") {
  auto mu = EmpiricalMeasure::uniform({{Coord(1.1, 0.0)}});
  try {
    weyl_sum(mu, {1});
    FAIL("expected OffTorus");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OffTorus);
  }
  CHECK_THROWS_AS(star_discrepancy(mu), Error);
}

TEST_CASE("discrepancy examples") {
  for (int m : {1, 2, 5, 16}) {
    std::vector<double> t;
    for (int j = 0; j < m; ++j) t.push_back(static_cast<double>(j) / m);
    CHECK(star_discrepancy(circle_measure(t)) == doctest::Approx(1.0 / m));
  }
  CHECK(star_discrepancy(circle_measure({0.3})) == doctest::Approx(1.0));
  auto o7 = galois_orbit_cyclotomic(heights::CyclotomicTorusPoint::make(7, {1}));
  std::vector<Rational> x, w;
  for (const auto& r : o7.residues) {
    x.emplace_back(r[0], 7);
    w.emplace_back(1, 6);
  }
  Rational oracle = brute_force_discrepancy(x, w);
  CHECK(oracle == Rational(2, 7));
  CHECK(star_discrepancy_exact(o7) == oracle);
  CHECK(star_discrepancy(o7.measure) == doctest::Approx(2.0 / 7));
}

TEST_CASE("property: discrepancy formula agrees with brute force") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t m = 1 + rng() % 60;
    long long den = 1 + static_cast<long long>(rng() % 50);
    std::vector<Rational> x, w;
    std::vector<double> angles;
    for (std::size_t j = 0; j < m; ++j) {
      x.emplace_back(static_cast<long long>(rng() % static_cast<unsigned long long>(den)), den);
      w.emplace_back(1, static_cast<long long>(m));
      angles.push_back(x.back().convert_to<double>());
    }
    double formula = star_discrepancy(circle_measure(angles));
    CHECK(formula == doctest::Approx(brute_force_discrepancy(x, w).convert_to<double>()).epsilon(1e-12));
  }
  for (long long m : {11LL, 24LL, 97LL, 150LL, 200LL}) {
    auto o = galois_orbit_cyclotomic(heights::CyclotomicTorusPoint::make(m, {1}));
    std::vector<Rational> x, w;
    for (const auto& r : o.residues) {
      x.emplace_back(r[0], m);
      w.emplace_back(1, o.degree);
    }
    CHECK(star_discrepancy_exact(o) == brute_force_discrepancy(x, w));
  }
}

TEST_CASE("twisted height") {
  auto o4 = galois_orbit_minpoly(heights::AlgebraicP1Point::from_minpoly(cyclotomic_polynomial(4)));
  TestFunction re = [](const TorusPoint& p) { return p[0].real(); };
  TestFunction one = [](const TorusPoint&) { return 1.0; };
  CHECK(twisted_height(0.7, o4.measure, re, 0.0) == 0.7);
  CHECK(twisted_height(0.7, o4.measure, one, 0.25) == doctest::Approx(0.95));
  CHECK(std::abs(twisted_height(0.7, o4.measure, re, 0.5) - 0.7) < 1e-15);
}

TEST_CASE("property: twisted height is affine in eps with slope the orbit mean") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    auto o = galois_orbit_cyclotomic(heights::CyclotomicTorusPoint::make(3 + trial, {1}));
    double a = u(rng), b = u(rng);
    TestFunction f = [a, b](const TorusPoint& p) { return a * p[0].real() + b * std::norm(p[0] + 0.5); };
    double mean = integrate(o.measure, f);
    double h = std::abs(u(rng));
    double e1 = u(rng), e2 = e1 + 1e-3;
    double slope = (twisted_height(h, o.measure, f, e2) - twisted_height(h, o.measure, f, e1)) / (e2 - e1);
    CHECK(std::abs(slope - mean) <= 1e-10);
  }
}

TEST_CASE("Bilu experiment") {
  auto rep = bilu_experiment({2, 5, 101, 1009}, 4);
  REQUIRE(rep.rows.size() == 4);
  CHECK(rep.rows[0].degree == 1);
  CHECK(rep.rows[0].discrepancy == 1);
  CHECK(rep.rows[1].max_weyl == Rational(1, 4));
  CHECK(rep.rows[2].max_weyl == Rational(1, 100));
  CHECK(rep.rows[3].discrepancy == Rational(2, 1009));
  CHECK(rep.rows[3].discrepancy <= Rational(10, 1009));
  CHECK(rep.discrepancy_nonincreasing);
  CHECK(rep.discrepancy_slope < -0.9);
  CHECK(to_csv(rep).rfind("m,degree,max_weyl,discrepancy\n", 0) == 0);
}
