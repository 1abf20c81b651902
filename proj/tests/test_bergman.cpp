#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "arakelov/bergman.hpp"

using namespace arakelov;
using namespace arakelov::bergman;

namespace {

constexpr double kPi = std::numbers::pi;
using cd = std::complex<double>;

// Brute-force 2D midpoint Gram for the c-metric of degree d against the
// c_mu curvature measure, optionally twisted by a section s of the c_s metric.
Eigen::MatrixXd brute_gram(double c, int d, double c_mu, int nr, int nt, const std::vector<double>& s = {1.0},
                           double c_s = 1.0) {
  const int ms = static_cast<int>(s.size()) - 1;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d + 1, d + 1);
  for (int chart = 0; chart < 2; ++chart)
    for (int i = 0; i < nr; ++i) {
      const double r = (i + 0.5) / nr;
      const double dens = chart == 0 ? c_mu / (kPi * std::pow(1 + c_mu * r * r, 2))
                                     : c_mu / (kPi * std::pow(r * r + c_mu, 2));
      for (int j = 0; j < nt; ++j) {
        const cd z = std::polar(r, 2 * kPi * (j + 0.5) / nt);
        const cd x0 = chart == 0 ? cd(1) : z, x1 = chart == 0 ? z : cd(1);
        const double area = dens * r * (1.0 / nr) * (2 * kPi / nt);
        cd sv = 0;
        for (int a = 0; a <= ms; ++a)
          sv += s[static_cast<std::size_t>(a)] * std::pow(x0, ms - a) * std::pow(x1, a);
        const double s_norm2 = std::norm(sv) / std::pow(std::norm(x0) + c_s * std::norm(x1), ms);
        const double base = 1 / std::pow(std::norm(x0) + c * std::norm(x1), d);
        std::vector<cd> mono(static_cast<std::size_t>(d + 1));
        for (int k = 0; k <= d; ++k) mono[static_cast<std::size_t>(k)] = std::pow(x0, d - k) * std::pow(x1, k);
        for (int k = 0; k <= d; ++k)
          for (int l = 0; l <= d; ++l)
            g(k, l) += (mono[static_cast<std::size_t>(k)] * std::conj(mono[static_cast<std::size_t>(l)])).real() *
                       base * s_norm2 * area;
      }
    }
  return g;
}

// mixed intersection of two c-metrics: 1/2 log b + 1/2 k log k / (k - 1), k = a / b.
double mixed_c_oracle(double a, double b) {
  const double k = a / b;
  const double f = std::abs(k - 1) < 1e-12 ? 1.0 : k * std::log(k) / (k - 1);
  return 0.5 * std::log(b) + 0.5 * f;
}

HermitianMetric cm(double c, int e = 1) { return HermitianMetric::power(LineMetric::c_family(c), e); }

}  // namespace

TEST_CASE("curvature densities") {
  CHECK(LineMetric::c_family(1).density0(0) == doctest::Approx(1 / kPi).epsilon(1e-15));
  for (auto m : {LineMetric::c_family(0.3), LineMetric::c_family(1), LineMetric::c_family(4), LineMetric::t_family(1),
                 LineMetric::t_family(2), LineMetric::t_family(3), LineMetric::t_family(6)})
    CHECK(std::abs(total_mass(CurvatureMeasure::of(m)) - 1) <= 1e-8);
  CHECK(std::abs(total_mass(CurvatureMeasure::of(cm(0.3, 2) + cm(5.0))) - 1) <= 1e-8);

  // density = Laplacian(phi) / (4 pi), by a five-point stencil on the weight
  for (auto m : {LineMetric::c_family(4), LineMetric::t_family(3)})
    for (cd z : {cd(0.3, 0.1), cd(-0.5, 0.6), cd(0.05, -0.7)}) {
      const double h = 1e-4;
      auto phi = [&](cd p) { return m.phi0(std::abs(p)); };
      const double lap = (phi(z + h) + phi(z - h) + phi(z + cd(0, h)) + phi(z - cd(0, h)) - 4 * phi(z)) / (h * h);
      CHECK(m.density0(std::abs(z)) == doctest::Approx(lap / (4 * kPi)).epsilon(1e-6));
    }
  CHECK_THROWS_AS(CurvatureMeasure::of(cm(1.0) - cm(2.0)), Error);
  try {
    CurvatureMeasure::of(cm(1.0, 2) - cm(2.0));
    FAIL("expected NonPositiveCurvature");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonPositiveCurvature);
  }
}

TEST_CASE("Gram examples") {
  auto fs = LineMetric::c_family(1);
  auto g0 = l2_gram(HermitianMetric(), CurvatureMeasure::of(fs));
  CHECK(g0.gram.rows() == 1);
  CHECK(g0.gram(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
  for (int n : {1, 4, 9, 20, 40}) {
    auto g = l2_gram(HermitianMetric::power(fs, n), CurvatureMeasure::of(fs));
    auto closed = l2_gram_closed_form(1.0, n);
    for (int k = 0; k <= n; ++k) {
      double exact = std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0) / std::tgamma(n + 2.0);
      CHECK(g.gram(k, k) == doctest::Approx(exact).epsilon(1e-12));
      CHECK(closed.gram(k, k) == doctest::Approx(exact).epsilon(1e-12));
    }
    CHECK((g.gram - Eigen::MatrixXd(g.gram.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-12);
  }
  auto half = l2_gram(cm(0.5, 2), CurvatureMeasure::of(LineMetric::c_family(0.5)));
  Eigen::MatrixXd oracle = brute_gram(0.5, 2, 0.5, 20000, 25);
  CHECK((half.gram - oracle).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("property: Grams against foreign measures match brute force") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> cdist(0.2, 3.0);
  for (int trial = 0; trial < 4; ++trial) {
    const double c = cdist(rng), cmu = cdist(rng);
    const int d = 1 + trial;
    auto g = l2_gram(cm(c, d), CurvatureMeasure::of(LineMetric::c_family(cmu)));
    Eigen::MatrixXd oracle = brute_gram(c, d, cmu, 20000, 2 * d + 3);
    CHECK((g.gram - oracle).cwiseAbs().maxCoeff() <= 1e-8 * oracle.cwiseAbs().maxCoeff());
    CHECK(g.certificate.error_estimate <= 1e-13);
  }
}

TEST_CASE("twisted Gram matches brute force") {
  std::vector<double> s = {0.4, -0.3};
  auto mu = CurvatureMeasure::of(LineMetric::c_family(1.3));
  auto g = twisted_gram(s, cm(0.7), cm(0.9, 3), mu);
  CHECK_FALSE(g.diagonal);
  Eigen::MatrixXd oracle = brute_gram(0.9, 3, 1.3, 20000, 24, s, 0.7);
  CHECK((g.gram - oracle).cwiseAbs().maxCoeff() < 1e-9);
  CHECK_THROWS_AS(twisted_gram({1.0}, cm(0.7), cm(0.9, 3), mu), Error);
}

TEST_CASE("quadrature budget") {
  QuadratureOptions tight;
  tight.max_nodes = 32;
  try {
    l2_gram(cm(1.0, 30), CurvatureMeasure::of(LineMetric::c_family(1)), tight);
    FAIL("expected QuadratureBudgetExceeded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::QuadratureBudgetExceeded);
  }
}

TEST_CASE("sup norms") {
  for (double c : {0.25, 1.0, 3.0}) {
    CHECK(sup_norm({1.0, 0.0}, cm(c)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sup_norm({0.0, 1.0}, cm(c)) == doctest::Approx(1 / std::sqrt(c)).epsilon(1e-9));
  }
  CHECK(sup_norm({1.0, 1.0}, cm(1.0)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(pointwise_norm_at_infinity({0.0, 1.0}, cm(4.0)) == doctest::Approx(0.5));
  CHECK(pointwise_norm({1.0, 1.0}, cm(1.0), cd(-1, 0)) < 1e-15);
  CHECK_THROWS_AS(sup_norm({1.0}, cm(1.0)), Error);
}

TEST_CASE("property: sup norm dominates a dense grid and is not far above it") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> cdist(0.3, 3.0);
  for (int trial = 0; trial < 12; ++trial) {
    const int d = 1 + trial % 6;
    auto metric = cm(cdist(rng), d - 1) + cm(cdist(rng));
    std::vector<double> s(static_cast<std::size_t>(d + 1));
    for (auto& v : s) v = g(rng);
    double grid = 0;
    // dense grid over the sphere through polar angle and longitude
    for (int i = 0; i <= 600; ++i) {
      const double theta = kPi * i / 600;
      for (int j = 0; j < 600; ++j) {
        const double lon = 2 * kPi * j / 600;
        if (i == 600) {
          grid = std::max(grid, pointwise_norm_at_infinity(s, metric));
          break;
        }
        grid = std::max(grid, pointwise_norm(s, metric, std::polar(std::tan(theta / 2), lon)));
      }
    }
    const double sup = sup_norm(s, metric);
    CHECK(sup >= grid * (1 - 1e-12));
    CHECK(sup <= grid * (1 + 1e-3));
  }
}

TEST_CASE("distortion function") {
  auto fs = LineMetric::c_family(1);
  auto mu = CurvatureMeasure::of(fs);
  for (int n = 0; n <= 20; ++n) {
    auto w = HermitianMetric::power(fs, n);
    auto prof = distortion(l2_gram(w, mu), w);
    CHECK(std::abs(prof.sup - (n + 1)) <= 2e-10);
    CHECK(std::abs(prof.inf - (n + 1)) <= 2e-10);
  }
  // the c-family against its own measure is a rescaled Fubini-Study
  auto w = cm(0.3, 12);
  auto prof = distortion(l2_gram(w, CurvatureMeasure::of(LineMetric::c_family(0.3))), w);
  CHECK(std::abs(prof.sup - 13) <= 1e-9);
  CHECK(std::abs(prof.inf - 13) <= 1e-9);
}

TEST_CASE("property: distortion integrates to the dimension and is basis independent") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> cdist(0.3, 3.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double cw = cdist(rng), c_mu = cdist(rng), c_s = cdist(rng);
    const int d = 2 + trial;
    auto mu = CurvatureMeasure::of(LineMetric::c_family(c_mu));
    std::vector<double> s = {1.0, cdist(rng) - 1.5};
    auto weight = cm(cw, d);
    GramData g = trial % 2 ? twisted_gram(s, cm(c_s), weight, mu) : l2_gram(weight, mu);
    // odd trials use the s-twisted norm, so b integrates to the dimension against |s|^2 mu
    DistortionEvaluator b(g, weight);
    double integral = 0;
    const int nr = 4000, nt = 4 * d + 16;
    for (int chart = 0; chart < 2; ++chart)
      for (int i = 0; i < nr; ++i) {
        const double r = (i + 0.5) / nr;
        for (int j = 0; j < nt; ++j) {
          const cd z = std::polar(r, 2 * kPi * (j + 0.5) / nt);
          const double area = (chart ? mu.mass_inf(r) : mu.mass0(r)) / (2 * kPi) * (1.0 / nr) * (2 * kPi / nt);
          double weight_s = 1;
          if (trial % 2) {
            const cd sv = chart ? s[0] * z + s[1] : s[0] + s[1] * z;
            const double phi = chart ? LineMetric::c_family(c_s).phi_inf(r) : LineMetric::c_family(c_s).phi0(r);
            weight_s = std::norm(sv) * std::exp(-phi);
          }
          const double v = b(chart == 1, z);
          integral += v * weight_s * area;
          CHECK(std::abs(b.via_eigenbasis(chart == 1, z) - v) <= 1e-9 * v);
        }
      }
    CHECK(integral == doctest::Approx(d + 1).epsilon(1e-6));
  }
}

TEST_CASE("distortion against an explicit inverse") {
  std::vector<double> s = {0.5, 0.7, -0.2};
  auto mu = CurvatureMeasure::of(LineMetric::t_family(3));
  auto weight = cm(0.8, 3);
  auto g = twisted_gram(s, cm(1.0, 2), weight, mu);
  DistortionEvaluator b(g, weight);
  Eigen::MatrixXd inv = g.gram.inverse();
  for (cd z : {cd(0.2, 0.3), cd(-0.9, 0.1), cd(0, 0)}) {
    Eigen::VectorXcd v(4);
    for (int k = 0; k < 4; ++k) v(k) = std::pow(z, k);
    const double direct = (v.adjoint() * inv.cast<cd>() * v)(0).real() * std::exp(-weight.phi0(std::abs(z)));
    CHECK(b(false, z) == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("ill-conditioned and negative-degree inputs") {
  GramData g;
  g.degree = 1;
  g.gram.resize(2, 2);
  g.gram << 1, 1 - 1e-14, 1 - 1e-14, 1;
  try {
    DistortionEvaluator b(g, cm(1.0));
    FAIL("expected IllConditioned");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IllConditioned);
  }
  try {
    distortion_difference(10, 30, cm(1.0, 2), cm(0.5));
    FAIL("expected NegativeDegree");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NegativeDegree);
  }
  auto rep = distortion_difference(10, 10, cm(1.0, 2), cm(0.5));
  CHECK(rep.degree == 10);
  CHECK(rep.full_dimension == 21);
  CHECK(rep.profile.sup <= 21);
}

TEST_CASE("arithmetic intersections") {
  CHECK(arithmetic_self_intersection_c(1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(arithmetic_self_intersection_c(std::exp(-1.0))) < 1e-10);
  CHECK(arithmetic_self_intersection_c(std::exp(-3.0)) == doctest::Approx(-1.0).epsilon(1e-10));
  auto a = LineMetric::c_family(0.3), b = LineMetric::c_family(2);
  CHECK(std::abs(mixed_arithmetic_intersection(a, b) - mixed_arithmetic_intersection(b, a)) <= 1e-8);
  // t = 2 is the Fubini-Study metric
  CHECK(mixed_arithmetic_intersection(LineMetric::t_family(2), LineMetric::t_family(2)) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("property: mixed intersections match the closed form and are symmetric") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> lc(-3.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const double a = std::exp(lc(rng)), b = std::exp(lc(rng));
    const double ab = mixed_arithmetic_intersection(LineMetric::c_family(a), LineMetric::c_family(b));
    CHECK(ab == doctest::Approx(mixed_c_oracle(a, b)).epsilon(1e-10));
    CHECK(std::abs(ab - mixed_arithmetic_intersection(LineMetric::c_family(b), LineMetric::c_family(a))) <= 1e-10);
  }
  for (int t : {1, 3, 4}) {
    auto x = LineMetric::t_family(t), y = LineMetric::c_family(0.6);
    CHECK(std::abs(mixed_arithmetic_intersection(x, y) - mixed_arithmetic_intersection(y, x)) <= 1e-9);
  }
  auto l = cm(1.0) + cm(0.5), m = cm(0.5);
  CHECK(mixed_arithmetic_intersection(l, m) ==
        doctest::Approx(mixed_c_oracle(1.0, 0.5) + mixed_c_oracle(0.5, 0.5)).epsilon(1e-10));
}

TEST_CASE("chi growth") {
  auto fs = LineMetric::c_family(1);
  auto rows = chi_l2_series(fs, {0, 1, 30, 200});
  CHECK(rows[0].chi == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(std::isnan(rows[0].normalized));
  CHECK(rows[3].normalized >= 0.475);
  CHECK(rows[3].normalized <= 0.525);
  // the full quadrature Gram and the orthogonal closed form agree
  auto t2 = chi_l2_series(LineMetric::t_family(2), {30});
  CHECK(t2[0].chi == doctest::Approx(rows[2].chi).epsilon(1e-12));
  double sum = 0;
  auto closed = l2_gram_closed_form(1.0, 30);
  for (int k = 0; k <= 30; ++k) sum += std::log(closed.gram(k, k));
  CHECK(log_det(closed) == doctest::Approx(sum).epsilon(1e-13));
}

TEST_CASE("Siu growth experiment") {
  auto a = cm(1.0), b = cm(0.5);
  auto rep = siu_growth_experiment(a + b, b, {10, 20, 40});
  // (A^2 - B^2) / 2 with A^2 = 1/2, B^2 = (1 + log 1/2) / 2
  CHECK(rep.coefficient == doctest::Approx((0.5 - 0.5 * (1 + std::log(0.5))) / 2).epsilon(1e-9));
  CHECK(rep.rows.size() == 3);
  CHECK(rep.measured_last == rep.rows.back().per_n2);
  QuadratureOptions doubled;
  doubled.min_nodes = 128;
  auto fine = siu_growth_experiment(a + b, b, {20}, doubled);
  CHECK(std::abs(fine.rows[0].chi - rep.rows[1].chi) <= 1e-6);
  CHECK_THROWS_AS(siu_growth_experiment(b, a, {10}), Error);
}

TEST_CASE("Gromov ratios") {
  auto fs = cm(1.0);
  // every section of O(1) is a rotation of x0 for Fubini-Study
  CHECK(gromov_ratio(1, 0, fs, fs, 20, 3) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
  for (int d : {2, 5, 9})
    for (int k = 0; k <= d; ++k) {
      std::vector<double> s(static_cast<std::size_t>(d + 1), 0.0);
      s[static_cast<std::size_t>(k)] = 1;
      const double l2 = std::sqrt(l2_gram_closed_form(1.0, d).gram(k, k));
      const double sup2 = k == 0 || k == d ? 1.0 : std::pow(k, k) * std::pow(d - k, d - k) / std::pow(d, d);
      CHECK(sup_norm(s, cm(1.0, d)) / l2 == doctest::Approx(std::sqrt(sup2) / l2).epsilon(1e-9));
    }
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const double r = gromov_ratio(2 + trial, 1, fs, cm(0.4), 10, rng());
    CHECK(r >= 1.0);
    CHECK(r <= std::sqrt(50.0));
  }
}

TEST_CASE("log integrals and volume comparison") {
  auto l = cm(1.0, 2), m = cm(0.5);
  auto mu = CurvatureMeasure::of(l);
  // s = x0: -1/2 integral log(1 + c r^2) against mu_L = -1/2 k log k / (k - 1), k = c_M / c_L
  CHECK(log_norm_integral({1.0, 0.0}, m, mu) == doctest::Approx(-0.5 * std::log(2.0)).epsilon(1e-12));

  // brute-force average of log ||s|| for a section with zeros inside both charts
  std::vector<double> s = {0.3, -0.5};
  double brute = 0;
  const int nr = 4000, nt = 400;
  for (int chart = 0; chart < 2; ++chart)
    for (int i = 0; i < nr; ++i) {
      const double r = (i + 0.5) / nr;
      for (int j = 0; j < nt; ++j) {
        const cd z = std::polar(r, 2 * kPi * (j + 0.5) / nt);
        const cd x0 = chart ? z : cd(1), x1 = chart ? cd(1) : z;
        const double n2 = std::norm(s[0] * x0 + s[1] * x1) / (std::norm(x0) + 0.5 * std::norm(x1));
        brute += 0.5 * std::log(n2) * (chart ? mu.mass_inf(r) : mu.mass0(r)) / nr / nt;
      }
    }
  CHECK(log_norm_integral(s, m, mu) == doctest::Approx(brute).epsilon(1e-5));

  auto v = volume_comparison(8, 4, {1.0, 0.0}, l, m);
  Eigen::MatrixXd g_l2 = Eigen::MatrixXd::Zero(13, 13), g_s = Eigen::MatrixXd::Zero(13, 13);
  // N L - j M has weight 16 log(1 + r^2) - 4 log(1 + r^2 / 2); 1D midpoint oracle per monomial
  auto weight = l.scaled(8) - m.scaled(4);
  auto gram = l2_gram(weight, mu), twisted = twisted_gram({1.0, 0.0}, m, weight, mu);
  for (int k = 0; k <= 12; ++k) {
    double a = 0, b = 0;
    const int n = 20000;
    for (int chart = 0; chart < 2; ++chart)
      for (int i = 0; i < n; ++i) {
        const double r = (i + 0.5) / n;
        const double p = chart ? 2 * (12 - k) : 2 * k;
        const double phi = chart ? 16 * std::log(r * r + 1) - 4 * std::log(r * r + 0.5)
                                 : 16 * std::log1p(r * r) - 4 * std::log1p(0.5 * r * r);
        const double twist = chart ? r * r / (r * r + 0.5) : 1 / (1 + 0.5 * r * r);
        const double mass = 2 * r / std::pow(1 + r * r, 2);
        const double base = std::pow(r, p) * std::exp(-phi) * mass / n;
        a += base;
        b += base * twist;
      }
    g_l2(k, k) = a;
    g_s(k, k) = b;
  }
  CHECK(log_det(gram) == doctest::Approx(std::log(g_l2.determinant())).epsilon(1e-7));
  CHECK(log_det(twisted) == doctest::Approx(std::log(g_s.determinant())).epsilon(1e-7));
  CHECK(v.lhs == doctest::Approx(0.5 * (std::log(g_s.determinant()) - std::log(g_l2.determinant()))).epsilon(1e-7));
  CHECK(v.dimension == 17);
  CHECK(v.lhs <= 0);
  CHECK(v.lhs >= v.comparator);
  try {
    volume_comparison(8, 4, {2.0, 0.0}, l, m);
    FAIL("expected NotEffective");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotEffective);
  }
}

TEST_CASE("metric JSON") {
  auto j = nlohmann::json::parse(R"({"diff":[{"tensor":[{"kind":"c","c":"1/2","exponent":3},{"kind":"t","t":3}]},
                                             {"kind":"c","c":2}]})");
  auto h = metric_from_json(j);
  CHECK(h.degree() == 3);
  auto back = metric_from_json(to_json(h));
  CHECK(back.degree() == 3);
  CHECK(back.phi0(0.7) == doctest::Approx(h.phi0(0.7)).epsilon(1e-15));
  try {
    metric_from_json(nlohmann::json::parse(R"({"kind":"q"})"));
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
  }
}
