#pragma once

// Galois orbits as empirical measures and equidistribution diagnostics on
// the circle and the torus.

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "arakelov/heights.hpp"
#include "arakelov/numkernel.hpp"
#include "json.hpp"

namespace arakelov::equidist {

using Coord = std::complex<double>;
using TorusPoint = std::vector<Coord>;

struct EmpiricalMeasure {
  std::vector<TorusPoint> points;
  std::vector<double> weights;

  static EmpiricalMeasure uniform(std::vector<TorusPoint> points);
  int dimension() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
};

struct GaloisOrbit {
  EmpiricalMeasure measure;
  int degree = 0;
  /// Cyclotomic orbits keep exact residues: point j is exp(2 pi i residues[j] / m).
  std::optional<long long> m;
  std::vector<std::vector<long long>> residues;
};

GaloisOrbit galois_orbit_minpoly(const heights::AlgebraicP1Point& x, double tol = 1e-30, Precision prec = {});
GaloisOrbit galois_orbit_cyclotomic(const heights::CyclotomicTorusPoint& x);

constexpr double kTorusTolerance = 1e-9;

/// sum_j w_j prod_i z_ji^k_i; OffTorus if some |z| deviates from 1 by more than tol.
Coord weyl_sum(const EmpiricalMeasure& mu, const std::vector<long long>& k, double tol = kTorusTolerance);
/// Exact value on a cyclotomic orbit: c_m(k.a) / phi(m) (a Ramanujan sum, real).
Rational weyl_sum_exact(const GaloisOrbit& orbit, const std::vector<long long>& k);
/// Ramanujan sum c_m(n).
BigInt ramanujan_sum(long long m, long long n);

/// Characters k in Z^n with 0 < max|k_i| <= cutoff.
std::vector<std::vector<long long>> character_bank(int n, int cutoff);

/// Discrepancy over all arcs of S^1 (open or closed) between the measure and
/// the uniform one: max_i (W_i - x_(i)) - min_i (W_{i-1} - x_(i)) over the
/// sorted angles x in [0, 1) and cumulative weights W. One point gives 1,
/// m equally spaced points give 1/m.
double star_discrepancy(const EmpiricalMeasure& mu, double tol = kTorusTolerance);
/// Exact discrepancy of the first coordinate of a cyclotomic orbit.
Rational star_discrepancy_exact(const GaloisOrbit& orbit);

using TestFunction = std::function<double(const TorusPoint&)>;
/// h + eps * sum_j w_j f(z_j).
double twisted_height(double h, const EmpiricalMeasure& mu, const TestFunction& f, double eps);
double integrate(const EmpiricalMeasure& mu, const TestFunction& f);

struct BiluRow {
  long long m = 0;
  int degree = 0;
  Rational max_weyl;
  Rational discrepancy;
};

struct BiluReport {
  std::vector<BiluRow> rows;
  /// Least-squares slopes of log(value) against log(m).
  double weyl_slope = 0.0;
  double discrepancy_slope = 0.0;
  bool discrepancy_nonincreasing = true;
};

/// Orbits of exp(2 pi i a / m) tuples with a = exponents (default (1)).
BiluReport bilu_experiment(const std::vector<long long>& orders, int cutoff,
                           const std::vector<long long>& exponents = {1});

nlohmann::json to_json(const BiluReport& r);
std::string to_csv(const BiluReport& r);

}  // namespace arakelov::equidist
