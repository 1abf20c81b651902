#include "arakelov/equidist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

namespace arakelov::equidist {

namespace {

void check_on_torus(const EmpiricalMeasure& mu, double tol) {
  for (const auto& p : mu.points)
    for (const auto& z : p)
      if (std::abs(std::abs(z) - 1.0) > tol)
        throw Error(ErrorKind::OffTorus, "point off the unit circle by " + std::to_string(std::abs(std::abs(z) - 1.0)));
}

double unit_angle(Coord z) {
  double t = std::arg(z) / (2 * std::numbers::pi);
  if (t < 0) t += 1.0;
  if (t >= 1.0) t -= 1.0;
  return t;
}

// Least-squares slope of log(y) against log(x), skipping nonpositive y.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (y[i] > 0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  if (lx.size() < 2) return 0.0;
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace

EmpiricalMeasure EmpiricalMeasure::uniform(std::vector<TorusPoint> points) {
  if (points.empty()) throw Error(ErrorKind::InvalidArgument, "measure needs at least one point");
  EmpiricalMeasure mu;
  mu.weights.assign(points.size(), 1.0 / static_cast<double>(points.size()));
  mu.points = std::move(points);
  return mu;
}

GaloisOrbit galois_orbit_minpoly(const heights::AlgebraicP1Point& x, double tol, Precision prec) {
  if (x.is_infinity()) throw Error(ErrorKind::InvalidArgument, "the point at infinity has no finite orbit");
  auto roots = poly_roots(x.minpoly(), tol, prec);
  std::vector<TorusPoint> pts;
  for (const auto& r : roots) pts.push_back({r.to_complex()});
  GaloisOrbit o;
  o.degree = static_cast<int>(pts.size());
  o.measure = EmpiricalMeasure::uniform(std::move(pts));
  return o;
}

GaloisOrbit galois_orbit_cyclotomic(const heights::CyclotomicTorusPoint& x) {
  const long long m = x.m;
  std::set<std::vector<long long>> seen;
  GaloisOrbit o;
  o.m = m;
  for (long long t = 1; t <= m; ++t) {
    if (std::gcd(t, m) != 1) continue;
    std::vector<long long> r;
    for (long long a : x.exponents) r.push_back(static_cast<long long>((static_cast<__int128>(t) * a) % m));
    if (!seen.insert(r).second) continue;
    o.residues.push_back(std::move(r));
  }
  std::vector<TorusPoint> pts;
  for (const auto& r : o.residues) {
    TorusPoint p;
    for (long long v : r) p.push_back(std::polar(1.0, 2 * std::numbers::pi * static_cast<double>(v) / static_cast<double>(m)));
    pts.push_back(std::move(p));
  }
  o.degree = static_cast<int>(pts.size());
  o.measure = EmpiricalMeasure::uniform(std::move(pts));
  return o;
}

Coord weyl_sum(const EmpiricalMeasure& mu, const std::vector<long long>& k, double tol) {
  check_on_torus(mu, tol);
  if (static_cast<int>(k.size()) != mu.dimension())
    throw Error(ErrorKind::InvalidArgument, "character dimension does not match measure");
  if (std::all_of(k.begin(), k.end(), [](long long v) { return v == 0; })) return 1.0;
  Coord acc = 0;
  for (std::size_t j = 0; j < mu.points.size(); ++j) {
    double angle = 0;
    for (std::size_t i = 0; i < k.size(); ++i) angle += static_cast<double>(k[i]) * std::arg(mu.points[j][i]);
    acc += mu.weights[j] * std::polar(1.0, angle);
  }
  return acc;
}

BigInt ramanujan_sum(long long m, long long n) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "Ramanujan sum needs m >= 1");
  long long r = ((n % m) + m) % m;
  long long g = std::gcd(r, m);
  long long q = m / g;
  return BigInt(mobius(q)) * euler_phi(m) / euler_phi(q);
}

Rational weyl_sum_exact(const GaloisOrbit& orbit, const std::vector<long long>& k) {
  if (!orbit.m) throw Error(ErrorKind::InvalidArgument, "exact Weyl sums need a cyclotomic orbit");
  const long long m = *orbit.m;
  const auto& base = orbit.residues.front();  // t = 1
  if (k.size() != base.size()) throw Error(ErrorKind::InvalidArgument, "character dimension does not match orbit");
  __int128 s = 0;
  for (std::size_t i = 0; i < k.size(); ++i) s = (s + static_cast<__int128>(k[i] % m) * base[i]) % m;
  return Rational(ramanujan_sum(m, static_cast<long long>(s)), BigInt(euler_phi(m)));
}

std::vector<std::vector<long long>> character_bank(int n, int cutoff) {
  if (n < 1 || cutoff < 1) throw Error(ErrorKind::InvalidArgument, "character bank needs n >= 1 and cutoff >= 1");
  std::vector<std::vector<long long>> out;
  std::vector<long long> k(static_cast<std::size_t>(n), -cutoff);
  while (true) {
    if (std::any_of(k.begin(), k.end(), [](long long v) { return v != 0; })) out.push_back(k);
    std::size_t i = 0;
    while (i < k.size() && k[i] == cutoff) k[i++] = -cutoff;
    if (i == k.size()) break;
    ++k[i];
  }
  return out;
}

double star_discrepancy(const EmpiricalMeasure& mu, double tol) {
  check_on_torus(mu, tol);
  if (mu.dimension() != 1) throw Error(ErrorKind::InvalidArgument, "discrepancy is defined on the circle");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t j = 0; j < mu.points.size(); ++j) pts.emplace_back(unit_angle(mu.points[j][0]), mu.weights[j]);
  std::sort(pts.begin(), pts.end());
  double w = 0, hi = -2, lo = 2;
  for (const auto& [x, wt] : pts) {
    lo = std::min(lo, w - x);
    w += wt;
    hi = std::max(hi, w - x);
  }
  return hi - lo;
}

Rational star_discrepancy_exact(const GaloisOrbit& orbit) {
  if (!orbit.m) throw Error(ErrorKind::InvalidArgument, "exact discrepancy needs a cyclotomic orbit");
  const long long m = *orbit.m;
  std::vector<long long> r;
  for (const auto& p : orbit.residues) r.push_back(p.front());
  std::sort(r.begin(), r.end());
  const long long n = static_cast<long long>(r.size());
  // scaled by n*m: W_i - x_(i) -> i*m - r_i*n
  __int128 hi = std::numeric_limits<long long>::min(), lo = std::numeric_limits<long long>::max();
  for (long long i = 1; i <= n; ++i) {
    __int128 xi = static_cast<__int128>(r[static_cast<std::size_t>(i - 1)]) * n;
    hi = std::max<__int128>(hi, static_cast<__int128>(i) * m - xi);
    lo = std::min<__int128>(lo, static_cast<__int128>(i - 1) * m - xi);
  }
  return Rational(BigInt(static_cast<long long>(hi - lo)), BigInt(n) * m);
}

double integrate(const EmpiricalMeasure& mu, const TestFunction& f) {
  double acc = 0;
  for (std::size_t j = 0; j < mu.points.size(); ++j) acc += mu.weights[j] * f(mu.points[j]);
  return acc;
}

double twisted_height(double h, const EmpiricalMeasure& mu, const TestFunction& f, double eps) {
  if (eps == 0) return h;
  return h + eps * integrate(mu, f);
}

BiluReport bilu_experiment(const std::vector<long long>& orders, int cutoff, const std::vector<long long>& exponents) {
  BiluReport rep;
  auto bank = character_bank(static_cast<int>(exponents.size()), cutoff);
  std::vector<double> ms, weyl, disc;
  for (long long m : orders) {
    if (m < 2) throw Error(ErrorKind::InvalidArgument, "orders must be >= 2");
    auto orbit = galois_orbit_cyclotomic(heights::CyclotomicTorusPoint::make(m, exponents));
    BiluRow row;
    row.m = m;
    row.degree = orbit.degree;
    row.max_weyl = 0;
    for (const auto& k : bank) row.max_weyl = std::max(row.max_weyl, Rational(abs(weyl_sum_exact(orbit, k))));
    row.discrepancy = star_discrepancy_exact(orbit);
    ms.push_back(static_cast<double>(m));
    weyl.push_back(row.max_weyl.convert_to<double>());
    disc.push_back(row.discrepancy.convert_to<double>());
    if (!rep.rows.empty() && m > rep.rows.back().m && row.discrepancy > rep.rows.back().discrepancy)
      rep.discrepancy_nonincreasing = false;
    rep.rows.push_back(std::move(row));
  }
  rep.weyl_slope = loglog_slope(ms, weyl);
  rep.discrepancy_slope = loglog_slope(ms, disc);
  return rep;
}

nlohmann::json to_json(const BiluReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"m", row.m},
                    {"degree", row.degree},
                    {"max_weyl", to_string(row.max_weyl)},
                    {"max_weyl_value", row.max_weyl.convert_to<double>()},
                    {"discrepancy", to_string(row.discrepancy)},
                    {"discrepancy_value", row.discrepancy.convert_to<double>()}});
  return {{"rows", rows},
          {"weyl_slope", r.weyl_slope},
          {"discrepancy_slope", r.discrepancy_slope},
          {"discrepancy_nonincreasing", r.discrepancy_nonincreasing}};
}

std::string to_csv(const BiluReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "m,degree,max_weyl,discrepancy\n";
  for (const auto& row : r.rows)
    out << row.m << ',' << row.degree << ',' << row.max_weyl.convert_to<double>() << ','
        << row.discrepancy.convert_to<double>() << '\n';
  return out.str();
}

}  // namespace arakelov::equidist
