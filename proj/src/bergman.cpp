#include "arakelov/bergman.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

#include "arakelov/lattice.hpp"

namespace arakelov::bergman {

namespace {

constexpr double kPi = std::numbers::pi;

double log_or_neg_inf(double x) { return x > 0 ? std::log(x) : -std::numeric_limits<double>::infinity(); }

}  // namespace

// ---- metrics ----

LineMetric LineMetric::c_family(double c) {
  if (!(c > 0) || !std::isfinite(c)) throw Error(ErrorKind::InvalidArgument, "c-family metric needs c > 0");
  return LineMetric(Kind::C, c);
}

LineMetric LineMetric::t_family(int t) {
  if (t < 1) throw Error(ErrorKind::InvalidArgument, "t-family metric needs t >= 1");
  return LineMetric(Kind::T, t);
}

double LineMetric::phi0(double r) const {
  if (kind_ == Kind::C) return std::log1p(param_ * r * r);
  return 2.0 / param_ * std::log1p(std::pow(r, param_));
}

double LineMetric::phi_inf(double u) const {
  if (kind_ == Kind::C) return std::log(u * u + param_);
  return 2.0 / param_ * std::log1p(std::pow(u, param_));
}

double LineMetric::mass0(double r) const {
  if (kind_ == Kind::C) {
    const double q = 1 + param_ * r * r;
    return 2 * param_ * r / (q * q);
  }
  const double rt = std::pow(r, param_);
  return param_ * std::pow(r, param_ - 1) / ((1 + rt) * (1 + rt));
}

double LineMetric::mass_inf(double u) const {
  if (kind_ == Kind::C) {
    const double q = u * u + param_;
    return 2 * param_ * u / (q * q);
  }
  return mass0(u);
}

double LineMetric::density0(double r) const {
  if (kind_ == Kind::C) {
    const double q = 1 + param_ * r * r;
    return param_ / (kPi * q * q);
  }
  const double rt = std::pow(r, param_);
  return param_ * std::pow(r, param_ - 2) / (2 * kPi * (1 + rt) * (1 + rt));
}

double LineMetric::log_norm_x1_at_infinity() const { return kind_ == Kind::C ? -0.5 * std::log(param_) : 0.0; }

std::string LineMetric::label() const {
  std::ostringstream out;
  out.precision(17);
  if (kind_ == Kind::C)
    out << "c=" << param_;
  else
    out << "t=" << static_cast<int>(param_);
  return out.str();
}

HermitianMetric HermitianMetric::power(const LineMetric& m, int exponent) {
  HermitianMetric h;
  h.add(m, exponent);
  return h;
}

void HermitianMetric::add(const LineMetric& m, int e) {
  for (auto it = terms_.begin(); it != terms_.end(); ++it)
    if (it->first == m) {
      it->second += e;
      if (it->second == 0) terms_.erase(it);
      return;
    }
  if (e != 0) terms_.emplace_back(m, e);
}

int HermitianMetric::degree() const {
  int d = 0;
  for (const auto& [m, e] : terms_) d += e;
  return d;
}

bool HermitianMetric::has_nonnegative_exponents() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.second >= 0; });
}

double HermitianMetric::phi0(double r) const {
  double acc = 0;
  for (const auto& [m, e] : terms_) acc += e * m.phi0(r);
  return acc;
}

double HermitianMetric::phi_inf(double u) const {
  double acc = 0;
  for (const auto& [m, e] : terms_) acc += e * m.phi_inf(u);
  return acc;
}

HermitianMetric& HermitianMetric::operator+=(const HermitianMetric& o) {
  for (const auto& [m, e] : o.terms_) add(m, e);
  return *this;
}

HermitianMetric HermitianMetric::scaled(int n) const {
  HermitianMetric h;
  for (const auto& [m, e] : terms_) h.add(m, e * n);
  return h;
}

std::string HermitianMetric::label() const {
  if (terms_.empty()) return "trivial";
  std::string out;
  for (const auto& [m, e] : terms_) {
    if (!out.empty()) out += " + ";
    out += std::to_string(e) + "*(" + m.label() + ")";
  }
  return out;
}

CurvatureMeasure CurvatureMeasure::of(const HermitianMetric& m) {
  if (m.degree() <= 0 || !m.has_nonnegative_exponents())
    throw Error(ErrorKind::NonPositiveCurvature, "measure needs a metric with positive curvature: " + m.label());
  CurvatureMeasure mu;
  mu.metric_ = m;
  return mu;
}

double CurvatureMeasure::mass0(double r) const {
  double acc = 0;
  for (const auto& [m, e] : metric_.terms()) acc += e * m.mass0(r);
  return acc / metric_.degree();
}

double CurvatureMeasure::mass_inf(double u) const {
  double acc = 0;
  for (const auto& [m, e] : metric_.terms()) acc += e * m.mass_inf(u);
  return acc / metric_.degree();
}

double CurvatureMeasure::density0(double r) const {
  double acc = 0;
  for (const auto& [m, e] : metric_.terms()) acc += e * m.density0(r);
  return acc / metric_.degree();
}

// ---- quadrature ----

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre01(int n) {
  static std::mutex mu;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (t * p1 - p0) / (t * t - 1);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    {
      double p0 = 1, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (t * p1 - p0) / (t * t - 1);
    }
    double wt = 2 / ((1 - t * t) * dp * dp);
    auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(n - 1 - i);
    x[a] = 0.5 * (1 - t);
    x[b] = 0.5 * (1 + t);
    w[a] = w[b] = 0.5 * wt;
  }
  return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

namespace {

// All moments R(m), m = 0..deg, at a fixed node count.
std::vector<double> moments_at(const HermitianMetric& weight, const CurvatureMeasure& mu, int n) {
  const auto& [x, w] = gauss_legendre01(n);
  const int deg = weight.degree();
  std::vector<double> out(static_cast<std::size_t>(deg + 1), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = x[i];
    const double lr = std::log(r);
    const double b0 = -weight.phi0(r) + log_or_neg_inf(mu.mass0(r)) + std::log(w[i]);
    const double binf = -weight.phi_inf(r) + log_or_neg_inf(mu.mass_inf(r)) + std::log(w[i]);
    for (int m = 0; m <= deg; ++m) {
      out[static_cast<std::size_t>(m)] += std::exp(2 * m * lr + b0) + std::exp(2 * (deg - m) * lr + binf);
    }
  }
  return out;
}

}  // namespace

RadialMoments radial_moments(const HermitianMetric& weight, const CurvatureMeasure& mu,
                             const QuadratureOptions& opts) {
  if (weight.degree() < 0) throw Error(ErrorKind::NegativeDegree, "weight of negative degree has no sections");
  int n = std::max(2, opts.min_nodes);
  if (n > opts.max_nodes) throw Error(ErrorKind::QuadratureBudgetExceeded, "node budget below the minimum");
  auto prev = moments_at(weight, mu, n);
  while (true) {
    const int n2 = 2 * n;
    if (n2 > opts.max_nodes)
      throw Error(ErrorKind::QuadratureBudgetExceeded,
                  "radial moments did not settle within " + std::to_string(opts.max_nodes) + " nodes");
    auto cur = moments_at(weight, mu, n2);
    double err = 0;
    for (std::size_t m = 0; m < cur.size(); ++m) err = std::max(err, std::abs(cur[m] - prev[m]) / std::abs(cur[m]));
    if (err <= opts.tolerance) {
      RadialMoments out;
      out.values = std::move(cur);
      out.certificate = {n2, err};
      return out;
    }
    prev = std::move(cur);
    n = n2;
  }
}

double total_mass(const CurvatureMeasure& mu, const QuadratureOptions& opts) {
  return radial_moments(HermitianMetric(), mu, opts).values[0];
}

GramData l2_gram(const HermitianMetric& weight, const CurvatureMeasure& mu, const QuadratureOptions& opts) {
  auto mom = radial_moments(weight, mu, opts);
  const int d = weight.degree();
  GramData g;
  g.degree = d;
  g.gram = Eigen::MatrixXd::Zero(d + 1, d + 1);
  for (int k = 0; k <= d; ++k) g.gram(k, k) = mom.values[static_cast<std::size_t>(k)];
  g.certificate = mom.certificate;
  g.diagonal = true;
  return g;
}

GramData l2_gram_closed_form(double c, int n) {
  if (!(c > 0)) throw Error(ErrorKind::InvalidArgument, "c-family metric needs c > 0");
  if (n < 0) throw Error(ErrorKind::NegativeDegree, "negative degree");
  GramData g;
  g.degree = n;
  g.gram = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int k = 0; k <= n; ++k)
    g.gram(k, k) = std::exp(-k * std::log(c) + std::lgamma(k + 1.0) + std::lgamma(n - k + 1.0) - std::lgamma(n + 2.0));
  g.diagonal = true;
  return g;
}

GramData twisted_gram(const std::vector<double>& s, const HermitianMetric& s_metric, const HermitianMetric& weight,
                      const CurvatureMeasure& mu, const QuadratureOptions& opts) {
  const int m = static_cast<int>(s.size()) - 1;
  if (m < 0 || m != s_metric.degree())
    throw Error(ErrorKind::InvalidArgument, "section length does not match the degree of its metric");
  if (weight.degree() < 0) throw Error(ErrorKind::NegativeDegree, "weight of negative degree has no sections");
  auto mom = radial_moments(weight + s_metric, mu, opts);
  const int d = weight.degree();
  GramData g;
  g.degree = d;
  g.gram = Eigen::MatrixXd::Zero(d + 1, d + 1);
  for (int k = 0; k <= d; ++k)
    for (int l = 0; l <= d; ++l)
      for (int a = 0; a <= m; ++a) {
        const int b = k + a - l;
        if (b < 0 || b > m) continue;
        g.gram(k, l) += s[static_cast<std::size_t>(a)] * s[static_cast<std::size_t>(b)] *
                        mom.values[static_cast<std::size_t>(k + a)];
      }
  g.certificate = mom.certificate;
  g.diagonal = std::count_if(s.begin(), s.end(), [](double v) { return v != 0; }) <= 1;
  return g;
}

namespace {

struct Equilibrated {
  Eigen::VectorXd log_scale;
  Eigen::MatrixXd scaled;
};

Equilibrated equilibrate(const GramData& g) {
  const auto n = g.gram.rows();
  Equilibrated e;
  e.log_scale.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(g.gram(k, k) > 0)) throw Error(ErrorKind::NotPositiveDefinite, "Gram has a nonpositive diagonal entry");
    e.log_scale(k) = -0.5 * std::log(g.gram(k, k));
  }
  e.scaled = g.gram;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) e.scaled(i, j) *= std::exp(e.log_scale(i) + e.log_scale(j));
  return e;
}

}  // namespace

double log_det(const GramData& g) {
  auto e = equilibrate(g);
  Eigen::LLT<Eigen::MatrixXd> llt(e.scaled);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::NotPositiveDefinite, "Gram is not positive definite");
  double acc = -2 * e.log_scale.sum();
  for (Eigen::Index i = 0; i < e.scaled.rows(); ++i) acc += 2 * std::log(llt.matrixL()(i, i));
  return acc;
}

// ---- pointwise and sup norms ----

namespace {

std::complex<double> horner(const std::vector<double>& c, std::complex<double> z, bool reversed) {
  std::complex<double> acc = 0;
  if (!reversed)
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  else
    for (double v : c) acc = acc * z + v;
  return acc;
}

void check_section(const std::vector<double>& s, const HermitianMetric& metric) {
  if (s.empty() || static_cast<int>(s.size()) - 1 != metric.degree())
    throw Error(ErrorKind::InvalidArgument, "section length does not match the degree of its metric");
}

double chart_norm(const std::vector<double>& s, const HermitianMetric& metric, bool chart_inf, double r, double theta) {
  const auto z = std::polar(r, theta);
  const double phi = chart_inf ? metric.phi_inf(r) : metric.phi0(r);
  return std::abs(horner(s, z, chart_inf)) * std::exp(-0.5 * phi);
}

// Compass search for a local maximum of f(r, theta) with r in [0, 1].
template <class F>
double compass_max(F&& f, double r, double t, double dr, double dt) {
  double best = f(r, t);
  while (dr > 1e-12 || dt > 1e-12) {
    bool moved = false;
    const double cand[4][2] = {{r + dr, t}, {r - dr, t}, {r, t + dt}, {r, t - dt}};
    for (const auto& c : cand) {
      const double cr = std::clamp(c[0], 0.0, 1.0);
      const double v = f(cr, c[1]);
      if (v > best) {
        best = v;
        r = cr;
        t = c[1];
        moved = true;
        break;
      }
    }
    if (!moved) {
      dr *= 0.5;
      dt *= 0.5;
    }
  }
  return best;
}

}  // namespace

double pointwise_norm(const std::vector<double>& s, const HermitianMetric& metric, std::complex<double> z) {
  check_section(s, metric);
  const double r = std::abs(z);
  if (r <= 1) return chart_norm(s, metric, false, r, std::arg(z));
  return chart_norm(s, metric, true, 1 / r, -std::arg(z));
}

double pointwise_norm_at_infinity(const std::vector<double>& s, const HermitianMetric& metric) {
  check_section(s, metric);
  return chart_norm(s, metric, true, 0.0, 0.0);
}

double sup_norm(const std::vector<double>& s, const HermitianMetric& metric) {
  check_section(s, metric);
  const int m = metric.degree();
  const int nr = 32 + 2 * m;
  const int nt = 16 + 4 * (m + 1);
  double best = 0;
  for (bool chart_inf : {false, true}) {
    auto f = [&](double r, double t) { return chart_norm(s, metric, chart_inf, r, t); };
    std::vector<std::tuple<double, double, double>> cand;
    for (int i = 0; i <= nr; ++i) {
      const double r = static_cast<double>(i) / nr;
      for (int j = 0; j < (i == 0 ? 1 : nt); ++j) {
        const double t = 2 * kPi * j / nt;
        cand.emplace_back(f(r, t), r, t);
      }
    }
    const std::size_t keep = std::min<std::size_t>(6, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep), cand.end(),
                      [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
    for (std::size_t i = 0; i < keep; ++i) {
      const auto& [v, r, t] = cand[i];
      best = std::max({best, v, compass_max(f, r, t, 1.0 / nr, 2 * kPi / nt)});
    }
  }
  return best;
}

// ---- distortion ----

DistortionEvaluator::DistortionEvaluator(const GramData& g, const HermitianMetric& weight, double max_condition)
    : weight_(weight), degree_(g.degree) {
  if (weight.degree() != g.degree) throw Error(ErrorKind::InvalidArgument, "Gram degree does not match the weight");
  auto e = equilibrate(g);
  log_scale_ = e.log_scale;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.scaled);
  eig_values_ = es.eigenvalues();
  eig_vectors_ = es.eigenvectors();
  if (!(eig_values_.minCoeff() > 0)) throw Error(ErrorKind::NotPositiveDefinite, "Gram is not positive definite");
  condition_ = eig_values_.maxCoeff() / eig_values_.minCoeff();
  if (condition_ > max_condition)
    throw Error(ErrorKind::IllConditioned, "equilibrated Gram condition number " + std::to_string(condition_));
  Eigen::LLT<Eigen::MatrixXd> llt(e.scaled);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::NotPositiveDefinite, "Gram is not positive definite");
  chol_l_ = llt.matrixL();
}

Eigen::VectorXd DistortionEvaluator::scaled_vector_real(bool chart_inf, std::complex<double> coord,
                                                        Eigen::VectorXd& imag) const {
  const double r = std::abs(coord);
  const double t = std::arg(coord);
  const double half_phi = 0.5 * (chart_inf ? weight_.phi_inf(r) : weight_.phi0(r));
  Eigen::VectorXd re = Eigen::VectorXd::Zero(degree_ + 1);
  imag = Eigen::VectorXd::Zero(degree_ + 1);
  const double lr = std::log(r);
  for (int k = 0; k <= degree_; ++k) {
    const int p = chart_inf ? degree_ - k : k;
    if (r == 0 && p > 0) continue;
    const double mag = std::exp(log_scale_(k) + (p > 0 ? p * lr : 0.0) - half_phi);
    re(k) = mag * std::cos(p * t);
    imag(k) = mag * std::sin(p * t);
  }
  return re;
}

double DistortionEvaluator::operator()(bool chart_inf, std::complex<double> coord) const {
  Eigen::VectorXd im;
  Eigen::VectorXd re = scaled_vector_real(chart_inf, coord, im);
  auto tri = chol_l_.triangularView<Eigen::Lower>();
  return tri.solve(re).squaredNorm() + tri.solve(im).squaredNorm();
}

double DistortionEvaluator::via_eigenbasis(bool chart_inf, std::complex<double> coord) const {
  Eigen::VectorXd im;
  Eigen::VectorXd re = scaled_vector_real(chart_inf, coord, im);
  Eigen::VectorXd pr = eig_vectors_.transpose() * re, pi = eig_vectors_.transpose() * im;
  return (pr.array().square() / eig_values_.array()).sum() + (pi.array().square() / eig_values_.array()).sum();
}

DistortionProfile distortion(const GramData& g, const HermitianMetric& weight, const DistortionGrid& grid) {
  if (grid.radial < 2 || grid.angular < 1) throw Error(ErrorKind::InvalidArgument, "distortion grid too small");
  DistortionEvaluator b(g, weight);
  DistortionProfile prof;
  prof.condition = b.condition();
  prof.sup = -1;
  prof.inf = std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  for (bool chart_inf : {false, true})
    for (int i = 0; i < grid.radial; ++i) {
      const double r = static_cast<double>(i) / (grid.radial - 1);
      for (int j = 0; j < (i == 0 ? 1 : grid.angular); ++j) {
        const auto z = std::polar(r, 2 * kPi * j / grid.angular);
        DistortionPoint p{chart_inf, z, b(chart_inf, z)};
        if (p.value > prof.sup) {
          prof.sup = p.value;
          best = prof.points.size();
        }
        prof.inf = std::min(prof.inf, p.value);
        prof.points.push_back(p);
      }
    }
  if (grid.refine) {
    const auto& p = prof.points[best];
    auto f = [&](double r, double t) { return b(p.chart_inf, std::polar(r, t)); };
    const double dt = grid.angular > 1 ? 2 * kPi / grid.angular : 0.0;
    prof.sup = std::max(prof.sup, compass_max(f, std::abs(p.coord), std::arg(p.coord), 1.0 / (grid.radial - 1), dt));
  }
  return prof;
}

DifferenceReport distortion_difference(int n, int j, const HermitianMetric& l, const HermitianMetric& m,
                                       const DistortionGrid& grid, const QuadratureOptions& opts) {
  if (n < 0 || j < 0) throw Error(ErrorKind::InvalidArgument, "N and j must be nonnegative");
  HermitianMetric weight = l.scaled(n) - m.scaled(j);
  if (weight.degree() < 0)
    throw Error(ErrorKind::NegativeDegree, "N deg L - j deg M = " + std::to_string(weight.degree()) + " < 0");
  auto mu = CurvatureMeasure::of(l);
  DifferenceReport rep;
  rep.profile = distortion(l2_gram(weight, mu, opts), weight, grid);
  rep.degree = weight.degree();
  rep.full_dimension = n * l.degree() + 1;
  rep.ratio = rep.profile.sup / rep.full_dimension;
  return rep;
}

// ---- log integrals and volume comparison ----

namespace {

// Circle average of log|p| at radius r: log|lead| + sum log max(r, |root|).
struct JensenData {
  double log_lead = 0.0;
  std::vector<double> moduli;
};

JensenData jensen(std::vector<double> c) {
  while (!c.empty() && c.back() == 0) c.pop_back();
  if (c.empty()) throw Error(ErrorKind::InvalidArgument, "log integral of the zero section");
  JensenData jd;
  std::size_t zeros = 0;
  while (c[zeros] == 0) ++zeros;
  for (std::size_t i = 0; i < zeros; ++i) jd.moduli.push_back(0.0);
  std::vector<double> rest(c.begin() + static_cast<std::ptrdiff_t>(zeros), c.end());
  jd.log_lead = std::log(std::abs(rest.back()));
  if (rest.size() > 1) {
    Precision prec{128};
    std::vector<PrecComplex> pc;
    for (double v : rest) pc.emplace_back(std::complex<double>(v, 0.0), prec);
    for (const auto& root : poly_roots(pc, 1e-30, prec)) jd.moduli.push_back(std::abs(root.to_complex()));
  }
  return jd;
}

double jensen_mean(const JensenData& jd, double r) {
  double acc = jd.log_lead;
  for (double a : jd.moduli) acc += std::log(std::max(r, a));
  return acc;
}

template <class F>
double integrate_split(F&& f, std::vector<double> kinks) {
  boost::math::quadrature::tanh_sinh<double> ts;
  kinks.push_back(0.0);
  kinks.push_back(1.0);
  std::sort(kinks.begin(), kinks.end());
  double acc = 0;
  for (std::size_t i = 0; i + 1 < kinks.size(); ++i) {
    const double a = kinks[i], b = kinks[i + 1];
    if (b - a < 1e-15) continue;
    acc += ts.integrate(f, a, b, 1e-14);
  }
  return acc;
}

std::vector<double> inner_kinks(const JensenData& jd) {
  std::vector<double> k;
  for (double a : jd.moduli)
    if (a > 0 && a < 1) k.push_back(a);
  return k;
}

}  // namespace

double log_norm_integral(const std::vector<double>& s, const HermitianMetric& metric, const CurvatureMeasure& mu) {
  check_section(s, metric);
  auto j0 = jensen(s);
  auto jinf = jensen(std::vector<double>(s.rbegin(), s.rend()));
  auto f0 = [&](double r) { return (jensen_mean(j0, r) - 0.5 * metric.phi0(r)) * mu.mass0(r); };
  auto finf = [&](double u) { return (jensen_mean(jinf, u) - 0.5 * metric.phi_inf(u)) * mu.mass_inf(u); };
  return integrate_split(f0, inner_kinks(j0)) + integrate_split(finf, inner_kinks(jinf));
}

VolumeComparison volume_comparison(int n, int j, const std::vector<double>& s, const HermitianMetric& l,
                                   const HermitianMetric& m, const QuadratureOptions& opts) {
  check_section(s, m);
  const double sup = sup_norm(s, m);
  if (sup > 1 + 1e-12) throw Error(ErrorKind::NotEffective, "section has sup norm " + std::to_string(sup) + " > 1");
  HermitianMetric weight = l.scaled(n) - m.scaled(j);
  if (weight.degree() < 0) throw Error(ErrorKind::NegativeDegree, "N L - j M has negative degree");
  auto mu = CurvatureMeasure::of(l);
  VolumeComparison out;
  out.lhs = 0.5 * (log_det(twisted_gram(s, m, weight, mu, opts)) - log_det(l2_gram(weight, mu, opts)));
  out.log_integral = log_norm_integral(s, m, mu);
  out.dimension = n * l.degree() + 1;
  out.comparator = out.dimension * out.log_integral;
  return out;
}

double gromov_ratio(int k, int j, const HermitianMetric& l, const HermitianMetric& m, int trials, std::uint64_t seed,
                    const QuadratureOptions& opts) {
  if (k < 0 || j < 0 || trials < 1) throw Error(ErrorKind::InvalidArgument, "gromov_ratio needs k, j >= 0, trials >= 1");
  HermitianMetric weight = l.scaled(k) + m.scaled(j);
  auto g = l2_gram(weight, CurvatureMeasure::of(l), opts);
  auto e = equilibrate(g);
  Eigen::LLT<Eigen::MatrixXd> llt(e.scaled);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::NotPositiveDefinite, "Gram is not positive definite");
  Eigen::MatrixXd lt = llt.matrixU();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto dim = g.gram.rows();
  double best = 0;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd a(dim);
    for (Eigen::Index i = 0; i < dim; ++i) a(i) = normal(rng);
    Eigen::VectorXd c = lt.triangularView<Eigen::Upper>().solve(a);
    std::vector<double> s(static_cast<std::size_t>(dim));
    for (Eigen::Index i = 0; i < dim; ++i) s[static_cast<std::size_t>(i)] = c(i) * std::exp(e.log_scale(i));
    best = std::max(best, sup_norm(s, weight) / a.norm());
  }
  return best;
}

// ---- intersection numbers ----

double mixed_arithmetic_intersection(const LineMetric& a, const LineMetric& b) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f0 = [&](double r) { return 0.5 * a.phi0(r) * b.mass0(r); };
  auto finf = [&](double u) { return (0.5 * a.phi_inf(u) - std::log(u)) * b.mass_inf(u); };
  return -b.log_norm_x1_at_infinity() + ts.integrate(f0, 0.0, 1.0, 1e-14) + ts.integrate(finf, 0.0, 1.0, 1e-14);
}

double mixed_arithmetic_intersection(const HermitianMetric& a, const HermitianMetric& b) {
  double acc = 0;
  for (const auto& [ma, ea] : a.terms())
    for (const auto& [mb, eb] : b.terms()) acc += ea * eb * mixed_arithmetic_intersection(ma, mb);
  return acc;
}

double arithmetic_self_intersection_c(double c) {
  auto m = LineMetric::c_family(c);
  return mixed_arithmetic_intersection(m, m);
}

// ---- chi growth ----

std::vector<ChiRow> chi_l2_series(const LineMetric& metric, const std::vector<int>& ns, const QuadratureOptions& opts) {
  std::vector<ChiRow> rows;
  for (int n : ns) {
    if (n < 0) throw Error(ErrorKind::NegativeDegree, "N must be nonnegative");
    GramData g = metric.kind() == LineMetric::Kind::C
                     ? l2_gram_closed_form(metric.param(), n)
                     : l2_gram(HermitianMetric::power(metric, n), CurvatureMeasure::of(metric), opts);
    ChiRow row;
    row.n = n;
    row.chi = lattice::chi_from_log_det(n + 1, log_det(g));
    row.normalized = n == 0 ? std::numeric_limits<double>::quiet_NaN() : row.chi / (0.5 * n * n);
    rows.push_back(row);
  }
  return rows;
}

SiuReport siu_growth_experiment(const HermitianMetric& l, const HermitianMetric& m, const std::vector<int>& ns,
                                const QuadratureOptions& opts) {
  if (ns.empty()) throw Error(ErrorKind::InvalidArgument, "no N values");
  HermitianMetric diff = l - m;
  if (diff.degree() <= 0) throw Error(ErrorKind::NegativeDegree, "L - M must have positive degree");
  auto mu = CurvatureMeasure::of(l);
  SiuReport rep;
  rep.l_squared = mixed_arithmetic_intersection(l, l);
  rep.l_dot_m = mixed_arithmetic_intersection(l, m);
  rep.coefficient = 0.5 * (rep.l_squared - 2 * rep.l_dot_m);
  std::vector<int> sorted = ns;
  std::sort(sorted.begin(), sorted.end());
  for (int n : sorted) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "N must be positive");
    HermitianMetric w = diff.scaled(n);
    SiuRow row;
    row.n = n;
    row.chi = lattice::chi_from_log_det(w.degree() + 1, log_det(l2_gram(w, mu, opts)));
    row.per_n2 = row.chi / (static_cast<double>(n) * n);
    rep.rows.push_back(row);
  }
  rep.measured_last = rep.rows.back().per_n2;
  rep.measured_liminf = std::numeric_limits<double>::infinity();
  for (std::size_t i = rep.rows.size() / 2; i < rep.rows.size(); ++i)
    rep.measured_liminf = std::min(rep.measured_liminf, rep.rows[i].per_n2);
  return rep;
}

// ---- JSON ----

namespace {

double number_or_rational(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_rational(v.get<std::string>()).convert_to<double>();
  throw Error(ErrorKind::ConfigError, "expected a number or a rational string");
}

}  // namespace

LineMetric line_metric_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw Error(ErrorKind::ConfigError, "metric needs a \"kind\"");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "c") return LineMetric::c_family(number_or_rational(j.at("c")));
  if (kind == "t") return LineMetric::t_family(j.at("t").get<int>());
  if (kind == "fs") return LineMetric::c_family(1.0);
  throw Error(ErrorKind::ConfigError, "unknown metric kind \"" + kind + "\"");
}

HermitianMetric metric_from_json(const nlohmann::json& j) {
  try {
    if (j.is_object() && j.contains("tensor")) {
      HermitianMetric h;
      for (const auto& part : j.at("tensor")) h += metric_from_json(part);
      return h;
    }
    if (j.is_object() && j.contains("diff")) {
      const auto& d = j.at("diff");
      if (!d.is_array() || d.size() != 2) throw Error(ErrorKind::ConfigError, "\"diff\" takes two metrics");
      return metric_from_json(d[0]) - metric_from_json(d[1]);
    }
    return HermitianMetric::power(line_metric_from_json(j), j.value("exponent", 1));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("bad metric: ") + e.what());
  }
}

nlohmann::json to_json(const HermitianMetric& m) {
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& [lm, e] : m.terms()) {
    nlohmann::json p;
    if (lm.kind() == LineMetric::Kind::C) {
      p = {{"kind", "c"}, {"c", lm.param()}};
    } else {
      p = {{"kind", "t"}, {"t", static_cast<int>(lm.param())}};
    }
    p["exponent"] = e;
    parts.push_back(p);
  }
  return {{"tensor", parts}};
}

}  // namespace arakelov::bergman
