#include "arakelov/numkernel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace arakelov {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::RankTooLarge: return "RankTooLarge";
    case ErrorKind::BoundaryAmbiguity: return "BoundaryAmbiguity";
    case ErrorKind::NotSaturated: return "NotSaturated";
    case ErrorKind::GeneratorsDoNotSpan: return "GeneratorsDoNotSpan";
    case ErrorKind::DegenerateMap: return "DegenerateMap";
    case ErrorKind::UnsupportedShape: return "UnsupportedShape";
    case ErrorKind::OrbitOverflow: return "OrbitOverflow";
    case ErrorKind::OffTorus: return "OffTorus";
    case ErrorKind::QuadratureBudgetExceeded: return "QuadratureBudgetExceeded";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::NonPositiveCurvature: return "NonPositiveCurvature";
    case ErrorKind::NotEffective: return "NotEffective";
    case ErrorKind::NegativeDegree: return "NegativeDegree";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Exact scalars

double log_abs(const BigInt& v) {
  if (v == 0) throw Error(ErrorKind::InvalidArgument, "log of zero");
  long exp = 0;
  double mant = mpz_get_d_2exp(&exp, v.backend().data());
  return std::log(std::fabs(mant)) + static_cast<double>(exp) * std::log(2.0);
}

double log_abs(const Rational& v) {
  return log_abs(BigInt(numerator(v))) - log_abs(BigInt(denominator(v)));
}

std::string to_string(const Rational& v) {
  if (denominator(v) == 1) return numerator(v).str();
  return numerator(v).str() + "/" + denominator(v).str();
}

Rational parse_rational(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (s.empty()) throw Error(ErrorKind::ConfigError, "empty rational");
  try {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      BigInt num = parse_rational(s.substr(0, slash)).convert_to<BigInt>();
      BigInt den = parse_rational(s.substr(slash + 1)).convert_to<BigInt>();
      if (den == 0) throw Error(ErrorKind::ConfigError, "zero denominator in '" + s + "'");
      return Rational(num, den);
    }
    std::string mant = s;
    long exp10 = 0;
    if (auto e = s.find_first_of("eE"); e != std::string::npos) {
      mant = s.substr(0, e);
      exp10 = std::stol(s.substr(e + 1));
    }
    bool negative = false;
    if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
      negative = mant[0] == '-';
      mant = mant.substr(1);
    }
    if (auto dot = mant.find('.'); dot != std::string::npos) {
      exp10 -= static_cast<long>(mant.size() - dot - 1);
      mant.erase(dot, 1);
    }
    if (mant.empty() || !std::all_of(mant.begin(), mant.end(), [](unsigned char c) { return std::isdigit(c); }))
      throw Error(ErrorKind::ConfigError, "cannot parse rational '" + s + "'");
    // leading zeros would make the string parse as octal
    std::size_t nz = mant.find_first_not_of('0');
    BigInt digits(nz == std::string::npos ? std::string("0") : mant.substr(nz));
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::labs(exp10)));
    Rational r = exp10 >= 0 ? Rational(digits * scale) : Rational(digits, scale);
    return negative ? -r : r;
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const Error*>(&e)) throw;
    throw Error(ErrorKind::ConfigError, "cannot parse rational '" + s + "'");
  }
}

BigInt gcd(const BigInt& a, const BigInt& b) { return boost::multiprecision::gcd(a, b); }

// ---------------------------------------------------------------------------
// BigFloat

namespace {

void check_finite(mpfr_srcptr v, const char* op) {
  if (mpfr_nan_p(v) || mpfr_inf_p(v))
    throw Error(ErrorKind::InvalidArgument, std::string("non-finite result in ") + op);
}

mpfr_prec_t joint_precision(mpfr_srcptr a, mpfr_srcptr b) {
  return std::max(mpfr_get_prec(a), mpfr_get_prec(b));
}

}  // namespace

BigFloat::BigFloat(Precision prec) {
  mpfr_init2(v_, static_cast<mpfr_prec_t>(prec.bits));
  mpfr_set_zero(v_, 1);
}

BigFloat::BigFloat(double v, Precision prec) {
  mpfr_init2(v_, static_cast<mpfr_prec_t>(prec.bits));
  mpfr_set_d(v_, v, MPFR_RNDN);
  check_finite(v_, "construction");
}

BigFloat::BigFloat(const BigInt& v, Precision prec) {
  mpfr_init2(v_, static_cast<mpfr_prec_t>(prec.bits));
  mpfr_set_z(v_, v.backend().data(), MPFR_RNDN);
}

BigFloat::BigFloat(const Rational& v, Precision prec) {
  mpfr_init2(v_, static_cast<mpfr_prec_t>(prec.bits));
  mpfr_set_q(v_, v.backend().data(), MPFR_RNDN);
}

BigFloat::BigFloat(const BigFloat& other) {
  mpfr_init2(v_, mpfr_get_prec(other.v_));
  mpfr_set(v_, other.v_, MPFR_RNDN);
}

BigFloat::BigFloat(BigFloat&& other) noexcept {
  mpfr_init2(v_, mpfr_get_prec(other.v_));
  mpfr_swap(v_, other.v_);
}

BigFloat& BigFloat::operator=(const BigFloat& other) {
  if (this != &other) {
    mpfr_set_prec(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  return *this;
}

BigFloat& BigFloat::operator=(BigFloat&& other) noexcept {
  mpfr_swap(v_, other.v_);
  return *this;
}

BigFloat::~BigFloat() { mpfr_clear(v_); }

long BigFloat::exponent() const {
  if (mpfr_zero_p(v_)) return std::numeric_limits<long>::min() / 2;
  return mpfr_get_exp(v_);
}

BigFloat& BigFloat::operator+=(const BigFloat& o) {
  mpfr_prec_round(v_, joint_precision(v_, o.v_), MPFR_RNDN);
  mpfr_add(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}

BigFloat& BigFloat::operator-=(const BigFloat& o) {
  mpfr_prec_round(v_, joint_precision(v_, o.v_), MPFR_RNDN);
  mpfr_sub(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}

BigFloat& BigFloat::operator*=(const BigFloat& o) {
  mpfr_prec_round(v_, joint_precision(v_, o.v_), MPFR_RNDN);
  mpfr_mul(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}

BigFloat& BigFloat::operator/=(const BigFloat& o) {
  if (mpfr_zero_p(o.v_)) throw Error(ErrorKind::InvalidArgument, "division by zero");
  mpfr_prec_round(v_, joint_precision(v_, o.v_), MPFR_RNDN);
  mpfr_div(v_, v_, o.v_, MPFR_RNDN);
  check_finite(v_, "division");
  return *this;
}

BigFloat BigFloat::operator-() const {
  BigFloat r(*this);
  mpfr_neg(r.v_, r.v_, MPFR_RNDN);
  return r;
}

BigFloat BigFloat::pi(Precision prec) {
  BigFloat r(prec);
  mpfr_const_pi(r.v_, MPFR_RNDN);
  return r;
}

BigFloat abs(const BigFloat& x) {
  BigFloat r(x);
  mpfr_abs(r.get(), r.get(), MPFR_RNDN);
  return r;
}

BigFloat sqrt(const BigFloat& x) {
  if (x.sign() < 0) throw Error(ErrorKind::InvalidArgument, "sqrt of negative value");
  BigFloat r(x);
  mpfr_sqrt(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigFloat log(const BigFloat& x) {
  if (x.sign() <= 0) throw Error(ErrorKind::InvalidArgument, "log of non-positive value");
  BigFloat r(x);
  mpfr_log(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigFloat exp(const BigFloat& x) {
  BigFloat r(x);
  mpfr_exp(r.get(), x.get(), MPFR_RNDN);
  check_finite(r.get(), "exp");
  return r;
}

BigFloat sin(const BigFloat& x) {
  BigFloat r(x);
  mpfr_sin(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigFloat cos(const BigFloat& x) {
  BigFloat r(x);
  mpfr_cos(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigFloat atan2(const BigFloat& y, const BigFloat& x) {
  BigFloat r(Precision{static_cast<unsigned>(joint_precision(y.get(), x.get()))});
  mpfr_atan2(r.get(), y.get(), x.get(), MPFR_RNDN);
  return r;
}

BigFloat hypot(const BigFloat& x, const BigFloat& y) {
  BigFloat r(Precision{static_cast<unsigned>(joint_precision(y.get(), x.get()))});
  mpfr_hypot(r.get(), x.get(), y.get(), MPFR_RNDN);
  return r;
}

BigFloat max(const BigFloat& a, const BigFloat& b) { return a < b ? b : a; }

// ---------------------------------------------------------------------------
// PrecComplex

PrecComplex& PrecComplex::operator+=(const PrecComplex& o) {
  re += o.re;
  im += o.im;
  return *this;
}

PrecComplex& PrecComplex::operator-=(const PrecComplex& o) {
  re -= o.re;
  im -= o.im;
  return *this;
}

PrecComplex& PrecComplex::operator*=(const PrecComplex& o) {
  BigFloat r = re * o.re - im * o.im;
  BigFloat i = re * o.im + im * o.re;
  re = std::move(r);
  im = std::move(i);
  return *this;
}

PrecComplex& PrecComplex::operator/=(const PrecComplex& o) {
  BigFloat den = norm(o);
  if (den.is_zero()) throw Error(ErrorKind::InvalidArgument, "complex division by zero");
  BigFloat r = (re * o.re + im * o.im) / den;
  BigFloat i = (im * o.re - re * o.im) / den;
  re = std::move(r);
  im = std::move(i);
  return *this;
}

BigFloat abs(const PrecComplex& z) { return hypot(z.re, z.im); }
BigFloat norm(const PrecComplex& z) { return z.re * z.re + z.im * z.im; }
BigFloat arg(const PrecComplex& z) { return atan2(z.im, z.re); }

PrecComplex root_of_unity(const BigInt& num, const BigInt& den, Precision prec) {
  if (den <= 0) throw Error(ErrorKind::InvalidArgument, "root_of_unity needs positive order");
  BigInt n = num % den;
  if (n < 0) n += den;
  BigFloat angle = BigFloat(Rational(2 * n, den), prec) * BigFloat::pi(prec);
  return PrecComplex(cos(angle), sin(angle));
}

// ---------------------------------------------------------------------------
// IntPolynomial

IntPolynomial::IntPolynomial(std::vector<BigInt> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

IntPolynomial IntPolynomial::from_ints(std::initializer_list<long long> coeffs) {
  std::vector<BigInt> c;
  for (long long v : coeffs) c.emplace_back(v);
  return IntPolynomial(std::move(c));
}

IntPolynomial IntPolynomial::monomial(const BigInt& c, int degree) {
  std::vector<BigInt> v(static_cast<std::size_t>(degree) + 1);
  v.back() = c;
  return IntPolynomial(std::move(v));
}

void IntPolynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

const BigInt& IntPolynomial::leading() const {
  if (coeffs_.empty()) throw Error(ErrorKind::InvalidArgument, "zero polynomial has no leading coefficient");
  return coeffs_.back();
}

BigInt IntPolynomial::content() const {
  BigInt g = 0;
  for (const auto& c : coeffs_) g = gcd(g, c);
  return g;
}

IntPolynomial IntPolynomial::primitive_part() const {
  if (is_zero()) return *this;
  BigInt g = content();
  if (leading() < 0) g = -g;
  std::vector<BigInt> c(coeffs_);
  for (auto& v : c) v /= g;
  return IntPolynomial(std::move(c));
}

IntPolynomial IntPolynomial::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<BigInt> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * static_cast<long>(i);
  return IntPolynomial(std::move(d));
}

BigInt IntPolynomial::max_abs_coeff() const {
  BigInt m = 0;
  for (const auto& c : coeffs_) m = std::max(m, BigInt(abs(c)));
  return m;
}

Rational IntPolynomial::eval(const Rational& x) const {
  Rational acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + Rational(*it);
  return acc;
}

PrecComplex IntPolynomial::eval(const PrecComplex& z) const {
  Precision prec{z.precision()};
  PrecComplex acc(prec);
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    acc *= z;
    acc.re += BigFloat(*it, prec);
  }
  return acc;
}

IntPolynomial operator+(const IntPolynomial& a, const IntPolynomial& b) {
  std::vector<BigInt> c(std::max(a.coeffs_.size(), b.coeffs_.size()));
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) c[i] += a.coeffs_[i];
  for (std::size_t i = 0; i < b.coeffs_.size(); ++i) c[i] += b.coeffs_[i];
  return IntPolynomial(std::move(c));
}

IntPolynomial operator-(const IntPolynomial& a, const IntPolynomial& b) {
  std::vector<BigInt> c(std::max(a.coeffs_.size(), b.coeffs_.size()));
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) c[i] += a.coeffs_[i];
  for (std::size_t i = 0; i < b.coeffs_.size(); ++i) c[i] -= b.coeffs_[i];
  return IntPolynomial(std::move(c));
}

IntPolynomial operator*(const IntPolynomial& a, const IntPolynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<BigInt> c(a.coeffs_.size() + b.coeffs_.size() - 1);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return IntPolynomial(std::move(c));
}

std::string IntPolynomial::to_string() const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int i = degree(); i >= 0; --i) {
    const BigInt& c = coeffs_[static_cast<std::size_t>(i)];
    if (c == 0) continue;
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    BigInt a = abs(c);
    if (a != 1 || i == 0) os << a;
    if (i >= 1) os << "z";
    if (i >= 2) os << "^" << i;
    first = false;
  }
  return os.str();
}

namespace {

// lc(b)^(deg a - deg b + 1) * a mod b
IntPolynomial pseudo_remainder(const IntPolynomial& a, const IntPolynomial& b) {
  std::vector<BigInt> r(a.coeffs());
  const int db = b.degree();
  const BigInt& lb = b.leading();
  for (int k = a.degree(); k >= db; --k) {
    BigInt lead = r[static_cast<std::size_t>(k)];
    for (auto& v : r) v *= lb;
    if (lead != 0)
      for (int i = 0; i <= db; ++i) r[static_cast<std::size_t>(k - db + i)] -= lead * b[static_cast<std::size_t>(i)];
  }
  r.resize(static_cast<std::size_t>(std::max(db, 0)));
  return IntPolynomial(std::move(r));
}

}  // namespace

IntPolynomial exact_divide(const IntPolynomial& a, const IntPolynomial& b) {
  if (b.is_zero()) throw Error(ErrorKind::InvalidArgument, "division by zero polynomial");
  if (a.is_zero()) return {};
  if (a.degree() < b.degree()) throw Error(ErrorKind::InvalidArgument, "inexact polynomial division");
  std::vector<BigInt> r(a.coeffs());
  std::vector<BigInt> q(static_cast<std::size_t>(a.degree() - b.degree()) + 1);
  const int db = b.degree();
  for (int k = a.degree(); k >= db; --k) {
    const BigInt& lead = r[static_cast<std::size_t>(k)];
    if (lead == 0) continue;
    BigInt rem;
    BigInt c;
    boost::multiprecision::divide_qr(lead, b.leading(), c, rem);
    if (rem != 0) throw Error(ErrorKind::InvalidArgument, "inexact polynomial division");
    q[static_cast<std::size_t>(k - db)] = c;
    for (int i = 0; i <= db; ++i) r[static_cast<std::size_t>(k - db + i)] -= c * b[static_cast<std::size_t>(i)];
  }
  for (const auto& v : r)
    if (v != 0) throw Error(ErrorKind::InvalidArgument, "inexact polynomial division");
  return IntPolynomial(std::move(q));
}

IntPolynomial gcd(const IntPolynomial& a, const IntPolynomial& b) {
  IntPolynomial x = a.primitive_part();
  IntPolynomial y = b.primitive_part();
  if (x.degree() < y.degree()) std::swap(x, y);
  while (!y.is_zero()) {
    IntPolynomial r = pseudo_remainder(x, y);
    x = std::move(y);
    y = r.primitive_part();
  }
  return x.primitive_part();
}

bool is_squarefree(const IntPolynomial& p) {
  if (p.degree() <= 1) return !p.is_zero();
  return gcd(p, p.derivative()).degree() == 0;
}

// ---------------------------------------------------------------------------
// Roots

namespace {

struct HornerResult {
  PrecComplex value;
  PrecComplex derivative;
};

HornerResult horner(std::span<const PrecComplex> c, const PrecComplex& z, Precision prec) {
  HornerResult h{PrecComplex(prec), PrecComplex(prec)};
  for (std::size_t k = c.size(); k-- > 0;) {
    h.derivative *= z;
    h.derivative += h.value;
    h.value *= z;
    h.value += c[k];
  }
  return h;
}

// Returns true when every root meets the residual criterion.
bool aberth(std::span<const PrecComplex> c, std::vector<PrecComplex>& z, const BigFloat& threshold,
            Precision prec, int max_iter) {
  const std::size_t n = z.size();
  const BigFloat one(1.0, prec);
  int polish_left = -1;
  std::vector<bool> converged(n, false);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool all = true;
    for (std::size_t k = 0; k < n; ++k) {
      HornerResult h = horner(c, z[k], prec);
      BigFloat scale = max(one, abs(z[k]));
      mpfr_pow_ui(scale.get(), scale.get(), static_cast<unsigned long>(n), MPFR_RNDN);
      converged[k] = abs(h.value) <= threshold * scale;
      all = all && converged[k];
      if (h.value.re.is_zero() && h.value.im.is_zero()) continue;
      if (h.derivative.re.is_zero() && h.derivative.im.is_zero()) {
        // critical point: nudge off it deterministically
        z[k] += PrecComplex(BigFloat(1e-3, prec), BigFloat(7e-4, prec));
        continue;
      }
      PrecComplex ratio = h.value / h.derivative;
      PrecComplex sum(prec);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == k) continue;
        PrecComplex diff = z[k] - z[j];
        if (diff.re.is_zero() && diff.im.is_zero()) continue;
        sum += PrecComplex(one, BigFloat(prec)) / diff;
      }
      PrecComplex denom = PrecComplex(one, BigFloat(prec)) - ratio * sum;
      if (denom.re.is_zero() && denom.im.is_zero()) continue;
      z[k] -= ratio / denom;
    }
    if (all && polish_left < 0) polish_left = 2;
    if (polish_left == 0) return true;
    if (polish_left > 0) --polish_left;
  }
  // verify once more after the final sweep
  for (std::size_t k = 0; k < n; ++k) {
    HornerResult h = horner(c, z[k], prec);
    BigFloat scale = max(one, abs(z[k]));
    mpfr_pow_ui(scale.get(), scale.get(), static_cast<unsigned long>(n), MPFR_RNDN);
    if (!(abs(h.value) <= threshold * scale)) return false;
  }
  return true;
}

std::vector<std::complex<double>> companion_eigenvalues(std::span<const PrecComplex> c) {
  const std::size_t n = c.size() - 1;
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::complex<double> lead = c[n].to_complex();
  for (std::size_t i = 0; i < n; ++i) {
    comp(0, static_cast<Eigen::Index>(i)) = -c[n - 1 - i].to_complex() / lead;
    if (i + 1 < n) comp(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = 1.0;
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, false);
  std::vector<std::complex<double>> out;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) out.push_back(solver.eigenvalues()(i));
  return out;
}

}  // namespace

std::vector<PrecComplex> poly_roots(std::span<const PrecComplex> coeffs, double tol, Precision prec) {
  if (!(tol > 0)) throw Error(ErrorKind::InvalidArgument, "poly_roots tolerance must be positive");
  std::vector<PrecComplex> c(coeffs.begin(), coeffs.end());
  while (!c.empty() && c.back().re.is_zero() && c.back().im.is_zero()) c.pop_back();
  if (c.size() < 2) throw Error(ErrorKind::InvalidArgument, "poly_roots needs degree >= 1");
  const std::size_t n = c.size() - 1;

  // roots at the origin are split off exactly
  std::size_t zeros = 0;
  while (zeros < n && c[zeros].re.is_zero() && c[zeros].im.is_zero()) ++zeros;
  std::vector<PrecComplex> roots;
  for (std::size_t i = 0; i < zeros; ++i) roots.emplace_back(prec);
  if (zeros == n) return roots;
  std::vector<PrecComplex> red(c.begin() + static_cast<std::ptrdiff_t>(zeros), c.end());
  const std::size_t m = red.size() - 1;

  BigFloat norm_inf(prec);
  for (const auto& a : red) norm_inf = max(norm_inf, abs(a));
  const BigFloat threshold = BigFloat(tol, prec) * norm_inf;

  BigFloat radius(1.0, prec);
  {
    BigFloat lead = abs(red[m]);
    BigFloat mx(prec);
    for (std::size_t i = 0; i < m; ++i) mx = max(mx, abs(red[i]) / lead);
    radius += mx;
  }
  const int max_iter = 200 + 20 * static_cast<int>(m);
  auto circle_start = [&] {
    std::vector<PrecComplex> out;
    const BigFloat two_pi = BigFloat(2.0, prec) * BigFloat::pi(prec);
    for (std::size_t k = 0; k < m; ++k) {
      BigFloat angle =
          two_pi * BigFloat(static_cast<double>(k) / static_cast<double>(m), prec) + BigFloat(0.4, prec);
      out.emplace_back(radius * cos(angle), radius * sin(angle));
    }
    return out;
  };
  // Double-precision companion eigenvalues make a close start for small
  // degrees; the circle start is the fallback.
  std::vector<PrecComplex> z;
  bool seeded = false;
  if (m <= 64) {
    auto eig = companion_eigenvalues(red);
    seeded = std::all_of(eig.begin(), eig.end(), [](std::complex<double> e) {
      return std::isfinite(e.real()) && std::isfinite(e.imag());
    });
    if (seeded)
      for (auto e : eig) z.emplace_back(e, prec);
  }
  if (!seeded || !aberth(red, z, threshold, prec, max_iter)) {
    z = circle_start();
    if (!aberth(red, z, threshold, prec, max_iter))
      throw Error(ErrorKind::NonConvergence, "root finder hit its iteration cap at " +
                                                 std::to_string(prec.bits) + " bits; raise precision");
  }
  for (auto& r : z) roots.push_back(std::move(r));
  return roots;
}

std::vector<PrecComplex> poly_roots(const IntPolynomial& p, double tol, Precision prec) {
  if (p.degree() < 1) throw Error(ErrorKind::InvalidArgument, "poly_roots needs degree >= 1");
  std::vector<PrecComplex> c;
  c.reserve(p.coeffs().size());
  for (const auto& a : p.coeffs()) c.emplace_back(BigFloat(a, prec), BigFloat(prec));
  return poly_roots(std::span<const PrecComplex>(c), tol, prec);
}

// ---------------------------------------------------------------------------
// Resultants and exact linear algebra

BigInt determinant(const IntMatrix& m0) {
  if (m0.rows() != m0.cols()) throw Error(ErrorKind::InvalidArgument, "determinant of non-square matrix");
  const std::size_t n = m0.rows();
  if (n == 0) return 1;
  IntMatrix m = m0;
  BigInt prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && m(p, k) == 0) ++p;
      if (p == n) return 0;
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j)) / prev;
      m(i, k) = 0;
    }
    prev = m(k, k);
  }
  return sign * m(n - 1, n - 1);
}

Rational determinant(const RationalMatrix& m0) {
  if (m0.rows() != m0.cols()) throw Error(ErrorKind::InvalidArgument, "determinant of non-square matrix");
  const std::size_t n = m0.rows();
  RationalMatrix m = m0;
  Rational det = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    while (p < n && m(p, k) == 0) ++p;
    if (p == n) return 0;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
      det = -det;
    }
    det *= m(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      if (m(i, k) == 0) continue;
      Rational f = m(i, k) / m(k, k);
      for (std::size_t j = k; j < n; ++j) m(i, j) -= f * m(k, j);
    }
  }
  return det;
}

RationalMatrix inverse(const RationalMatrix& m0) {
  if (m0.rows() != m0.cols()) throw Error(ErrorKind::InvalidArgument, "inverse of non-square matrix");
  const std::size_t n = m0.rows();
  RationalMatrix m = m0;
  RationalMatrix inv = RationalMatrix::identity(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    while (p < n && m(p, k) == 0) ++p;
    if (p == n) throw Error(ErrorKind::InvalidArgument, "singular matrix");
    if (p != k)
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(m(k, j), m(p, j));
        std::swap(inv(k, j), inv(p, j));
      }
    Rational piv = m(k, k);
    for (std::size_t j = 0; j < n; ++j) {
      m(k, j) /= piv;
      inv(k, j) /= piv;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k || m(i, k) == 0) continue;
      Rational f = m(i, k);
      for (std::size_t j = 0; j < n; ++j) {
        m(i, j) -= f * m(k, j);
        inv(i, j) -= f * inv(k, j);
      }
    }
  }
  return inv;
}

RationalMatrix to_rational(const IntMatrix& m) {
  RationalMatrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = Rational(m(i, j));
  return r;
}

BigInt sylvester_resultant(std::span<const BigInt> f, std::span<const BigInt> g) {
  if (f.empty() || g.empty()) throw Error(ErrorKind::InvalidArgument, "resultant of empty coefficient list");
  const std::size_t m = f.size() - 1;
  const std::size_t n = g.size() - 1;
  const std::size_t size = m + n;
  if (size == 0) return 1;
  IntMatrix s(size, size);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i <= m; ++i) s(r, r + i) = f[m - i];
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t i = 0; i <= n; ++i) s(n + r, r + i) = g[n - i];
  return determinant(s);
}

BigInt resultant(const IntPolynomial& f, const IntPolynomial& g) {
  if (f.is_zero() || g.is_zero()) throw Error(ErrorKind::InvalidArgument, "resultant needs nonzero polynomials");
  return sylvester_resultant(f.coeffs(), g.coeffs());
}

// ---------------------------------------------------------------------------
// Cyclotomic helpers

long long euler_phi(long long m) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "euler_phi needs m >= 1");
  long long result = m;
  for (long long p = 2; p * p <= m; ++p) {
    if (m % p == 0) {
      while (m % p == 0) m /= p;
      result -= result / p;
    }
  }
  if (m > 1) result -= result / m;
  return result;
}

int mobius(long long m) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "mobius needs m >= 1");
  int mu = 1;
  for (long long p = 2; p * p <= m; ++p) {
    if (m % p == 0) {
      m /= p;
      if (m % p == 0) return 0;
      mu = -mu;
    }
  }
  if (m > 1) mu = -mu;
  return mu;
}

IntPolynomial cyclotomic_polynomial(long long m) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "cyclotomic order must be >= 1");
  IntPolynomial num = IntPolynomial::from_ints({1});
  IntPolynomial den = IntPolynomial::from_ints({1});
  for (long long d = 1; d <= m; ++d) {
    if (m % d != 0) continue;
    int mu = mobius(m / d);
    if (mu == 0) continue;
    IntPolynomial f = IntPolynomial::monomial(1, static_cast<int>(d)) - IntPolynomial::from_ints({1});
    if (mu > 0) num = num * f;
    else den = den * f;
  }
  return exact_divide(num, den);
}

}  // namespace arakelov
