#include "arakelov/heights.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace arakelov::heights {

namespace {

BigInt round_to_int(const BigFloat& x) {
  BigInt out;
  mpfr_get_z(out.backend().data(), x.get(), MPFR_RNDN);
  return out;
}

bool is_probable_prime(const BigInt& n) {
  return mpz_probab_prime_p(n.backend().data(), 30) > 0;
}

BigInt pollard_rho(const BigInt& n) {
  if (n % 2 == 0) return 2;
  for (BigInt c = 1;; ++c) {
    BigInt x = 2, y = 2, d = 1;
    auto f = [&](const BigInt& v) { return BigInt((v * v + c) % n); };
    while (d == 1) {
      x = f(x);
      y = f(f(y));
      d = gcd(BigInt(abs(x - y)), n);
    }
    if (d != n) return d;
  }
}

void split(const BigInt& n, std::vector<BigInt>& primes) {
  if (n == 1) return;
  if (is_probable_prime(n)) {
    primes.push_back(n);
    return;
  }
  BigInt d = pollard_rho(n);
  split(d, primes);
  split(n / d, primes);
}

std::vector<BigInt> parse_int_list(const nlohmann::json& arr) {
  std::vector<BigInt> out;
  for (const auto& e : arr) out.push_back(e.is_string() ? BigInt(e.get<std::string>()) : BigInt(e.get<long long>()));
  return out;
}

nlohmann::json int_to_json(const BigInt& v) {
  if (abs(v) < BigInt(1) << 62) return v.convert_to<long long>();
  return v.str();
}

// Search for a factor of degree k <= d/2 among products over root subsets.
// Returns true if a factor was found; sets exhaustive when every subset was tried.
bool find_factor(const IntPolynomial& p, std::size_t budget, bool& exhaustive) {
  const int d = p.degree();
  const unsigned bits = 256 + 8u * static_cast<unsigned>(d) + 2u * static_cast<unsigned>(mpz_sizeinbase(p.max_abs_coeff().backend().data(), 2));
  Precision prec{bits};
  double tol = std::max(1e-300, std::ldexp(1.0, -static_cast<int>(std::min(bits - 32, 990u))));
  auto roots = poly_roots(p, tol, prec);
  BigFloat lead(p.leading(), prec);
  std::size_t tried = 0;
  exhaustive = true;
  for (int k = 1; k <= d / 2; ++k) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      if (++tried > budget) {
        exhaustive = false;
        return false;
      }
      std::vector<PrecComplex> prod{PrecComplex(lead, BigFloat(prec))};
      for (int i : idx) {
        const auto& r = roots[static_cast<std::size_t>(i)];
        std::vector<PrecComplex> next(prod.size() + 1, PrecComplex(prec));
        for (std::size_t j = 0; j < prod.size(); ++j) {
          next[j + 1] += prod[j];
          next[j] -= prod[j] * r;
        }
        prod = std::move(next);
      }
      bool integral = true;
      std::vector<BigInt> coeffs;
      for (const auto& c : prod) {
        BigInt n = round_to_int(c.re);
        BigFloat dist = abs(c.re - BigFloat(n, prec));
        if (abs(c.im).to_double() > 1e-3 || dist.to_double() > 1e-3) {
          integral = false;
          break;
        }
        coeffs.push_back(n);
      }
      if (integral) {
        IntPolynomial g = IntPolynomial(coeffs).primitive_part();
        if (g.degree() == k) {
          try {
            exact_divide(p, g);
            return true;
          } catch (const Error&) {
          }
        }
      }
      // next combination
      int pos = k - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == d - k + pos) --pos;
      if (pos < 0) break;
      ++idx[static_cast<std::size_t>(pos)];
      for (int i = pos + 1; i < k; ++i) idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
    }
  }
  return false;
}

}  // namespace

RationalProjectivePoint RationalProjectivePoint::make(std::vector<BigInt> coords) {
  if (coords.empty()) throw Error(ErrorKind::InvalidArgument, "point needs at least one coordinate");
  BigInt g = 0;
  for (const auto& c : coords) g = gcd(g, c);
  if (g == 0) throw Error(ErrorKind::InvalidArgument, "projective point cannot be all zero");
  auto first = std::find_if(coords.begin(), coords.end(), [](const BigInt& c) { return c != 0; });
  if (*first < 0) g = -g;
  for (auto& c : coords) c /= g;
  return RationalProjectivePoint(std::move(coords));
}

RationalProjectivePoint RationalProjectivePoint::from_rationals(const std::vector<Rational>& coords) {
  BigInt l = 1;
  for (const auto& c : coords) {
    BigInt den = denominator(c);
    l = l / gcd(l, den) * den;
  }
  std::vector<BigInt> out;
  for (const auto& c : coords) out.push_back(BigInt(numerator(c)) * (l / BigInt(denominator(c))));
  return make(std::move(out));
}

AlgebraicP1Point AlgebraicP1Point::from_minpoly(IntPolynomial minpoly, std::size_t subset_budget) {
  if (minpoly.degree() < 1) throw Error(ErrorKind::InvalidArgument, "minimal polynomial must be nonconstant");
  IntPolynomial p = minpoly.primitive_part();
  if (p.leading() < 0) p = IntPolynomial() - p;
  if (!is_squarefree(p)) throw Error(ErrorKind::InvalidArgument, "minimal polynomial is not squarefree");
  AlgebraicP1Point out;
  out.minpoly_ = p;
  if (p.degree() > 1 && !is_cyclotomic(p)) {
    bool exhaustive = true;
    if (find_factor(p, subset_budget, exhaustive))
      throw Error(ErrorKind::InvalidArgument, "polynomial " + p.to_string() + " is reducible");
    out.status_ = exhaustive ? Irreducibility::Certified : Irreducibility::AssumedIrreducible;
  }
  return out;
}

AlgebraicP1Point AlgebraicP1Point::infinity() {
  AlgebraicP1Point out;
  out.infinity_ = true;
  return out;
}

CyclotomicTorusPoint CyclotomicTorusPoint::make(long long m, std::vector<long long> exponents) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "order m must be >= 1");
  for (auto& e : exponents) e = ((e % m) + m) % m;
  return CyclotomicTorusPoint{m, std::move(exponents)};
}

double naive_height_rational(const RationalProjectivePoint& x) {
  BigInt best = 0;
  for (const auto& c : x.coords()) best = std::max(best, BigInt(abs(c)));
  return best == 1 ? 0.0 : log_abs(best);
}

bool is_cyclotomic(const IntPolynomial& p) {
  const int d = p.degree();
  if (d < 1 || abs(p.leading()) != 1) return false;
  IntPolynomial q = p.leading() < 0 ? IntPolynomial() - p : p;
  // phi(m) >= sqrt(m / 2) bounds the search
  const long long limit = 2LL * d * d + 2;
  for (long long m = 1; m <= limit; ++m)
    if (euler_phi(m) == d && cyclotomic_polynomial(m) == q) return true;
  return false;
}

double naive_height_minpoly(const AlgebraicP1Point& x, double tol, Precision prec) {
  if (x.is_infinity()) return 0.0;
  const IntPolynomial& p = x.minpoly();
  if (p.degree() == 1 && p[0] == 0) return 0.0;
  if (is_cyclotomic(p)) return 0.0;
  auto roots = poly_roots(p, tol, prec);
  BigFloat acc(log_abs(p.leading()), prec);
  BigFloat one(1.0, prec);
  for (const auto& r : roots) {
    BigFloat a = abs(r);
    if (a > one) acc += log(a);
  }
  return acc.to_double() / p.degree();
}

double height_cyclotomic(const CyclotomicTorusPoint&) { return 0.0; }

std::vector<std::pair<BigInt, unsigned>> factor_integer(const BigInt& n) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "cannot factor zero");
  BigInt m = abs(n);
  std::vector<BigInt> primes;
  for (long p = 2; p < 10000 && BigInt(p) * p <= m; p += (p == 2 ? 1 : 2)) {
    while (m % p == 0) {
      primes.emplace_back(p);
      m /= p;
    }
  }
  split(m, primes);
  std::sort(primes.begin(), primes.end());
  std::vector<std::pair<BigInt, unsigned>> out;
  for (const auto& p : primes) {
    if (!out.empty() && out.back().first == p)
      ++out.back().second;
    else
      out.emplace_back(p, 1u);
  }
  return out;
}

std::vector<PlaceTerm> place_terms(const Rational& q) {
  if (q == 0) throw Error(ErrorKind::InvalidArgument, "product formula needs q != 0");
  std::vector<PlaceTerm> out{{BigInt(0), log_abs(q)}};
  auto num = factor_integer(BigInt(numerator(q)));
  auto den = factor_integer(BigInt(denominator(q)));
  for (const auto& [p, e] : num) out.push_back({p, -static_cast<double>(e) * log_abs(p)});
  for (const auto& [p, e] : den) out.push_back({p, static_cast<double>(e) * log_abs(p)});
  return out;
}

double product_formula_check(const Rational& q) {
  if (q == 0) throw Error(ErrorKind::InvalidArgument, "product formula needs q != 0");
  const BigInt num = numerator(q), den = denominator(q);
  double archimedean = log_abs(num) - log_abs(den);
  // Rebuild |num| and den from the p-adic valuations; the finite places sum
  // to -log of the rebuilt values.
  BigInt num_rebuilt = 1, den_rebuilt = 1;
  for (const auto& [p, e] : factor_integer(num)) num_rebuilt *= boost::multiprecision::pow(p, e);
  for (const auto& [p, e] : factor_integer(den)) den_rebuilt *= boost::multiprecision::pow(p, e);
  double finite = -(log_abs(num_rebuilt) - log_abs(den_rebuilt));
  return archimedean + finite;
}

Point point_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "rational") return RationalProjectivePoint::make(parse_int_list(j.at("coords")));
    if (kind == "minpoly") {
      if (j.value("infinity", false)) return AlgebraicP1Point::infinity();
      return AlgebraicP1Point::from_minpoly(IntPolynomial(parse_int_list(j.at("coeffs"))));
    }
    if (kind == "cyclotomic") {
      return CyclotomicTorusPoint::make(j.at("m").get<long long>(), j.at("exp").get<std::vector<long long>>());
    }
    throw Error(ErrorKind::InvalidArgument, "unknown point kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed point JSON: ") + e.what());
  }
}

nlohmann::json to_json(const Point& p) {
  struct Visitor {
    nlohmann::json operator()(const RationalProjectivePoint& x) const {
      nlohmann::json c = nlohmann::json::array();
      for (const auto& v : x.coords()) c.push_back(int_to_json(v));
      return {{"kind", "rational"}, {"coords", c}};
    }
    nlohmann::json operator()(const AlgebraicP1Point& x) const {
      if (x.is_infinity()) return {{"kind", "minpoly"}, {"infinity", true}};
      nlohmann::json c = nlohmann::json::array();
      for (const auto& v : x.minpoly().coeffs()) c.push_back(int_to_json(v));
      return {{"kind", "minpoly"},
              {"coeffs", c},
              {"irreducibility",
               x.irreducibility() == Irreducibility::Certified ? "certified" : "assumed_irreducible"}};
    }
    nlohmann::json operator()(const CyclotomicTorusPoint& x) const {
      return {{"kind", "cyclotomic"}, {"m", x.m}, {"exp", x.exponents}};
    }
  };
  return std::visit(Visitor{}, p);
}

double height(const Point& p, double tol, Precision prec) {
  if (auto r = std::get_if<RationalProjectivePoint>(&p)) return naive_height_rational(*r);
  if (auto a = std::get_if<AlgebraicP1Point>(&p)) return naive_height_minpoly(*a, tol, prec);
  return height_cyclotomic(std::get<CyclotomicTorusPoint>(p));
}

}  // namespace arakelov::heights
