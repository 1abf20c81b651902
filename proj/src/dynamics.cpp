#include "arakelov/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

namespace arakelov::dynamics {

using heights::RationalProjectivePoint;

namespace {

BigInt eval_binary(const std::vector<BigInt>& f, const BigInt& x0, const BigInt& x1) {
  const std::size_t q = f.size() - 1;
  std::vector<BigInt> p0(q + 1), p1(q + 1);
  p0[0] = 1;
  p1[0] = 1;
  for (std::size_t k = 1; k <= q; ++k) {
    p0[k] = p0[k - 1] * x0;
    p1[k] = p1[k - 1] * x1;
  }
  BigInt acc = 0;
  for (std::size_t k = 0; k <= q; ++k)
    if (f[k] != 0) acc += f[k] * p0[q - k] * p1[k];
  return acc;
}

BigInt eval_binary_mod(const std::vector<BigInt>& f, const BigInt& x0, const BigInt& x1, const BigInt& m) {
  const std::size_t q = f.size() - 1;
  std::vector<BigInt> p0(q + 1), p1(q + 1);
  p0[0] = 1;
  p1[0] = 1;
  for (std::size_t k = 1; k <= q; ++k) {
    p0[k] = p0[k - 1] * x0 % m;
    p1[k] = p1[k - 1] * x1 % m;
  }
  BigInt acc = 0;
  for (std::size_t k = 0; k <= q; ++k)
    if (f[k] != 0) acc = (acc + f[k] * p0[q - k] % m * p1[k]) % m;
  if (acc < 0) acc += m;
  return acc;
}

BigFloat eval_binary(const std::vector<BigInt>& f, const BigFloat& x0, const BigFloat& x1, Precision prec) {
  const std::size_t q = f.size() - 1;
  std::vector<BigFloat> p0(q + 1, BigFloat(1.0, prec)), p1(q + 1, BigFloat(1.0, prec));
  for (std::size_t k = 1; k <= q; ++k) {
    p0[k] = p0[k - 1] * x0;
    p1[k] = p1[k - 1] * x1;
  }
  BigFloat acc(prec);
  for (std::size_t k = 0; k <= q; ++k)
    if (f[k] != 0) acc += BigFloat(f[k], prec) * p0[q - k] * p1[k];
  return acc;
}

std::size_t bits_of(const BigInt& v) {
  return v == 0 ? 0 : mpz_sizeinbase(v.backend().data(), 2);
}

bool is_binary_power_map(const std::vector<std::vector<BigInt>>& f) {
  const std::size_t q = f[0].size() - 1;
  for (std::size_t k = 0; k <= q; ++k) {
    if (f[0][k] != (k == 0 ? 1 : 0)) return false;
    if (f[1][k] != (k == q ? 1 : 0)) return false;
  }
  return true;
}

// Integer forms a_j, b_j of degree q-1 with R x_j^(2q-1) = a_j f0 + b_j f1,
// returned as max_j (|a_j|_1 + |b_j|_1).
BigInt bezout_cofactor_norm(const std::vector<std::vector<BigInt>>& f, const BigInt& res) {
  const std::size_t q = f[0].size() - 1;
  const std::size_t n = 2 * q;
  RationalMatrix a(n, n);
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t k = 0; k <= q; ++k) {
      a(i + k, i) = f[0][k];
      a(i + k, q + i) = f[1][k];
    }
  RationalMatrix inv = inverse(a);
  BigInt best = 0;
  for (std::size_t target : {std::size_t{0}, n - 1}) {
    BigInt norm = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Rational v = inv(i, target) * res;
      if (denominator(v) != 1) throw Error(ErrorKind::NonConvergence, "Bezout cofactor is not integral");
      norm += abs(numerator(v));
    }
    best = std::max(best, norm);
  }
  return best;
}

std::string coeff_string(const nlohmann::json& e) {
  return e.is_string() ? e.get<std::string>() : e.dump();
}

}  // namespace

Endomorphism Endomorphism::validate(int n, const std::vector<Form>& forms) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "dimension n must be >= 1");
  if (forms.size() != static_cast<std::size_t>(n) + 1)
    throw Error(ErrorKind::InvalidArgument, "need n + 1 forms");
  int q = -1;
  std::vector<std::map<std::vector<int>, BigInt>> combined(forms.size());
  for (std::size_t i = 0; i < forms.size(); ++i) {
    for (const auto& t : forms[i]) {
      if (t.exponents.size() != static_cast<std::size_t>(n) + 1)
        throw Error(ErrorKind::InvalidArgument, "monomial exponent vector must have length n + 1");
      int deg = 0;
      for (int e : t.exponents) {
        if (e < 0) throw Error(ErrorKind::InvalidArgument, "negative exponent");
        deg += e;
      }
      if (t.coeff == 0) continue;
      if (q < 0) q = deg;
      if (deg != q) throw Error(ErrorKind::InvalidArgument, "forms must be homogeneous of a common degree");
      combined[i][t.exponents] += t.coeff;
    }
  }
  for (auto& c : combined) std::erase_if(c, [](const auto& kv) { return kv.second == 0; });
  for (const auto& c : combined)
    if (c.empty()) throw Error(ErrorKind::DegenerateMap, "a zero form has common zeros with the others");
  if (q < 2) throw Error(ErrorKind::InvalidArgument, "degree q must be >= 2");

  if (n == 1) {
    std::vector<std::vector<BigInt>> dense(2, std::vector<BigInt>(static_cast<std::size_t>(q) + 1));
    for (std::size_t i = 0; i < 2; ++i)
      for (const auto& [e, c] : combined[i]) dense[i][static_cast<std::size_t>(e[1])] = c;
    return binary(std::move(dense));
  }
  for (std::size_t i = 0; i < combined.size(); ++i) {
    std::vector<int> want(static_cast<std::size_t>(n) + 1, 0);
    want[i] = q;
    if (combined[i].size() != 1 || combined[i].begin()->first != want || combined[i].begin()->second != 1)
      throw Error(ErrorKind::UnsupportedShape, "only power maps are supported for n > 1");
  }
  return power_map(n, q);
}

Endomorphism Endomorphism::binary(std::vector<std::vector<BigInt>> forms) {
  if (forms.size() != 2 || forms[0].size() != forms[1].size())
    throw Error(ErrorKind::InvalidArgument, "binary map needs two coefficient lists of equal length");
  if (forms[0].size() < 3) throw Error(ErrorKind::InvalidArgument, "degree q must be >= 2");
  Endomorphism e;
  e.n_ = 1;
  e.q_ = static_cast<int>(forms[0].size()) - 1;
  e.resultant_ = sylvester_resultant(forms[0], forms[1]);
  if (e.resultant_ == 0) throw Error(ErrorKind::DegenerateMap, "forms have a common zero (resultant 0)");
  e.kind_ = is_binary_power_map(forms) ? Kind::PowerMap : Kind::General;
  e.binary_ = std::move(forms);
  return e;
}

Endomorphism Endomorphism::power_map(int n, int q) {
  if (n < 1 || q < 2) throw Error(ErrorKind::InvalidArgument, "power map needs n >= 1 and q >= 2");
  Endomorphism e;
  e.n_ = n;
  e.q_ = q;
  e.kind_ = Kind::PowerMap;
  e.resultant_ = 1;
  if (n == 1) {
    e.binary_.assign(2, std::vector<BigInt>(static_cast<std::size_t>(q) + 1));
    e.binary_[0][0] = 1;
    e.binary_[1][static_cast<std::size_t>(q)] = 1;
  }
  return e;
}

std::vector<BigInt> Endomorphism::apply(const std::vector<BigInt>& x) const {
  if (x.size() != static_cast<std::size_t>(n_) + 1) throw Error(ErrorKind::InvalidArgument, "point dimension mismatch");
  std::vector<BigInt> out(x.size());
  if (kind_ == Kind::PowerMap) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = boost::multiprecision::pow(x[i], static_cast<unsigned>(q_));
    return out;
  }
  out[0] = eval_binary(binary_[0], x[0], x[1]);
  out[1] = eval_binary(binary_[1], x[0], x[1]);
  return out;
}

RationalProjectivePoint Endomorphism::apply(const RationalProjectivePoint& x) const {
  return RationalProjectivePoint::make(apply(x.coords()));
}

TransformBound height_transform_bounds(const Endomorphism& phi) {
  TransformBound b;
  if (phi.kind() == Endomorphism::Kind::PowerMap) return b;
  if (phi.n() != 1) throw Error(ErrorKind::UnsupportedShape, "transform bound needs n = 1");
  BigInt best = 0;
  for (const auto& f : phi.binary_forms()) {
    BigInt s = 0;
    for (const auto& c : f) s += abs(c);
    best = std::max(best, s);
  }
  b.upper = std::log(static_cast<double>(phi.q()) + 1.0) + log_abs(best);
  b.lower = std::max(0.0, log_abs(bezout_cofactor_norm(phi.binary_forms(), phi.resultant())));
  b.value = std::max(b.upper, b.lower);
  return b;
}

double height_transform_bound(const Endomorphism& phi) { return height_transform_bounds(phi).value; }

int tate_iterations(double c, int q, double eps) {
  if (!(eps > 0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  if (c <= 0) return 0;
  double n = std::ceil(std::log(c / (eps * (q - 1))) / std::log(static_cast<double>(q)));
  return std::max(0, static_cast<int>(n));
}

TateEstimate tate_iterate(const Endomorphism& phi, const RationalProjectivePoint& x, int iterations,
                          const OrbitOptions& opts) {
  if (x.dimension() != phi.n()) throw Error(ErrorKind::InvalidArgument, "point dimension does not match map");
  if (iterations < 0) throw Error(ErrorKind::InvalidArgument, "iteration count must be nonnegative");
  const double c = height_transform_bound(phi);
  const int q = phi.q();
  TateEstimate est;
  est.transform_constant = c;
  if (phi.kind() == Endomorphism::Kind::PowerMap) {
    est.value = heights::naive_height_rational(x);
    est.iterations = iterations;
    return est;
  }
  auto bound_at = [&](int k) { return c * std::pow(static_cast<double>(q), -k) / (q - 1); };

  BigInt x0 = x.coords()[0], x1 = x.coords()[1];
  int step = 0;
  for (; step < iterations; ++step) {
    if (std::max(bits_of(x0), bits_of(x1)) > opts.exact_bits) break;
    BigInt f0 = eval_binary(phi.binary_forms()[0], x0, x1);
    BigInt f1 = eval_binary(phi.binary_forms()[1], x0, x1);
    BigInt g = gcd(f0, f1);
    x0 = f0 / g;
    x1 = f1 / g;
  }
  if (step == iterations) {
    BigInt m = std::max(BigInt(abs(x0)), BigInt(abs(x1)));
    est.value = (m == 1 ? 0.0 : log_abs(m)) / std::pow(static_cast<double>(q), iterations);
    est.iterations = iterations;
    est.error_bound = bound_at(iterations);
    return est;
  }

  // Hybrid phase: normalized floats carry the size, residues modulo a power
  // of the resultant carry the exact gcd at every step.
  const Precision prec = opts.prec;
  const int remaining = iterations - step;
  const BigInt r = abs(phi.resultant());
  const std::size_t mod_bits = bits_of(r) * static_cast<std::size_t>(remaining + 1);
  if (mod_bits > opts.residue_bits_budget) {
    BigInt m = std::max(BigInt(abs(x0)), BigInt(abs(x1)));
    TateEstimate partial{log_abs(m) / std::pow(static_cast<double>(q), step), bound_at(step), step, c};
    throw OrbitOverflow("orbit residues exceed the memory budget", partial);
  }
  BigInt modulus = boost::multiprecision::pow(r, static_cast<unsigned>(remaining + 1));
  BigInt r0 = x0 % modulus, r1 = x1 % modulus;
  if (r0 < 0) r0 += modulus;
  if (r1 < 0) r1 += modulus;
  BigFloat u(x0, prec), v(x1, prec);
  BigFloat scale = max(abs(u), abs(v));
  BigFloat log_size = log(scale);
  u /= scale;
  v /= scale;
  BigFloat qf(static_cast<double>(q), prec);
  for (; step < iterations; ++step) {
    BigInt g = 1;
    if (r != 1) {
      BigInt f0 = eval_binary_mod(phi.binary_forms()[0], r0, r1, modulus);
      BigInt f1 = eval_binary_mod(phi.binary_forms()[1], r0, r1, modulus);
      g = gcd(gcd(f0, f1), modulus);
      modulus /= g;
      r0 = (f0 / g) % modulus;
      r1 = (f1 / g) % modulus;
    }
    BigFloat f0 = eval_binary(phi.binary_forms()[0], u, v, prec);
    BigFloat f1 = eval_binary(phi.binary_forms()[1], u, v, prec);
    BigFloat m = max(abs(f0), abs(f1));
    log_size = log_size * qf + log(m);
    if (g != 1) log_size -= BigFloat(log_abs(g), prec);
    u = f0 / m;
    v = f1 / m;
  }
  BigFloat denom(std::pow(static_cast<double>(q), iterations), prec);
  est.value = (log_size / denom).to_double();
  est.iterations = iterations;
  est.error_bound = bound_at(iterations);
  return est;
}

TateEstimate canonical_height(const Endomorphism& phi, const heights::Point& x, double eps,
                              const OrbitOptions& opts) {
  if (!(eps > 0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  const bool power = phi.kind() == Endomorphism::Kind::PowerMap;
  if (const auto* r = std::get_if<RationalProjectivePoint>(&x)) {
    if (power) return tate_iterate(phi, *r, 0, opts);
    const int n = tate_iterations(height_transform_bound(phi), phi.q(), eps);
    if (n > opts.max_iterations) throw Error(ErrorKind::InvalidArgument, "epsilon requires too many iterations");
    return tate_iterate(phi, *r, n, opts);
  }
  if (!power) throw Error(ErrorKind::UnsupportedShape, "non-rational points need a power map");
  TateEstimate est;
  if (const auto* a = std::get_if<heights::AlgebraicP1Point>(&x)) {
    if (phi.n() != 1) throw Error(ErrorKind::InvalidArgument, "point dimension does not match map");
    est.value = heights::naive_height_minpoly(*a, 1e-30, opts.prec);
    return est;
  }
  const auto& c = std::get<heights::CyclotomicTorusPoint>(x);
  if (static_cast<int>(c.exponents.size()) != phi.n())
    throw Error(ErrorKind::InvalidArgument, "point dimension does not match map");
  est.value = heights::height_cyclotomic(c);
  return est;
}

bool is_preperiodic(const Endomorphism& phi, const RationalProjectivePoint& x) {
  if (x.dimension() != phi.n()) throw Error(ErrorKind::InvalidArgument, "point dimension does not match map");
  const double c = height_transform_bound(phi);
  // Orbit points of a preperiodic x have height <= C/(q-1).
  const double cutoff = heights::naive_height_rational(x) + 2 * c / (phi.q() - 1) + 1;
  std::set<std::vector<BigInt>> seen;
  RationalProjectivePoint y = x;
  while (true) {
    if (!seen.insert(y.coords()).second) return true;
    if (heights::naive_height_rational(y) > cutoff) return false;
    y = phi.apply(y);
  }
}

std::mt19937_64 seeded_engine(std::uint64_t seed) {
  // splitmix64 finalizer decorrelates nearby seeds
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return std::mt19937_64(z);
}

CanonicalMeasureSample brolin_sample(const Endomorphism& phi, std::size_t count, int burn_in, std::uint64_t seed,
                                     Precision prec) {
  if (phi.n() != 1) throw Error(ErrorKind::UnsupportedShape, "sampling needs n = 1");
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "count must be >= 1");
  if (burn_in < 0) throw Error(ErrorKind::InvalidArgument, "burn-in must be nonnegative");
  const int q = phi.q();
  const auto& f = phi.binary_forms();
  auto rng = seeded_engine(seed);
  std::uniform_int_distribution<int> pick(0, q - 1);
  const double tol = std::max(1e-300, std::ldexp(1.0, -static_cast<int>(prec.bits) + 24));

  PrecComplex z(BigFloat(2.0, prec), BigFloat(prec));
  bool inf = false;
  CanonicalMeasureSample out;
  out.seed = seed;
  out.generations = burn_in;
  out.points.reserve(count);
  out.at_infinity.reserve(count);

  const BigFloat zero(prec);
  for (std::size_t step = 0; step < static_cast<std::size_t>(burn_in) + count; ++step) {
    // preimages of z: roots of f1(1, y) - z f0(1, y) (or f0(1, y) when z = inf)
    std::vector<PrecComplex> coeffs;
    for (std::size_t k = 0; k <= static_cast<std::size_t>(q); ++k) {
      if (inf) {
        coeffs.emplace_back(BigFloat(f[0][k], prec), zero);
      } else {
        PrecComplex a(BigFloat(f[1][k], prec), zero);
        if (f[0][k] != 0) a -= PrecComplex(BigFloat(f[0][k], prec), zero) * z;
        coeffs.push_back(std::move(a));
      }
    }
    while (!coeffs.empty() && coeffs.back().re.is_zero() && coeffs.back().im.is_zero()) coeffs.pop_back();
    const int finite = static_cast<int>(coeffs.size()) - 1;
    const int choice = pick(rng);
    if (choice < finite) {
      auto roots = poly_roots(std::span<const PrecComplex>(coeffs), tol, prec);
      z = roots[static_cast<std::size_t>(choice)];
      inf = false;
    } else {
      inf = true;
    }
    if (step >= static_cast<std::size_t>(burn_in)) {
      out.points.push_back(inf ? PrecComplex(prec) : z);
      out.at_infinity.push_back(inf);
    }
  }
  out.weights.assign(count, 1.0 / static_cast<double>(count));
  return out;
}

Endomorphism endomorphism_from_json(const nlohmann::json& j) {
  try {
    const int n = j.value("n", 1);
    if (j.value("kind", std::string()) == "power") return Endomorphism::power_map(n, j.at("q").get<int>());
    const auto& forms = j.at("forms");
    Endomorphism out;
    if (n == 1 && !forms.empty() && forms[0].is_array() && (forms[0].empty() || !forms[0][0].is_object())) {
      std::vector<std::vector<BigInt>> dense;
      for (const auto& f : forms) {
        std::vector<BigInt> row;
        for (const auto& e : f) row.emplace_back(coeff_string(e));
        dense.push_back(std::move(row));
      }
      out = Endomorphism::binary(std::move(dense));
    } else {
      std::vector<Form> sparse;
      for (const auto& f : forms) {
        Form form;
        for (const auto& t : f)
          form.push_back(Term{BigInt(coeff_string(t.at("coeff"))), t.at("exp").get<std::vector<int>>()});
        sparse.push_back(std::move(form));
      }
      out = Endomorphism::validate(n, sparse);
    }
    if (j.contains("q") && j.at("q").get<int>() != out.q())
      throw Error(ErrorKind::InvalidArgument, "declared q does not match the forms");
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed endomorphism JSON: ") + e.what());
  }
}

nlohmann::json to_json(const Endomorphism& phi) {
  nlohmann::json j = {{"n", phi.n()}, {"q", phi.q()}};
  if (phi.kind() == Endomorphism::Kind::PowerMap && phi.n() > 1) {
    j["kind"] = "power";
    return j;
  }
  nlohmann::json forms = nlohmann::json::array();
  for (const auto& f : phi.binary_forms()) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& c : f) row.push_back(c.convert_to<long long>());
    forms.push_back(std::move(row));
  }
  j["forms"] = std::move(forms);
  j["kind"] = phi.kind() == Endomorphism::Kind::PowerMap ? "power" : "general";
  j["resultant"] = phi.resultant().str();
  return j;
}

}  // namespace arakelov::dynamics
