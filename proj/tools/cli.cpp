#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "arakelov/bergman.hpp"
#include "arakelov/dynamics.hpp"
#include "arakelov/equidist.hpp"
#include "arakelov/heights.hpp"
#include "arakelov/lattice.hpp"
#include "json.hpp"

namespace arakelov::cli {

namespace {

using nlohmann::json;

struct Global {
  unsigned precision_bits = 128;
  std::uint64_t seed = 0;
  double tolerance = 1e-8;
  int quadrature_budget = 8192;
  unsigned threads = 1;
  std::string out;
  std::string csv;
};

struct Report {
  json results = json::object();
  json certificates = json::object();
  json checks = json::object();
  std::string csv;
  bool check_failed = false;

  void check(const std::string& name, bool ok, json detail = json::object()) {
    detail["passed"] = ok;
    checks[name] = std::move(detail);
    if (!ok) check_failed = true;
  }
};

// ---- parsing helpers ----

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur.erase(0, cur.find_first_not_of(" \t"));
    cur.erase(cur.find_last_not_of(" \t") + 1);
    out.push_back(cur);
  }
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

[[noreturn]] void bad_field(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::ConfigError, "field --" + field + ": " + what);
}

std::vector<Rational> rational_list(const std::string& field, const std::string& s) {
  std::vector<Rational> out;
  try {
    for (const auto& t : split(s, ',')) out.push_back(parse_rational(t));
  } catch (const std::exception& e) {
    bad_field(field, "cannot parse \"" + s + "\" as rationals (" + e.what() + ")");
  }
  if (out.empty()) bad_field(field, "empty list");
  return out;
}

std::vector<BigInt> integer_list(const std::string& field, const std::string& s) {
  std::vector<BigInt> out;
  for (const auto& r : rational_list(field, s)) {
    if (denominator(r) != 1) bad_field(field, "expected integers, got " + to_string(r));
    out.push_back(numerator(r));
  }
  return out;
}

std::vector<long long> ll_list(const std::string& field, const std::string& s) {
  std::vector<long long> out;
  for (const auto& v : integer_list(field, s)) out.push_back(v.convert_to<long long>());
  return out;
}

std::vector<int> int_list(const std::string& field, const std::string& s) {
  std::vector<int> out;
  for (long long v : ll_list(field, s)) out.push_back(static_cast<int>(v));
  return out;
}

std::vector<double> double_list(const std::string& field, const std::string& s) {
  std::vector<double> out;
  for (const auto& r : rational_list(field, s)) out.push_back(r.convert_to<double>());
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, path + ": " + e.what());
  }
}

json inline_or_file_json(const std::string& field, const std::string& s) {
  if (!s.empty() && s[0] == '@') return read_json_file(s.substr(1));
  try {
    return json::parse(s);
  } catch (const json::parse_error& e) {
    bad_field(field, std::string("invalid JSON: ") + e.what());
  }
}

// "fs", "c=1/2", "t=3", "2*c=1/2+-1*t=3", JSON, or @file.
bergman::HermitianMetric parse_metric(const std::string& field, const std::string& s) {
  if (!s.empty() && (s[0] == '{' || s[0] == '@')) return bergman::metric_from_json(inline_or_file_json(field, s));
  bergman::HermitianMetric h;
  for (const auto& term : split(s, '+')) {
    int e = 1;
    std::string body = term;
    if (auto star = term.find('*'); star != std::string::npos) {
      try {
        e = std::stoi(term.substr(0, star));
      } catch (const std::exception&) {
        bad_field(field, "bad exponent in \"" + term + "\"");
      }
      body = term.substr(star + 1);
    }
    json j;
    if (body == "fs") {
      j = {{"kind", "fs"}};
    } else if (body.rfind("c=", 0) == 0) {
      j = {{"kind", "c"}, {"c", body.substr(2)}};
    } else if (body.rfind("t=", 0) == 0) {
      try {
        j = {{"kind", "t"}, {"t", std::stoi(body.substr(2))}};
      } catch (const std::exception&) {
        bad_field(field, "bad t in \"" + term + "\"");
      }
    } else {
      bad_field(field, "unknown metric term \"" + term + "\"");
    }
    j["exponent"] = e;
    try {
      h += bergman::metric_from_json(j);
    } catch (const Error& err) {
      bad_field(field, err.what());
    }
  }
  return h;
}

bergman::LineMetric single_line_metric(const std::string& field, const bergman::HermitianMetric& h) {
  if (h.terms().size() != 1 || h.terms()[0].second != 1) bad_field(field, "expected a single metric on O(1)");
  return h.terms()[0].first;
}

// Map: "power<q>", explicit dense binary forms "f0;f1" (entry k multiplies
// x0^(q-k) x1^k), or a JSON file via --map-file.
dynamics::Endomorphism parse_map(const std::string& map, const std::string& forms, const std::string& file) {
  const int given = !map.empty() + !forms.empty() + !file.empty();
  if (given != 1) throw Error(ErrorKind::ConfigError, "give exactly one of --map, --forms, --map-file");
  if (!file.empty()) return dynamics::endomorphism_from_json(read_json_file(file));
  if (!forms.empty()) {
    std::vector<std::vector<BigInt>> f;
    for (const auto& part : split(forms, ';')) f.push_back(integer_list("forms", part));
    return dynamics::Endomorphism::binary(std::move(f));
  }
  if (map.rfind("power", 0) == 0) {
    try {
      return dynamics::Endomorphism::power_map(1, std::stoi(map.substr(5)));
    } catch (const std::invalid_argument&) {
    }
  }
  bad_field("map", "expected power<q>, got \"" + map + "\"");
}

std::string point_string(const std::vector<BigInt>& c) {
  std::string s;
  for (const auto& v : c) s += (s.empty() ? "" : ",") + v.str();
  return s;
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

bergman::QuadratureOptions quad(const Global& g) {
  bergman::QuadratureOptions q;
  q.max_nodes = g.quadrature_budget;
  return q;
}

// ---- subcommands ----

struct HeightArgs {
  std::string point, minpoly, exponents, point_file;
  long long cyclotomic = 0;
};

heights::Point parse_point(const HeightArgs& a) {
  const int given = !a.point.empty() + !a.minpoly.empty() + (a.cyclotomic != 0) + !a.point_file.empty();
  if (given != 1) throw Error(ErrorKind::ConfigError, "give exactly one of --point, --minpoly, --cyclotomic, --point-file");
  if (!a.point_file.empty()) return heights::point_from_json(read_json_file(a.point_file));
  if (!a.point.empty()) return heights::RationalProjectivePoint::from_rationals(rational_list("point", a.point));
  if (!a.minpoly.empty()) return heights::AlgebraicP1Point::from_minpoly(IntPolynomial(integer_list("minpoly", a.minpoly)));
  return heights::CyclotomicTorusPoint::make(a.cyclotomic,
                                             a.exponents.empty() ? std::vector<long long>{1} : ll_list("exponents", a.exponents));
}

Report cmd_height(const Global& g, const HeightArgs& a) {
  Report r;
  auto p = parse_point(a);
  r.results["point"] = heights::to_json(p);
  r.results["height"] = heights::height(p, 1e-30, Precision{g.precision_bits});
  if (const auto* alg = std::get_if<heights::AlgebraicP1Point>(&p))
    r.certificates["irreducibility"] =
        alg->irreducibility() == heights::Irreducibility::Certified ? "certified" : "assumed";
  return r;
}

struct MapArgs {
  std::string map, forms, map_file, point;
  double eps = -1;
  int iterations = 10;
};

Report cmd_canonical_height(const Global& g, const MapArgs& a) {
  Report r;
  auto phi = parse_map(a.map, a.forms, a.map_file);
  HeightArgs ha;
  ha.point = a.point;
  auto p = parse_point(ha);
  dynamics::OrbitOptions opts;
  opts.prec = Precision{g.precision_bits};
  const double eps = a.eps > 0 ? a.eps : g.tolerance;
  auto est = dynamics::canonical_height(phi, p, eps, opts);
  r.results["map"] = dynamics::to_json(phi);
  r.results["point"] = heights::to_json(p);
  r.results["value"] = est.value;
  r.results["error_bound"] = est.error_bound;
  r.certificates["iterations"] = est.iterations;
  r.certificates["transform_constant"] = est.transform_constant;
  r.certificates["eps"] = eps;
  return r;
}

Report cmd_orbit(const Global&, const MapArgs& a) {
  Report r;
  auto phi = parse_map(a.map, a.forms, a.map_file);
  if (a.iterations < 0 || a.iterations > 24) bad_field("iterations", "must lie in [0, 24]");
  auto x = heights::RationalProjectivePoint::from_rationals(rational_list("point", a.point));
  json orbit = json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "step,point,naive_height,normalized\n";
  double scale = 1;
  for (int k = 0; k <= a.iterations; ++k) {
    const double h = heights::naive_height_rational(x);
    orbit.push_back({{"step", k}, {"point", point_string(x.coords())}, {"naive_height", h}, {"normalized", h / scale}});
    csv << k << ",\"" << point_string(x.coords()) << "\"," << h << ',' << h / scale << '\n';
    if (k < a.iterations) {
      x = phi.apply(x);
      scale *= phi.q();
    }
  }
  r.results["map"] = dynamics::to_json(phi);
  r.results["orbit"] = orbit;
  r.results["preperiodic"] = dynamics::is_preperiodic(phi, heights::RationalProjectivePoint::from_rationals(
                                                                rational_list("point", a.point)));
  r.csv = csv.str();
  return r;
}

struct BiluArgs {
  std::string orders = "5,101,1009", exponents = "1";
  int cutoff = 8;
  double max_factor = -1;
};

Report cmd_bilu(const Global&, const BiluArgs& a) {
  Report r;
  auto rep = equidist::bilu_experiment(ll_list("orders", a.orders), a.cutoff, ll_list("exponents", a.exponents));
  r.results = equidist::to_json(rep);
  r.csv = equidist::to_csv(rep);
  if (a.max_factor > 0) {
    bool ok = true;
    for (const auto& row : rep.rows) ok = ok && row.discrepancy * row.m <= Rational(a.max_factor);
    r.check("discrepancy_at_most_factor_over_m", ok, {{"factor", a.max_factor}});
  }
  return r;
}

struct BrolinArgs {
  MapArgs map;
  std::size_t samples = 10000;
  int burn_in = 30;
};

Report cmd_brolin(const Global& g, const BrolinArgs& a) {
  Report r;
  auto phi = parse_map(a.map.map, a.map.forms, a.map.map_file);
  auto sample = dynamics::brolin_sample(phi, a.samples, a.burn_in, g.seed, Precision{g.precision_bits});
  std::complex<double> mean = 0;
  double mean_abs = 0, radial = 0;
  std::size_t finite = 0;
  std::vector<equidist::TorusPoint> circle;
  std::ostringstream csv;
  csv.precision(17);
  csv << "re,im,at_infinity\n";
  for (std::size_t i = 0; i < sample.points.size(); ++i) {
    if (sample.at_infinity[i]) {
      csv << ",,1\n";
      continue;
    }
    auto z = sample.points[i].to_complex();
    csv << z.real() << ',' << z.imag() << ",0\n";
    mean += z;
    mean_abs += std::abs(z);
    radial = std::max(radial, std::abs(std::abs(z) - 1));
    circle.push_back({z / std::abs(z)});
    ++finite;
  }
  r.results["map"] = dynamics::to_json(phi);
  r.results["samples"] = sample.points.size();
  r.results["at_infinity"] = sample.points.size() - finite;
  if (finite > 0) {
    mean /= static_cast<double>(finite);
    r.results["mean"] = {mean.real(), mean.imag()};
    r.results["mean_abs"] = mean_abs / static_cast<double>(finite);
    r.results["max_radial_deviation"] = radial;
    if (radial <= equidist::kTorusTolerance)
      r.results["angular_discrepancy"] = equidist::star_discrepancy(equidist::EmpiricalMeasure::uniform(circle));
  }
  r.certificates["seed"] = g.seed;
  r.certificates["generations"] = sample.generations;
  r.csv = csv.str();
  return r;
}

struct OrbitMeasureArgs {
  HeightArgs point;
  int cutoff = 8;
};

Report cmd_galois(const Global& g, const OrbitMeasureArgs& a) {
  Report r;
  auto p = parse_point(a.point);
  equidist::GaloisOrbit orbit;
  if (const auto* alg = std::get_if<heights::AlgebraicP1Point>(&p))
    orbit = equidist::galois_orbit_minpoly(*alg, 1e-30, Precision{g.precision_bits});
  else if (const auto* cyc = std::get_if<heights::CyclotomicTorusPoint>(&p))
    orbit = equidist::galois_orbit_cyclotomic(*cyc);
  else
    throw Error(ErrorKind::ConfigError, "galois orbits need --minpoly or --cyclotomic");
  double max_weyl = 0;
  for (const auto& k : equidist::character_bank(orbit.measure.dimension(), a.cutoff))
    max_weyl = std::max(max_weyl, std::abs(equidist::weyl_sum(orbit.measure, k)));
  r.results["degree"] = orbit.degree;
  r.results["max_weyl"] = max_weyl;
  if (orbit.measure.dimension() == 1) r.results["discrepancy"] = equidist::star_discrepancy(orbit.measure);
  if (orbit.m) {
    Rational best = 0;
    for (const auto& k : equidist::character_bank(orbit.measure.dimension(), a.cutoff))
      best = std::max<Rational>(best, abs(equidist::weyl_sum_exact(orbit, k)));
    r.results["max_weyl_exact"] = to_string(best);
    if (orbit.measure.dimension() == 1) r.results["discrepancy_exact"] = to_string(equidist::star_discrepancy_exact(orbit));
  }
  return r;
}

struct LatticeArgs {
  std::string gram, input, sublattice, generators, c;
  std::string torsion = "1";
};

RationalMatrix parse_matrix(const std::string& field, const std::string& s) {
  auto rows = split(s, ';');
  const auto n = rows.size();
  RationalMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto vals = rational_list(field, rows[i]);
    if (vals.size() != n) bad_field(field, "matrix must be square");
    for (std::size_t j = 0; j < n; ++j) m(i, j) = vals[j];
  }
  return m;
}

Report cmd_lattice(const Global& g, const LatticeArgs& a) {
  Report r;
  if (a.gram.empty() == a.input.empty()) throw Error(ErrorKind::ConfigError, "give exactly one of --gram, --input");
  auto m = a.input.empty() ? lattice::NormedLattice::make(parse_matrix("gram", a.gram), integer_list("torsion", a.torsion)[0])
                           : lattice::lattice_from_json(read_json_file(a.input));
  lattice::EnumerationOptions eo;
  eo.threads = g.threads;
  const int rank = m.rank();
  r.results["lattice"] = lattice::to_json(m);
  r.results["rank"] = rank;
  r.results["chi"] = lattice::chi(m);
  r.results["covolume_invariant"] = to_string(lattice::covolume_invariant(m));
  if (rank > 0) {
    const double defect = lattice::riemann_roch_defect(m, eo);
    r.results["h0_count"] = lattice::h0_count(m, eo).str();
    r.results["h1_count"] = lattice::h1_count(m, eo).str();
    r.results["h0"] = lattice::h0(m, eo);
    r.results["h1"] = lattice::h1(m, eo);
    r.results["defect"] = defect;
    if (rank > 0) r.results["defect_ratio"] = std::abs(defect) / (rank * std::log(rank + 1.0));
  }
  auto columns = [&](const std::string& field, const std::string& s) {
    auto parts = split(s, ';');
    IntMatrix b(static_cast<std::size_t>(rank), parts.size());
    for (std::size_t j = 0; j < parts.size(); ++j) {
      auto v = integer_list(field, parts[j]);
      if (static_cast<int>(v.size()) != rank) bad_field(field, "each vector needs " + std::to_string(rank) + " entries");
      for (int i = 0; i < rank; ++i) b(static_cast<std::size_t>(i), j) = v[static_cast<std::size_t>(i)];
    }
    return b;
  };
  if (!a.sublattice.empty()) {
    auto sq = lattice::induced_sub_quotient(m, lattice::SublatticeEmbedding::make(m, columns("sublattice", a.sublattice)));
    const Rational lhs = lattice::covolume_invariant(m);
    const Rational rhs = lattice::covolume_invariant(sq.sub) * lattice::covolume_invariant(sq.quotient);
    r.results["sub_chi"] = lattice::chi(sq.sub);
    r.results["quotient_chi"] = lattice::chi(sq.quotient);
    r.check("covolume_multiplicative", lhs == rhs, {{"ambient", to_string(lhs)}, {"product", to_string(rhs)}});
  }
  if (!a.generators.empty()) {
    if (a.c.empty()) throw Error(ErrorKind::ConfigError, "--generators needs --c");
    auto b = columns("generators", a.generators);
    std::vector<std::vector<BigInt>> gens;
    for (std::size_t j = 0; j < b.cols(); ++j) {
      std::vector<BigInt> v;
      for (std::size_t i = 0; i < b.rows(); ++i) v.push_back(b(i, j));
      gens.push_back(std::move(v));
    }
    auto gb = lattice::generator_bound_check(m, parse_rational(a.c), gens);
    r.results["generator_bound_slack"] = gb.slack;
    r.check("generator_bound", gb.holds, {{"slack", gb.slack}});
  }
  return r;
}

struct BergmanArgs {
  std::string metric = "fs", measure, twist, section = "1,0", l = "2*c=1", m = "c=1/2";
  int n = 10, j = 5, k = 5, radial = 64, angular = 1, trials = 200;
  double kconst = 5.0;
};

std::string profile_csv(const bergman::DistortionProfile& p) {
  std::ostringstream csv;
  csv.precision(17);
  csv << "chart,re,im,b\n";
  for (const auto& pt : p.points)
    csv << (pt.chart_inf ? "inf" : "0") << ',' << pt.coord.real() << ',' << pt.coord.imag() << ',' << pt.value << '\n';
  return csv.str();
}

Report cmd_bergman_gram(const Global& g, const BergmanArgs& a) {
  Report r;
  auto metric = parse_metric("metric", a.metric);
  auto mu = bergman::CurvatureMeasure::of(a.measure.empty() ? metric : parse_metric("measure", a.measure));
  auto weight = metric.scaled(a.n);
  auto gram = bergman::l2_gram(weight, mu, quad(g));
  std::vector<double> diag(gram.gram.rows());
  for (Eigen::Index i = 0; i < gram.gram.rows(); ++i) diag[static_cast<std::size_t>(i)] = gram.gram(i, i);
  r.results["weight"] = bergman::to_json(weight);
  r.results["diagonal"] = diag;
  r.results["log_det"] = bergman::log_det(gram);
  r.certificates["nodes"] = gram.certificate.nodes;
  r.certificates["error_estimate"] = gram.certificate.error_estimate;
  return r;
}

Report cmd_bergman_distortion(const Global& g, const BergmanArgs& a) {
  Report r;
  auto metric = parse_metric("metric", a.metric);
  auto weight = metric.scaled(a.n);
  if (!a.twist.empty()) weight += parse_metric("twist", a.twist);
  auto mu = bergman::CurvatureMeasure::of(a.measure.empty() ? metric : parse_metric("measure", a.measure));
  auto gram = bergman::l2_gram(weight, mu, quad(g));
  bergman::DistortionGrid grid;
  grid.radial = a.radial;
  grid.angular = a.angular;
  auto prof = bergman::distortion(gram, weight, grid);
  r.results["weight"] = bergman::to_json(weight);
  r.results["dimension"] = weight.degree() + 1;
  r.results["sup"] = prof.sup;
  r.results["inf"] = prof.inf;
  r.results["sup_over_dimension"] = prof.sup / (weight.degree() + 1);
  r.certificates["condition"] = prof.condition;
  r.certificates["nodes"] = gram.certificate.nodes;
  r.certificates["error_estimate"] = gram.certificate.error_estimate;
  r.csv = profile_csv(prof);
  return r;
}

Report cmd_bergman_difference(const Global& g, const BergmanArgs& a) {
  Report r;
  auto l = parse_metric("L", a.l), m = parse_metric("M", a.m);
  bergman::DistortionGrid grid;
  grid.radial = a.radial;
  auto rep = bergman::distortion_difference(a.n, a.j, l, m, grid, quad(g));
  r.results["degree"] = rep.degree;
  r.results["sup"] = rep.profile.sup;
  r.results["full_dimension"] = rep.full_dimension;
  r.results["ratio"] = rep.ratio;
  const double bound = 1 + a.kconst * (1.0 / a.n + 1.0 / a.j);
  r.check("upper_bound", rep.ratio <= bound, {{"K", a.kconst}, {"bound", bound}});
  r.csv = profile_csv(rep.profile);
  return r;
}

Report cmd_bergman_sup(const Global&, const BergmanArgs& a) {
  Report r;
  auto metric = parse_metric("metric", a.metric);
  r.results["sup"] = bergman::sup_norm(double_list("section", a.section), metric);
  return r;
}

Report cmd_bergman_gromov(const Global& g, const BergmanArgs& a) {
  Report r;
  auto l = parse_metric("L", a.l), m = parse_metric("M", a.m);
  const auto seed = split_seed(g.seed, 0);
  r.results["ratio"] = bergman::gromov_ratio(a.k, a.j, l, m, a.trials, seed, quad(g));
  r.results["dimension"] = (l.scaled(a.k) + m.scaled(a.j)).degree() + 1;
  r.certificates["trials"] = a.trials;
  r.certificates["stream_seed"] = seed;
  return r;
}

Report cmd_bergman_volume(const Global& g, const BergmanArgs& a) {
  Report r;
  auto l = parse_metric("L", a.l), m = parse_metric("M", a.m);
  auto v = bergman::volume_comparison(a.n, a.j, double_list("section", a.section), l, m, quad(g));
  r.results["lhs"] = v.lhs;
  r.results["log_integral"] = v.log_integral;
  r.results["dimension"] = v.dimension;
  r.results["comparator"] = v.comparator;
  const double rhs = v.comparator * (1 + a.kconst * (1.0 / a.n + 1.0 / a.j));
  r.check("lower_bound", v.lhs >= rhs, {{"K", a.kconst}, {"rhs", rhs}});
  return r;
}

struct IntersectArgs {
  std::string c, a, b;
};

Report cmd_intersect(const Global&, const IntersectArgs& a) {
  Report r;
  if (!a.c.empty()) {
    if (!a.a.empty() || !a.b.empty()) throw Error(ErrorKind::ConfigError, "--c excludes --a/--b");
    r.results["value"] = bergman::arithmetic_self_intersection_c(parse_rational(a.c).convert_to<double>());
    return r;
  }
  if (a.a.empty() || a.b.empty()) throw Error(ErrorKind::ConfigError, "give --c or both --a and --b");
  r.results["value"] = bergman::mixed_arithmetic_intersection(parse_metric("a", a.a), parse_metric("b", a.b));
  return r;
}

struct HilbertArgs {
  std::string metric = "fs", ns = "10,50,100,200";
  double window = 0.025;
};

Report cmd_hilbert_samuel(const Global& g, const HilbertArgs& a) {
  Report r;
  auto lm = single_line_metric("metric", parse_metric("metric", a.metric));
  auto rows = bergman::chi_l2_series(lm, int_list("N", a.ns), quad(g));
  const double target = bergman::mixed_arithmetic_intersection(lm, lm);
  json out = json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "N,chi,normalized\n";
  for (const auto& row : rows) {
    out.push_back({{"N", row.n}, {"chi", row.chi}, {"normalized", row.normalized}});
    csv << row.n << ',' << row.chi << ',' << row.normalized << '\n';
  }
  r.results["rows"] = out;
  r.results["self_intersection"] = target;
  const auto& last = rows.back();
  if (last.n > 0)
    r.check("normalized_near_self_intersection", std::abs(last.normalized - target) <= a.window,
            {{"window", a.window}, {"N", last.n}});
  r.csv = csv.str();
  return r;
}

struct SiuArgs {
  std::string l = "c=1+c=1/2", m = "c=1/2", ns = "10,20,40,60,80,100,120";
  double slack = 0.05;
};

Report cmd_siu(const Global& g, const SiuArgs& a) {
  Report r;
  auto rep = bergman::siu_growth_experiment(parse_metric("L", a.l), parse_metric("M", a.m), int_list("N", a.ns), quad(g));
  json rows = json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "N,chi,chi_over_N2\n";
  for (const auto& row : rep.rows) {
    rows.push_back({{"N", row.n}, {"chi", row.chi}, {"chi_over_N2", row.per_n2}});
    csv << row.n << ',' << row.chi << ',' << row.per_n2 << '\n';
  }
  r.results["rows"] = rows;
  r.results["L_squared"] = rep.l_squared;
  r.results["L_dot_M"] = rep.l_dot_m;
  r.results["coefficient"] = rep.coefficient;
  r.results["measured_last"] = rep.measured_last;
  r.results["measured_liminf"] = rep.measured_liminf;
  if (rep.coefficient > 0)
    r.check("growth_at_least_coefficient", rep.measured_last >= rep.coefficient - a.slack, {{"slack", a.slack}});
  r.csv = csv.str();
  return r;
}

// ---- config files ----

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::string json_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ",") + json_scalar(e);
    return s;
  }
  if (v.is_object()) return v.dump();
  return v.dump();
}

struct ConfigFile {
  std::vector<std::string> command;
  std::vector<std::pair<std::string, std::string>> fields;
  std::map<std::string, std::size_t> lines;
};

ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(ErrorKind::ConfigError,
                path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, path + ": config must be a JSON object");
  ConfigFile cfg;
  for (const auto& [key, value] : j.items()) {
    const auto pos = text.find("\"" + key + "\"");
    cfg.lines[key] = line_col(text, pos == std::string::npos ? 0 : pos).first;
    if (key == "command") {
      if (!value.is_string()) throw Error(ErrorKind::ConfigError, path + ": field \"command\" must be a string");
      for (const auto& t : split(value.get<std::string>(), ' '))
        if (!t.empty()) cfg.command.push_back(t);
      continue;
    }
    cfg.fields.emplace_back(key, json_scalar(value));
  }
  return cfg;
}

std::string option_key(const CLI::Option* o) {
  auto names = o->get_lnames();
  return names.empty() ? o->get_name() : names.front();
}

}  // namespace

int run_cli(const std::vector<std::string>& input_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Arakelov-geometry experiment runner", "arakelov-lab"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Global g;
  std::string config_path;
  app.add_option("--precision-bits", g.precision_bits, "Working precision in bits")->check(CLI::Range(53u, 1u << 20));
  app.add_option("--seed", g.seed, "Seed for all randomness");
  app.add_option("--tolerance", g.tolerance, "Target tolerance (canonical-height eps)")->check(CLI::PositiveNumber);
  app.add_option("--quadrature-budget", g.quadrature_budget, "Node budget per radial integral")->check(CLI::Range(64, 1 << 22));
  app.add_option("--threads", g.threads, "Worker threads for lattice enumeration")->check(CLI::Range(1u, 256u));
  app.add_option("--out", g.out, "Write the JSON report here instead of stdout");
  app.add_option("--csv", g.csv, "Write plot-ready CSV here ('-' for stdout)");
  app.add_option("--config", config_path, "JSON config with a \"command\" and option fields");

  std::map<CLI::App*, std::function<Report()>> handlers;

  HeightArgs height;
  auto* h = app.add_subcommand("height", "Naive height of a point");
  h->add_option("--point", height.point, "Projective coordinates, comma separated rationals");
  h->add_option("--minpoly", height.minpoly, "Minimal polynomial coefficients, constant term first");
  h->add_option("--cyclotomic", height.cyclotomic, "Order m of a torsion point");
  h->add_option("--exponents", height.exponents, "Exponents a_i of the torsion point");
  h->add_option("--point-file", height.point_file, "Point JSON file");
  handlers[h] = [&] { return cmd_height(g, height); };

  MapArgs canon;
  auto* ch = app.add_subcommand("canonical-height", "Canonical height by the Tate limit");
  for (auto* sc : {ch}) {
    sc->add_option("--map", canon.map, "power<q>");
    sc->add_option("--forms", canon.forms, "Dense binary forms f0;f1, entry k multiplies x0^(q-k) x1^k");
    sc->add_option("--map-file", canon.map_file, "Endomorphism JSON file");
    sc->add_option("--point", canon.point, "Rational projective point")->required();
    sc->add_option("--eps", canon.eps, "Error target (defaults to --tolerance)");
  }
  handlers[ch] = [&] { return cmd_canonical_height(g, canon); };

  MapArgs orbit;
  auto* ob = app.add_subcommand("orbit", "Forward orbit with naive heights");
  ob->add_option("--map", orbit.map, "power<q>");
  ob->add_option("--forms", orbit.forms, "Dense binary forms f0;f1");
  ob->add_option("--map-file", orbit.map_file, "Endomorphism JSON file");
  ob->add_option("--point", orbit.point, "Rational projective point")->required();
  ob->add_option("--iterations", orbit.iterations, "Number of steps (<= 24)");
  handlers[ob] = [&] { return cmd_orbit(g, orbit); };

  auto* eq = app.add_subcommand("equidist", "Equidistribution experiments");
  eq->require_subcommand(1);
  BiluArgs bilu;
  auto* bl = eq->add_subcommand("bilu", "Torsion orbits: Weyl sums and discrepancy");
  bl->add_option("--orders", bilu.orders, "Orders m");
  bl->add_option("--K", bilu.cutoff, "Character cutoff")->check(CLI::Range(1, 1000));
  bl->add_option("--exponents", bilu.exponents, "Exponent tuple a");
  bl->add_option("--max-factor", bilu.max_factor, "Check discrepancy <= factor / m");
  handlers[bl] = [&] { return cmd_bilu(g, bilu); };
  BrolinArgs brolin;
  auto* br = eq->add_subcommand("brolin", "Canonical measure by backward iteration");
  br->add_option("--map", brolin.map.map, "power<q>");
  br->add_option("--forms", brolin.map.forms, "Dense binary forms f0;f1");
  br->add_option("--map-file", brolin.map.map_file, "Endomorphism JSON file");
  br->add_option("--samples", brolin.samples, "Number of samples");
  br->add_option("--burn-in", brolin.burn_in, "Discarded initial states");
  handlers[br] = [&] { return cmd_brolin(g, brolin); };
  OrbitMeasureArgs galois;
  auto* ga = eq->add_subcommand("galois", "Weyl sums and discrepancy of one Galois orbit");
  ga->add_option("--minpoly", galois.point.minpoly, "Minimal polynomial, constant term first");
  ga->add_option("--cyclotomic", galois.point.cyclotomic, "Order m");
  ga->add_option("--exponents", galois.point.exponents, "Exponent tuple");
  ga->add_option("--K", galois.cutoff, "Character cutoff")->check(CLI::Range(1, 1000));
  handlers[ga] = [&] { return cmd_galois(g, galois); };

  LatticeArgs lat;
  auto* la = app.add_subcommand("lattice", "Invariants of a normed Z-module");
  la->add_option("--gram", lat.gram, "Rational Gram matrix, rows separated by ';'");
  la->add_option("--input", lat.input, "Lattice JSON file");
  la->add_option("--torsion", lat.torsion, "Torsion order");
  la->add_option("--sublattice", lat.sublattice, "Generators (';' separated) of a saturated sublattice");
  la->add_option("--generators", lat.generators, "Generators for the bound check");
  la->add_option("--c", lat.c, "Norm bound for the generators");
  handlers[la] = [&] { return cmd_lattice(g, lat); };

  auto* bg = app.add_subcommand("bergman", "L2 norms, distortion functions and sup norms on P1");
  bg->require_subcommand(1);
  BergmanArgs berg;
  auto metric_opts = [&](CLI::App* sc) {
    sc->add_option("--metric", berg.metric, "Metric on O(1): fs, c=VAL, t=INT, sums e*term, JSON or @file");
    sc->add_option("--measure", berg.measure, "Metric whose curvature gives the measure (default --metric)");
    sc->add_option("--N", berg.n, "Tensor power")->check(CLI::NonNegativeNumber);
  };
  auto pair_opts = [&](CLI::App* sc) {
    sc->add_option("--L", berg.l, "Metric L");
    sc->add_option("--M", berg.m, "Metric M");
  };
  auto* bgg = bg->add_subcommand("gram", "Gram matrix of monomials");
  metric_opts(bgg);
  handlers[bgg] = [&] { return cmd_bergman_gram(g, berg); };
  auto* bgd = bg->add_subcommand("distortion", "Distortion function of N * metric (+ twist)");
  metric_opts(bgd);
  bgd->add_option("--twist", berg.twist, "Extra metric added to the weight");
  bgd->add_option("--radial", berg.radial, "Radial grid points per chart")->check(CLI::Range(2, 100000));
  bgd->add_option("--angular", berg.angular, "Angular grid points")->check(CLI::Range(1, 100000));
  handlers[bgd] = [&] { return cmd_bergman_distortion(g, berg); };
  auto* bgf = bg->add_subcommand("difference", "Distortion of N L - j M against mu_L");
  pair_opts(bgf);
  bgf->add_option("--N", berg.n, "N")->check(CLI::PositiveNumber);
  bgf->add_option("--j", berg.j, "j")->check(CLI::PositiveNumber);
  bgf->add_option("--K", berg.kconst, "Constant in the bound");
  bgf->add_option("--radial", berg.radial, "Radial grid points per chart")->check(CLI::Range(2, 100000));
  handlers[bgf] = [&] { return cmd_bergman_difference(g, berg); };
  auto* bgs = bg->add_subcommand("sup", "Sup norm of a section");
  bgs->add_option("--metric", berg.metric, "Metric of the section's degree");
  bgs->add_option("--section", berg.section, "Coefficients, entry k multiplies x0^(d-k) x1^k");
  handlers[bgs] = [&] { return cmd_bergman_sup(g, berg); };
  auto* bgr = bg->add_subcommand("gromov", "Max sup/L2 over random sections of k L + j M");
  pair_opts(bgr);
  bgr->add_option("--k", berg.k, "k")->check(CLI::NonNegativeNumber);
  bgr->add_option("--j", berg.j, "j")->check(CLI::NonNegativeNumber);
  bgr->add_option("--trials", berg.trials, "Random sections")->check(CLI::PositiveNumber);
  handlers[bgr] = [&] { return cmd_bergman_gromov(g, berg); };
  auto* bgv = bg->add_subcommand("volume", "Unit-ball volume comparison for an effective section of M");
  pair_opts(bgv);
  bgv->add_option("--N", berg.n, "N")->check(CLI::PositiveNumber);
  bgv->add_option("--j", berg.j, "j")->check(CLI::PositiveNumber);
  bgv->add_option("--section", berg.section, "Section of M");
  bgv->add_option("--K", berg.kconst, "Constant in the bound");
  handlers[bgv] = [&] { return cmd_bergman_volume(g, berg); };

  IntersectArgs inter;
  auto* in = app.add_subcommand("intersect", "Arithmetic intersection numbers of metrics on O(1)");
  in->add_option("--c", inter.c, "Self-intersection of the c-family metric");
  in->add_option("--a", inter.a, "First metric");
  in->add_option("--b", inter.b, "Second metric");
  handlers[in] = [&] { return cmd_intersect(g, inter); };

  HilbertArgs hs;
  auto* hsc = app.add_subcommand("hilbert-samuel", "chi of N * metric against N^2 / 2");
  hsc->add_option("--metric", hs.metric, "Metric on O(1)");
  hsc->add_option("--N", hs.ns, "Values of N");
  hsc->add_option("--window", hs.window, "Allowed distance from the self-intersection at the largest N");
  handlers[hsc] = [&] { return cmd_hilbert_samuel(g, hs); };

  SiuArgs siu;
  auto* si = app.add_subcommand("siu", "chi growth of N (L - M)");
  si->add_option("--L", siu.l, "Metric L");
  si->add_option("--M", siu.m, "Metric M");
  si->add_option("--N", siu.ns, "Values of N");
  si->add_option("--slack", siu.slack, "Allowed shortfall below the coefficient");
  handlers[si] = [&] { return cmd_siu(g, siu); };

  for (auto* sc : app.get_subcommands([](CLI::App*) { return true; })) sc->fallthrough();
  for (auto* sc : {eq, bg})
    for (auto* sub : sc->get_subcommands([](CLI::App*) { return true; })) sub->fallthrough();

  std::vector<std::string> args = input_args;
  try {
    // --config expands into leading command tokens and option fields
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) {
        path = args[i + 1];
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      } else if (args[i].rfind("--config=", 0) == 0) {
        path = args[i].substr(9);
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        continue;
      }
      config_path = path;
      auto cfg = load_config(path);
      if (cfg.command.empty()) throw Error(ErrorKind::ConfigError, path + ": missing field \"command\"");
      CLI::App* sc = &app;
      std::vector<CLI::App*> chain = {&app};
      for (const auto& name : cfg.command) {
        sc = sc->get_subcommand_no_throw(name);
        if (!sc) throw Error(ErrorKind::ConfigError, path + ":" + std::to_string(cfg.lines["command"]) +
                                                         ": unknown command \"" + name + "\"");
        chain.push_back(sc);
      }
      std::vector<std::string> expanded = cfg.command;
      for (const auto& [key, value] : cfg.fields) {
        const bool known = std::any_of(chain.begin(), chain.end(),
                                       [&](CLI::App* a) { return a->get_option_no_throw("--" + key) != nullptr; });
        if (!known || key == "config")
          throw Error(ErrorKind::ConfigError, path + ":" + std::to_string(cfg.lines[key]) + ": field \"" + key +
                                                  "\" is not an option of \"" + cfg.command.back() + "\"");
        expanded.push_back("--" + key);
        expanded.push_back(value);
      }
      for (const auto& a : args) {
        if (a == cfg.command.front())
          throw Error(ErrorKind::ConfigError, "command given both in " + path + " and on the command line");
        expanded.push_back(a);
      }
      args = std::move(expanded);
      break;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: ConfigError: " << e.what() << '\n';
    return kError;
  }

  // selected leaf and echo of every option in the chain
  std::vector<CLI::App*> chain = {&app};
  while (true) {
    auto subs = chain.back()->get_subcommands();
    if (subs.empty()) break;
    chain.push_back(subs.front());
  }
  CLI::App* leaf = chain.back();
  auto handler = handlers.find(leaf);
  if (handler == handlers.end()) {
    err << "error: ConfigError: incomplete command\n";
    return kError;
  }
  json config = json::object();
  std::string command;
  for (auto* a : chain) {
    if (a != &app) command += (command.empty() ? "" : " ") + a->get_name();
    for (const auto* o : a->get_options()) {
      if (o->get_lnames().empty()) continue;
      const auto key = option_key(o);
      if (key == "help") continue;
      if (o->count() > 0) {
        config[key] = o->results().back();
      } else if (!o->get_default_str().empty()) {
        config[key] = o->get_default_str();
      }
    }
  }
  config["command"] = command;

  Report rep;
  try {
    rep = handler->second();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }

  json doc = {{"schema", kSchema}, {"config", config}, {"results", rep.results}, {"certificates", rep.certificates}};
  if (!rep.checks.empty()) doc["checks"] = rep.checks;
  const std::string text = doc.dump(2) + "\n";
  if (!g.csv.empty()) {
    if (rep.csv.empty()) {
      err << "error: ConfigError: \"" << command << "\" has no CSV output\n";
      return kError;
    }
    if (g.csv == "-") {
      out << rep.csv;
    } else {
      std::ofstream f(g.csv);
      if (!f) {
        err << "error: cannot write " << g.csv << '\n';
        return kError;
      }
      f << rep.csv;
    }
  }
  if (!g.out.empty()) {
    std::ofstream f(g.out);
    if (!f) {
      err << "error: cannot write " << g.out << '\n';
      return kError;
    }
    f << text;
  } else if (g.csv != "-") {
    out << text;
  }
  if (rep.check_failed) {
    err << "check failed:";
    for (const auto& [name, c] : rep.checks.items())
      if (!c.at("passed").get<bool>()) err << ' ' << name;
    err << '\n';
    return kCheckFailed;
  }
  return kOk;
}

}  // namespace arakelov::cli
