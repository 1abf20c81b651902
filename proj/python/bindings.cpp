#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "arakelov/bergman.hpp"
#include "arakelov/dynamics.hpp"
#include "arakelov/equidist.hpp"
#include "arakelov/heights.hpp"
#include "arakelov/lattice.hpp"
#include "json.hpp"
#ifdef ARAKELOV_HAVE_CLI
#include "cli.hpp"
#endif

namespace py = pybind11;
using namespace arakelov;
using nlohmann::json;

namespace {

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact heights, lattices, dynamics and Bergman kernels on P^1";

  static py::exception<Error> error(m, "ArakelovError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      py::object inst = exc(e.what());
      inst.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(exc.ptr(), inst.ptr());
    }
  });

  m.def("height", [](const std::string& point) { return heights::height(heights::point_from_json(parse(point))); },
        py::arg("point_json"));

  m.def(
      "canonical_height",
      [](const std::string& map, const std::string& point, double eps) {
        auto est = dynamics::canonical_height(dynamics::endomorphism_from_json(parse(map)),
                                              heights::point_from_json(parse(point)), eps);
        return std::make_tuple(est.value, est.error_bound, est.iterations);
      },
      py::arg("map_json"), py::arg("point_json"), py::arg("eps") = 1e-8);

  m.def(
      "covolume",
      [](const std::string& lattice) {
        return lattice::covolume_invariant(lattice::lattice_from_json(parse(lattice))).str();
      },
      py::arg("lattice_json"));

  m.def(
      "chi", [](const std::string& lattice) { return lattice::chi(lattice::lattice_from_json(parse(lattice))); },
      py::arg("lattice_json"));

  m.def(
      "bilu",
      [](const std::vector<long long>& orders, int cutoff) {
        return equidist::to_json(equidist::bilu_experiment(orders, cutoff)).dump();
      },
      py::arg("orders"), py::arg("cutoff") = 8);

  m.def("self_intersection_c", &bergman::arithmetic_self_intersection_c, py::arg("c"));

  m.def(
      "mixed_intersection",
      [](const std::string& a, const std::string& b) {
        return bergman::mixed_arithmetic_intersection(bergman::metric_from_json(parse(a)),
                                                      bergman::metric_from_json(parse(b)));
      },
      py::arg("a_json"), py::arg("b_json"));

  m.def(
      "distortion_sup",
      [](const std::string& metric, const std::string& measure) {
        auto w = bergman::metric_from_json(parse(metric));
        auto mu = bergman::CurvatureMeasure::of(bergman::metric_from_json(parse(measure)));
        return bergman::distortion(bergman::l2_gram(w, mu), w).sup;
      },
      py::arg("metric_json"), py::arg("measure_json"));

#ifdef ARAKELOV_HAVE_CLI
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = cli::run_cli(args, out, err);
        return std::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
#endif
}
