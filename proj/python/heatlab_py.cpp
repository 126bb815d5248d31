#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "heatlab/bounds.hpp"
#include "heatlab/cli.hpp"
#include "heatlab/error.hpp"
#include "heatlab/potential.hpp"

namespace py = pybind11;
using namespace heatlab;

namespace {

Ball checked_ball(const TransitionOperator& op, Vertex x, int R) { return proper_ball(op.graph(), x, R); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact random-walk computations on weighted graphs";

  py::register_exception<Error>(m, "HeatlabError");

  py::class_<WeightedGraph>(m, "WeightedGraph")
      .def_property_readonly("n", &WeightedGraph::n)
      .def_property_readonly("edges",
                             [](const WeightedGraph& g) {
                               std::vector<std::tuple<Vertex, Vertex, double>> out;
                               for (const auto& e : g.edges()) out.emplace_back(e.u, e.v, e.w);
                               return out;
                             })
      .def_property_readonly("mu", py::overload_cast<>(&WeightedGraph::mu, py::const_))
      .def_property_readonly("family", [](const WeightedGraph& g) { return g.meta().family; })
      .def("to_json", [](const WeightedGraph& g) { return serialize(g); })
      .def("hash", [](const WeightedGraph& g) { return graph_hash(g); })
      .def("__len__", &WeightedGraph::n);

  m.def("gen_lattice", &gen_lattice, py::arg("dim"), py::arg("side"));
  m.def("gen_sierpinski", &gen_sierpinski, py::arg("level"));
  m.def("gen_bottleneck", &gen_bottleneck, py::arg("side"));
  m.def("gen_product", &gen_product);
  m.def("sierpinski_vertex", &sierpinski_vertex, py::arg("level"), py::arg("i"), py::arg("j"));
  m.def("graph_from_json", [](const std::string& s) { return graph_from_json(Json::parse(s)); });
  m.def("distance", &distance);

  py::class_<TransitionOperator>(m, "Walk")
      .def(py::init<const WeightedGraph&, double>(), py::arg("graph"), py::arg("lazy") = 0.5, py::keep_alive<1, 2>())
      .def_property_readonly("lazy", &TransitionOperator::lazy)
      .def("prob", &TransitionOperator::prob);

  m.def("heat_kernel", &heat_kernel, py::arg("walk"), py::arg("t"), py::arg("x"), py::arg("y"));
  m.def("heat_kernel_row", &heat_kernel_row, py::arg("walk"), py::arg("t"), py::arg("x"));
  m.def(
      "exit_distribution",
      [](const TransitionOperator& op, Vertex x, int R, int t_max) {
        return exit_distribution(op, checked_ball(op, x, R), x, t_max);
      },
      py::arg("walk"), py::arg("x"), py::arg("R"), py::arg("t_max"));
  m.def("mean_exit", &mean_exit, py::arg("walk"), py::arg("x"), py::arg("R"));
  m.def("mean_exit_sup", &mean_exit_sup, py::arg("walk"), py::arg("x"), py::arg("R"));
  m.def(
      "iter_counts",
      [](const TransitionOperator& op, Vertex x, double t, int R, double q) {
        const GraphExitOracle E(op);
        const auto A = ball(op.graph(), x, R).interior;
        const auto c = iter_counts(E.as_function(), t, R, q, A);
        return py::make_tuple(c.kappa, c.nu.infinite ? py::object(py::float_(INFINITY)) : py::object(py::int_(c.nu.value)));
      },
      py::arg("walk"), py::arg("x"), py::arg("t"), py::arg("R"), py::arg("q") = 1.0,
      "(kappa, nu) over A = B(x, R); nu is inf when undefined.");
  m.def(
      "walk_dimension",
      [](const TransitionOperator& op, Vertex x, const std::vector<int>& radii) {
        const auto f = scaling_fit(op, x, radii);
        return py::make_tuple(f.beta, f.r2);
      },
      py::arg("walk"), py::arg("x"), py::arg("radii"));
  m.def(
      "green",
      [](const TransitionOperator& op, Vertex x, int R, Vertex y) { return green_kernel(op, checked_ball(op, x, R))(x, y); },
      py::arg("walk"), py::arg("x"), py::arg("R"), py::arg("y"));
  m.def("resistance", &resistance, py::arg("walk"), py::arg("x"), py::arg("r"), py::arg("R"));
  m.def(
      "harnack", [](const TransitionOperator& op, Vertex x, int R) { return harnack_constant(op, x, R).H; },
      py::arg("walk"), py::arg("x"), py::arg("R"));
  m.def(
      "chain_bound",
      [](const TransitionOperator& op, Vertex x, Vertex y, double t, int l) {
        const auto c = chain_lower_bound(op, x, y, t, l);
        return py::make_tuple(c.bound, c.exact);
      },
      py::arg("walk"), py::arg("x"), py::arg("y"), py::arg("t"), py::arg("l"), "(bound, exact)");

  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line tool in-process: (exit code, stdout, stderr).");
  m.attr("__version__") = cli::kVersion;
}
