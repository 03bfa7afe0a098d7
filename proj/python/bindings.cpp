#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "detergo/dynamics.hpp"
#include "detergo/errors.hpp"
#include "detergo/expsum.hpp"
#include "detergo/spec_io.hpp"
#include "detergo/structure.hpp"
#include "detergo/version.hpp"

namespace py = pybind11;
using namespace detergo;

namespace {

// Sequences cross the boundary as spec text: a name, inline JSON or a file.
WeightSequence weights(const std::string& spec) { return parse_weight_spec(resolve_spec_argument(spec)); }
IndexSequence indices(const std::string& spec) { return parse_index_spec(resolve_spec_argument(spec)); }

QMultSeq qmult(const std::string& spec) {
  auto seq = qmult_from_spec(resolve_spec_argument(spec));
  if (!seq) throw SpecError("not a finitely valued q-multiplicative sequence");
  return *seq;
}

py::dict sup_dict(const SupReport& r) {
  py::dict d;
  d["N"] = r.n;
  d["lower"] = r.lower;
  d["upper"] = r.upper;
  d["slack"] = r.slack;
  d["argmax"] = r.argmax;
  d["grid_size"] = r.grid_size;
  d["certified"] = r.certified;
  return d;
}

}  // namespace

PYBIND11_MODULE(_detergo, m) {
  m.doc() = "Weighted exponential sums, q-multiplicative sequences and rotation averages";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);
  py::register_exception<ComputationError>(m, "ComputationError", PyExc_ArithmeticError);
  py::register_exception<InequalityViolation>(m, "InequalityViolation", PyExc_AssertionError);

  m.def("values", [](const std::string& seq, std::vector<std::uint64_t> ns) {
        const auto theta = weights(seq);
        std::vector<complex> out;
        for (auto n : ns) out.push_back(theta.at(n));
        return out;
      }, py::arg("seq"), py::arg("n"));

  m.def("weighted_sum", [](const std::string& seq, std::uint64_t n, double x, const std::string& u) {
        return weighted_exp_sum(weights(seq), indices(u), n, x);
      }, py::arg("seq"), py::arg("N"), py::arg("x"), py::arg("u") = "identity");

  m.def("sup_norm", [](const std::string& seq, std::uint64_t n, const std::string& u, bool certified, double tol) {
        SupOptions opt;
        opt.mode = certified ? SupMode::certified : SupMode::fast;
        opt.tolerance = tol;
        return sup_dict(sup_norm(weights(seq), indices(u), n, opt));
      }, py::arg("seq"), py::arg("N"), py::arg("u") = "identity", py::arg("certified") = false,
      py::arg("tol") = 1e-3);

  m.def("delta_fit", [](const std::string& seq, std::vector<std::uint64_t> ns, const std::string& u) {
        const auto fit = delta_fit(weights(seq), indices(u), ns);
        py::dict d;
        d["slope"] = fit.slope;
        d["intercept"] = fit.intercept;
        d["residual"] = fit.residual;
        py::list points;
        for (const auto& p : fit.points) points.append(sup_dict(p));
        d["points"] = points;
        return d;
      }, py::arg("seq"), py::arg("ns"), py::arg("u") = "identity");

  m.def("block_sum", [](const std::string& seq, std::size_t level, double x) {
        return qmult_block_sum(qmult(seq), level, x);
      }, py::arg("seq"), py::arg("level"), py::arg("x"));

  m.def("resonance", [](const std::string& seq, std::size_t horizon) {
        const auto q = qmult(seq);
        const auto rr = resonance_sets(q, horizon);
        const auto tb = taux_bound(q, rr);
        py::dict d;
        d["alpha_hat"] = rr.alpha_hat;
        d["I"] = rr.coherent;
        d["s"] = tb.s;
        d["delta_bound"] = tb.delta_bound;
        return d;
      }, py::arg("seq"), py::arg("horizon") = 64);

  m.def("diophantine_type", [](const std::string& alpha, std::size_t depth) {
        return diophantine_type(cli::parse_alpha(cli::resolve_alpha_argument(alpha)), depth).d_hat;
      }, py::arg("alpha"), py::arg("depth") = 30);

  m.def("birkhoff", [](const std::string& seq, const std::string& alpha, std::uint64_t n, double beta,
                       const std::string& f, const std::string& u) {
        RotationSystem sys{cli::parse_alpha(cli::resolve_alpha_argument(alpha)), TorusPoint{}};
        const auto fn = cli::parse_fourier(f.front() == '{' ? json::parse(f) : json(f), sys.alpha, beta);
        return weighted_birkhoff(weights(seq), indices(u), fn, sys, n, beta).value;
      }, py::arg("seq"), py::arg("alpha"), py::arg("N"), py::arg("beta") = 1.0, py::arg("f") = "cos",
      py::arg("u") = "identity");

  m.def("squares_average", [](const std::string& seq, const std::string& alpha, std::uint64_t n) {
        return squares_average(weights(seq), cli::parse_alpha(cli::resolve_alpha_argument(alpha)).fraction(), n).value;
      }, py::arg("seq"), py::arg("alpha"), py::arg("N"));

  m.def("run", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      }, py::arg("args"), "Run a CLI command in-process; returns (exit code, stdout, stderr).");
}
