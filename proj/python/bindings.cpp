#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <optional>

#include "luce/arrangements.hpp"
#include "luce/bottomk.hpp"
#include "luce/error.hpp"
#include "luce/luce_model.hpp"
#include "luce/rng.hpp"
#include "luce/topk.hpp"
#include "luce/weight_spec.hpp"

namespace py = pybind11;
using namespace luce;

namespace {

std::vector<int> labels_of(const Permutation& p) { return {p.labels().begin(), p.labels().end()}; }

std::vector<std::vector<int>> draw_many(const std::vector<double>& weights, std::size_t count,
                                        std::uint64_t seed, bool exponential) {
  const WeightVector w(weights);
  const RngStream root(seed);
  std::vector<std::vector<int>> out;
  out.reserve(count);
  py::gil_scoped_release release;
  for (std::size_t i = 0; i < count; ++i) {
    RngStream rng = root.split(i);
    out.push_back(labels_of(exponential ? sample_exponential(w, rng) : sample_urn(w, rng)));
  }
  return out;
}

bottomk::WeightSequence sequence(const std::string& family, double parameter) {
  return cli::sequence_from_family(family, parameter);
}

py::dict convergence(const std::string& family, double parameter) {
  const auto r = bottomk::convergence_test(sequence(family, parameter));
  py::dict d;
  d["x0"] = r.x0;
  d["f_at_x0"] = r.f_at_x0_infinite ? "infinite" : "finite";
  d["converges"] = r.converges;
  d["method"] = r.method == bottomk::Method::analytic ? "analytic" : "numeric-best-effort";
  d["caveat"] = r.caveat;
  return d;
}

py::dict pmf_result(const bottomk::BottomPmf& r) {
  py::dict d;
  d["value"] = r.value;
  d["error"] = r.error;
  d["method"] = r.method == bottomk::PmfMethod::quadrature ? "quadrature" : "monte-carlo";
  d["defective"] = r.defective;
  return d;
}

arr::BraidFaceTable braid_model(const std::string& model, const std::vector<double>& weights, std::size_t n) {
  if (model == "tsetlin") return arr::tsetlin_face_weights(normalize(WeightVector(weights)));
  if (model == "riffle") return arr::riffle_face_weights(n);
  throw InvalidArgument("braid model must be 'tsetlin' or 'riffle'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Luce model on permutations: exact laws, samplers and distances";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<PreconditionViolation>(m, "PreconditionViolation", PyExc_ValueError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);

  m.def("pmf", [](const std::vector<double>& w, std::vector<int> sigma) {
    return luce_pmf(WeightVector(w), Permutation(std::move(sigma)));
  }, py::arg("weights"), py::arg("sigma"), "Probability of the draw order sigma (labels 1..n, top first).");

  m.def("sample_urn", [](const std::vector<double>& w, std::size_t count, std::uint64_t seed) {
    return draw_many(w, count, seed, false);
  }, py::arg("weights"), py::arg("count") = 1, py::arg("seed") = 0);

  m.def("sample_exponential", [](const std::vector<double>& w, std::size_t count, std::uint64_t seed) {
    return draw_many(w, count, seed, true);
  }, py::arg("weights"), py::arg("count") = 1, py::arg("seed") = 0);

  m.def("weights", [](const std::string& spec) {
    const auto w = cli::parse_weight_spec(spec);
    return std::vector<double>(w.values().begin(), w.values().end());
  }, py::arg("spec"), "Weights from a JSON spec such as '{\"family\": \"zipf\", \"n\": 5}'.");

  m.def("second_position_marginal", [](const std::vector<double>& w, int label) {
    return second_position_marginal(WeightVector(w), label);
  }, py::arg("weights"), py::arg("label"));

  m.def("d_inf_exact", [](const std::vector<double>& w, std::size_t k) {
    return topk::d_inf_exact(WeightVector(w), k);
  }, py::arg("weights"), py::arg("k"));
  m.def("d_inf_bound", [](const std::vector<double>& w, std::size_t k) {
    return topk::d_inf_bound(WeightVector(w), k);
  }, py::arg("weights"), py::arg("k"));
  m.def("tv_exact", [](const std::vector<double>& w, std::size_t k) {
    return topk::tv_exact(WeightVector(w), k);
  }, py::arg("weights"), py::arg("k"));
  m.def("collision_lambda", [](const std::vector<double>& w, std::size_t k) {
    return topk::collision_lambda(WeightVector(w), k);
  }, py::arg("weights"), py::arg("k"));

  m.def("convergence_test", &convergence, py::arg("family"), py::arg("parameter") = 1.0);
  m.def("f_eval", [](const std::string& family, double parameter, double x, double tol) -> std::optional<double> {
    const auto r = bottomk::f_eval(sequence(family, parameter), x, tol);
    if (r.diverges) return std::nullopt;
    return r.value;
  }, py::arg("family"), py::arg("parameter"), py::arg("x"), py::arg("tol") = 1e-9,
     "Sum of exp(-theta_i x); None when it diverges.");
  m.def("last_card_table", [](int max_label, double tol) {
    std::vector<double> out;
    for (const auto& row : bottomk::sukhatme_last_card_table(max_label, tol)) out.push_back(row.probability);
    return out;
  }, py::arg("max_label") = 10, py::arg("tol") = 1e-9, "P(label is last) for theta_i = i, labels 1..max_label.");
  m.def("limit_bottom_pmf", [](const std::string& family, double parameter, const std::vector<int>& bottom,
                               double tol) {
    bottomk::QuadratureOptions o;
    o.tol = tol;
    return pmf_result(bottomk::limit_bottom_pmf(sequence(family, parameter), bottom, o));
  }, py::arg("family"), py::arg("parameter"), py::arg("bottom"), py::arg("tol") = 1e-9);
  m.def("finite_bottom_pmf", [](const std::vector<double>& w, const std::vector<int>& bottom) {
    return pmf_result(bottomk::finite_n_bottom_pmf(WeightVector(w), bottom));
  }, py::arg("weights"), py::arg("bottom"));

  m.def("braid_stationary", [](const std::string& model, const std::vector<double>& weights, std::size_t n) {
    const auto table = braid_model(model, weights, weights.empty() ? n : weights.size());
    const auto pi = arr::stationary_exact(arr::transition_matrix(table));
    py::dict d;
    for (std::size_t i = 0; i < pi.size(); ++i)
      d[py::tuple(py::cast(labels_of(table.arrangement().chamber_at(i))))] = pi[i];
    return d;
  }, py::arg("model"), py::arg("weights") = std::vector<double>{}, py::arg("n") = 0,
     "Exact stationary law of the Tsetlin or riffle walk, keyed by permutation.");
  m.def("braid_sample", [](const std::string& model, const std::vector<double>& weights, std::size_t n,
                           std::size_t count, std::uint64_t seed) {
    const auto table = braid_model(model, weights, weights.empty() ? n : weights.size());
    const RngStream root(seed);
    std::vector<std::vector<int>> out;
    for (std::size_t i = 0; i < count; ++i) {
      RngStream rng = root.split(i);
      out.push_back(labels_of(arr::brown_diaconis_sample(table, rng)));
    }
    return out;
  }, py::arg("model"), py::arg("weights") = std::vector<double>{}, py::arg("n") = 0, py::arg("count") = 1,
     py::arg("seed") = 0, "Exact stationary draws by the face-urn construction.");
  m.def("path_coloring_stationary", [](std::size_t vertices) {
    const auto pi = arr::stationary_exact(arr::graph_coloring_matrix(arr::path_graph(vertices)));
    const arr::BooleanArrangement states{vertices};
    py::dict d;
    for (std::size_t i = 0; i < pi.size(); ++i) d[py::str(states.chamber_at(i).to_string())] = pi[i];
    return d;
  }, py::arg("vertices"));
}
