#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sso/accounting.hpp"
#include "sso/bench.hpp"
#include "sso/data_io.hpp"
#include "sso/error.hpp"
#include "sso/optimizers.hpp"
#include "sso/oracles.hpp"
#include "sso/solvers.hpp"

namespace py = pybind11;
using namespace sso;

namespace {

SparseRowMatrix csr_from_arrays(const std::vector<std::int64_t>& indptr,
                                const std::vector<std::int64_t>& indices,
                                const std::vector<double>& data, std::pair<Eigen::Index, Eigen::Index> shape) {
  require(indptr.size() == static_cast<std::size_t>(shape.first) + 1, "indptr length must be rows + 1");
  require(indices.size() == data.size(), "indices and data lengths differ");
  std::vector<Eigen::Triplet<double, std::int64_t>> triplets;
  triplets.reserve(data.size());
  for (Eigen::Index r = 0; r < shape.first; ++r) {
    for (std::int64_t k = indptr[r]; k < indptr[r + 1]; ++k) {
      require(indices[k] >= 0 && indices[k] < shape.second, "column index out of range");
      triplets.emplace_back(r, indices[k], data[k]);
    }
  }
  SparseRowMatrix m(shape.first, shape.second);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

py::tuple csr_arrays(const SparseRowMatrix& m) {
  std::vector<std::int64_t> indptr(m.outerIndexPtr(), m.outerIndexPtr() + m.rows() + 1);
  std::vector<std::int64_t> indices(m.innerIndexPtr(), m.innerIndexPtr() + m.nonZeros());
  std::vector<double> data(m.valuePtr(), m.valuePtr() + m.nonZeros());
  return py::make_tuple(indptr, indices, data, py::make_tuple(m.rows(), m.cols()));
}

py::dict solution_dict(const SubproblemSolution& s) {
  py::dict d;
  d["s"] = s.s;
  d["hvp_count"] = s.hvp_count;
  d["kind"] = to_string(s.kind);
  d["predicted_decrease"] = s.predicted_decrease;
  d["boundary_hit"] = s.boundary_hit;
  d["max_iter_hit"] = s.max_iter_hit;
  d["conditions_met"] = s.conditions_met;
  return d;
}

py::dict trace_dict(const RunTrace& t) {
  std::vector<std::size_t> iter, gamma, size_h, size_g, size_b;
  std::vector<std::uint64_t> cum_props, props;
  std::vector<double> loss, rho_tilde, rho_hat, param, step_norm, g_norm, test_error;
  std::vector<bool> accepted, coupled;
  bool has_test = false;
  for (const IterationRecord& r : t.records) {
    iter.push_back(r.iter);
    cum_props.push_back(r.cum_props);
    props.push_back(r.props);
    loss.push_back(r.train_loss);
    rho_tilde.push_back(r.rho_tilde);
    rho_hat.push_back(r.rho_hat);
    accepted.push_back(r.accepted);
    coupled.push_back(r.coupled);
    param.push_back(r.delta_or_sigma);
    step_norm.push_back(r.step_norm);
    g_norm.push_back(r.g_norm);
    gamma.push_back(r.gamma);
    size_h.push_back(r.sizes.h);
    size_g.push_back(r.sizes.g);
    size_b.push_back(r.sizes.b);
    if (r.test_error) has_test = true;
    test_error.push_back(r.test_error.value_or(std::nan("")));
  }
  py::dict d;
  d["iter"] = iter;
  d["cum_props"] = cum_props;
  d["props"] = props;
  d["train_loss"] = loss;
  if (has_test) d["test_error"] = test_error;
  d["rho_tilde"] = rho_tilde;
  d["rho_hat"] = rho_hat;
  d["accepted"] = accepted;
  d["coupled"] = coupled;
  d["delta_or_sigma"] = param;
  d["step_norm"] = step_norm;
  d["g_norm"] = g_norm;
  d["gamma"] = gamma;
  d["size_h"] = size_h;
  d["size_g"] = size_g;
  d["size_b"] = size_b;
  d["x_final"] = t.x_final;
  d["termination"] = to_string(t.termination);
  return d;
}

}  // namespace

PYBIND11_MODULE(sso, m) {
  m.doc() = "Stochastic trust-region and cubic-regularization methods with subsampled "
            "function, gradient and Hessian";

  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::enum_<Algorithm>(m, "Algorithm").value("str", Algorithm::str).value("sarc", Algorithm::sarc);
  py::enum_<Variant>(m, "Variant")
      .value("full", Variant::full)
      .value("sh", Variant::sh)
      .value("shg", Variant::shg)
      .value("shgf", Variant::shgf);
  py::enum_<SizeRule>(m, "SizeRule")
      .value("fraction", SizeRule::fraction)
      .value("theorem", SizeRule::theorem)
      .value("bernstein", SizeRule::bernstein);
  py::enum_<SarcCorrection>(m, "SarcCorrection")
      .value("sigma", SarcCorrection::sigma)
      .value("step", SarcCorrection::step);
  py::enum_<TrSolver>(m, "TrSolver").value("steihaug", TrSolver::steihaug).value("cauchy", TrSolver::cauchy);

  py::class_<InexactnessBudget>(m, "InexactnessBudget")
      .def(py::init<>())
      .def_readwrite("eps_g", &InexactnessBudget::eps_g)
      .def_readwrite("eps_b", &InexactnessBudget::eps_b)
      .def_readwrite("eps_h", &InexactnessBudget::eps_h)
      .def_readwrite("v0", &InexactnessBudget::v0)
      .def_readwrite("delta", &InexactnessBudget::delta)
      .def_readwrite("eps_grad_target", &InexactnessBudget::eps_grad_target)
      .def_readwrite("eps_hess_target", &InexactnessBudget::eps_hess_target)
      .def("validate", &InexactnessBudget::validate);

  py::class_<VariantConfig>(m, "VariantConfig")
      .def(py::init<>())
      .def_readwrite("algorithm", &VariantConfig::algorithm)
      .def_readwrite("variant", &VariantConfig::variant)
      .def_readwrite("eta", &VariantConfig::eta)
      .def_readwrite("r1", &VariantConfig::r1)
      .def_readwrite("r2", &VariantConfig::r2)
      .def_readwrite("delta0", &VariantConfig::delta0)
      .def_readwrite("delta_max", &VariantConfig::delta_max)
      .def_readwrite("sigma0", &VariantConfig::sigma0)
      .def_readwrite("sigma_min", &VariantConfig::sigma_min)
      .def_readwrite("budget", &VariantConfig::budget)
      .def_readwrite("max_iters", &VariantConfig::max_iters)
      .def_readwrite("seed", &VariantConfig::seed)
      .def_readwrite("size_rule", &VariantConfig::size_rule)
      .def_readwrite("sample_fraction", &VariantConfig::sample_fraction)
      .def_readwrite("sarc_correction", &VariantConfig::sarc_correction)
      .def_readwrite("tr_solver", &VariantConfig::tr_solver)
      .def_readwrite("max_props", &VariantConfig::max_props)
      .def("validate", &VariantConfig::validate);

  py::class_<FiniteSumProblem, std::shared_ptr<FiniteSumProblem>>(m, "FiniteSumProblem")
      .def_property_readonly("num_samples", &FiniteSumProblem::num_samples)
      .def_property_readonly("dim", &FiniteSumProblem::dim)
      .def("value", &FiniteSumProblem::value, py::arg("i"), py::arg("x"))
      .def("grad", &FiniteSumProblem::grad, py::arg("i"), py::arg("x"))
      .def("hvp", &FiniteSumProblem::hvp, py::arg("i"), py::arg("x"), py::arg("v"))
      .def("full_value", [](const FiniteSumProblem& p, const Vector& x) { return full_value(p, x); })
      .def("full_grad", [](const FiniteSumProblem& p, const Vector& x) { return full_grad(p, x); })
      .def("full_hvp", [](const FiniteSumProblem& p, const Vector& x, const Vector& v) {
        return full_hvp(p, x, v);
      })
      .def("mean_value", [](const FiniteSumProblem& p, const std::vector<std::size_t>& idx,
                            const Vector& x) { return p.mean_value(idx, x); })
      .def("mean_grad", [](const FiniteSumProblem& p, const std::vector<std::size_t>& idx,
                           const Vector& x) { return p.mean_grad(idx, x); });

  py::class_<QuadraticProblem, FiniteSumProblem, std::shared_ptr<QuadraticProblem>>(m, "QuadraticProblem")
      .def(py::init<std::vector<Vector>>(), py::arg("centers"))
      .def("centroid", &QuadraticProblem::centroid);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("labels", &Dataset::labels)
      .def_readonly("name", &Dataset::name)
      .def_property_readonly("num_rows", &Dataset::num_rows)
      .def_property_readonly("dim", &Dataset::dim)
      .def("to_csr", [](const Dataset& d) { return csr_arrays(d.features); },
           "(indptr, indices, data, shape) of the feature matrix");

  py::class_<NllsLogisticProblem, FiniteSumProblem, std::shared_ptr<NllsLogisticProblem>>(
      m, "NllsLogisticProblem")
      .def(py::init([](const Dataset& d) { return std::make_shared<NllsLogisticProblem>(d.features, d.labels); }),
           py::arg("dataset"))
      .def(py::init([](const std::vector<std::int64_t>& indptr, const std::vector<std::int64_t>& indices,
                       const std::vector<double>& data, std::pair<Eigen::Index, Eigen::Index> shape,
                       const Vector& labels) {
             return std::make_shared<NllsLogisticProblem>(csr_from_arrays(indptr, indices, data, shape),
                                                          labels);
           }),
           py::arg("indptr"), py::arg("indices"), py::arg("data"), py::arg("shape"), py::arg("labels"))
      .def("classification_error", [](const NllsLogisticProblem&, const Dataset& d, const Vector& x) {
        return NllsLogisticProblem::classification_error(d.features, d.labels, x);
      });

  auto label_scheme = [](const std::string& s) {
    if (s == "signed") return LabelScheme::signed_labels;
    if (s == "one_two") return LabelScheme::one_two;
    if (s == "auto") return LabelScheme::automatic;
    throw ContractViolation("labels must be 'signed', 'one_two' or 'auto'");
  };
  m.def("load_libsvm_file",
        [label_scheme](const std::string& path, std::optional<Eigen::Index> dim, const std::string& labels) {
          ParseOptions o;
          o.expected_dim = dim;
          o.labels = label_scheme(labels);
          return load_libsvm_file(path, o);
        },
        py::arg("path"), py::arg("expected_dim") = py::none(), py::arg("labels") = "auto");
  m.def("parse_libsvm_string",
        [label_scheme](const std::string& text, std::optional<Eigen::Index> dim, const std::string& labels) {
          ParseOptions o;
          o.expected_dim = dim;
          o.labels = label_scheme(labels);
          return parse_libsvm_string(text, o);
        },
        py::arg("text"), py::arg("expected_dim") = py::none(), py::arg("labels") = "signed");
  m.def("make_synthetic_binary", &make_synthetic_binary, py::arg("n"), py::arg("d"),
        py::arg("density") = 0.11, py::arg("label_noise") = 0.1, py::arg("seed") = 0,
        py::arg("name") = "synthetic");
  m.def("dataset_stats", [](const Dataset& d) {
    const DatasetStats s = dataset_stats(d);
    py::dict out;
    out["n"] = s.n;
    out["d"] = s.d;
    out["nnz"] = s.nnz;
    out["label_balance"] = s.label_balance;
    return out;
  });

  m.def("run",
        [](const FiniteSumProblem& p, const Vector& x0, const VariantConfig& c,
           const std::optional<Dataset>& test) {
          RunHooks hooks;
          if (test) {
            hooks.test_error = [&test](const Vector& x) {
              return NllsLogisticProblem::classification_error(test->features, test->labels, x);
            };
          }
          RunTrace t;
          {
            py::gil_scoped_release release;
            t = run(p, x0, c, hooks);
          }
          return trace_dict(t);
        },
        py::arg("problem"), py::arg("x0"), py::arg("config"), py::arg("test") = py::none());
  m.def("initial_point", &initial_point, py::arg("d"), py::arg("seed"));

  m.def("props_for_iteration",
        [](std::size_t h, std::size_t g, std::size_t b, std::size_t gamma) {
          return props_for_iteration({h, g, b}, gamma);
        },
        py::arg("size_h"), py::arg("size_g"), py::arg("size_b"), py::arg("gamma"));
  m.def("per_iteration_delta", &per_iteration_delta, py::arg("delta"), py::arg("iterations"));
  m.def("gradient_sample_size", &gradient_sample_size, py::arg("d"), py::arg("delta0"),
        py::arg("lip_grad_bound"), py::arg("eps_g"));
  m.def("hessian_sample_size", &hessian_sample_size, py::arg("d"), py::arg("delta0"),
        py::arg("lip_hess_bound"), py::arg("eps_b"), py::arg("v0") = 1.0);
  m.def("function_sample_size", &function_sample_size, py::arg("d"), py::arg("delta0"),
        py::arg("kappa_f"), py::arg("eps_h"), py::arg("delta_c"));
  m.def("theorem_sample_size", &theorem_sample_size, py::arg("n"), py::arg("h1"), py::arg("h2"),
        py::arg("eps_g"), py::arg("eps_b"));
  m.def("lemma_tolerances", &lemma_tolerances, py::arg("algorithm"), py::arg("eps_grad_target"),
        py::arg("eps_hess_target"), py::arg("eta"));

  m.def("cauchy_point_tr", [](const Vector& g, const Matrix& b, double radius) {
    return solution_dict(cauchy_point_tr(g, SymmetricOperator::from_dense(b), radius));
  });
  m.def("steihaug_cg",
        [](const Vector& g, const Matrix& b, double radius, double tol, std::size_t max_iter) {
          return solution_dict(steihaug_cg(g, SymmetricOperator::from_dense(b), radius, tol, max_iter));
        },
        py::arg("g"), py::arg("b"), py::arg("radius"), py::arg("tol"), py::arg("max_iter"));
  m.def("cauchy_step_arc", [](const Vector& g, const Matrix& b, double b_norm, double sigma) {
    return solution_dict(cauchy_step_arc(g, SymmetricOperator::from_dense(b), b_norm, sigma));
  });
  m.def("refine_arc", [](const Vector& g, const Matrix& b, double sigma, const Vector& start) {
    return solution_dict(refine_arc(g, SymmetricOperator::from_dense(b), sigma, start));
  });
  m.def("lanczos_min_eig",
        [](const Matrix& b, double tol, std::uint64_t seed) {
          Rng rng(seed);
          const LanczosResult r = lanczos_min_eig(SymmetricOperator::from_dense(b), tol, 0, rng);
          return py::make_tuple(r.lambda_min_est, r.direction, r.hvp_count);
        },
        py::arg("b"), py::arg("tol") = 1e-8, py::arg("seed") = 0);
  m.def("dense_min_eig", [](const Matrix& b) {
    const EigenPair e = dense_min_eig(b);
    return py::make_tuple(e.value, e.vector);
  });
  m.def("self_check", [](std::uint64_t seed) {
    py::list rows;
    for (const SelfCheckRow& r : run_self_check(seed)) {
      py::dict d;
      d["name"] = r.name;
      d["instances"] = r.instances;
      d["failures"] = r.failures;
      d["worst_gap"] = r.worst_gap;
      d["passed"] = r.passed();
      rows.append(d);
    }
    return rows;
  }, py::arg("seed") = 0);
  m.def("emit_plot_data", [](const std::vector<std::string>& files, const std::string& metric,
                             std::size_t stride) {
    std::ostringstream os;
    emit_plot_data(files, parse_plot_metric(metric), stride, os);
    return os.str();
  }, py::arg("files"), py::arg("metric") = "train_loss", py::arg("stride") = 1);
}
