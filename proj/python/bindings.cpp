#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fuzzytomo/analysis.hpp"
#include "fuzzytomo/presets.hpp"

namespace py = pybind11;
using namespace fuzzytomo;

namespace {

nlohmann::json to_cpp_json(const py::object& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return nlohmann::json::parse(text);
}

py::object to_py_json(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

PlateKind plate_kind(const std::string& s) { return plate_kind_from_string(s); }

std::vector<OperatorSet> operator_sets(const std::vector<std::vector<CMatrix>>& raw) {
  std::vector<OperatorSet> sets;
  for (const auto& setting : raw) {
    OperatorSet set;
    for (const auto& op : setting) set.push_back({op, ""});
    sets.push_back(std::move(set));
  }
  return sets;
}

std::vector<std::vector<CMatrix>> raw_sets(const std::vector<OperatorSet>& sets) {
  std::vector<std::vector<CMatrix>> out;
  for (const auto& set : sets) {
    std::vector<CMatrix> ops;
    for (const auto& e : set) ops.push_back(e.op);
    out.push_back(std::move(ops));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Polarization-qubit tomography with spectrally blurred wave-plate measurements";

  py::enum_<Symmetry>(m, "Symmetry").value("cube", Symmetry::cube).value("octahedron", Symmetry::octahedron);
  py::enum_<OperatorModel>(m, "OperatorModel")
      .value("standard", OperatorModel::standard)
      .value("fuzzy", OperatorModel::fuzzy);

  // Optics, quartz dispersion throughout.
  m.def("refractive_indices", [](double lambda_um) {
    const auto& q = DispersionModel::quartz();
    return std::make_pair(q.n_ordinary(lambda_um), q.n_extraordinary(lambda_um));
  }, py::arg("lambda_um"), "(n_o, n_e) of quartz.");
  m.def("birefringence", [](double lambda_um) { return birefringence(DispersionModel::quartz(), lambda_um); },
        py::arg("lambda_um"));
  m.def("plate_thickness", [](const std::string& kind, int order, double lambda0_um) {
    return plate_thickness(plate_kind(kind), order, lambda0_um);
  }, py::arg("kind"), py::arg("order"), py::arg("lambda0_um"), "Thickness in micrometres; kind is 'half' or 'quarter'.");
  m.def("optical_thickness", [](double h, double lambda_um) { return optical_thickness(h, lambda_um); },
        py::arg("thickness_um"), py::arg("lambda_um"));
  m.def("waveplate_unitary", [](double delta, double alpha) { return Eigen::Matrix2cd(waveplate_unitary(delta, alpha)); },
        py::arg("delta"), py::arg("alpha"));
  m.def("basis_unitary", [](double alpha, double beta, double lambda_um, int order, double lambda0_um) {
    const auto arm = ArmApparatus::of_order(order, lambda0_um);
    return Eigen::Matrix2cd(basis_unitary({arm.hwp, alpha}, {arm.qwp, beta}, lambda_um));
  }, py::arg("alpha"), py::arg("beta"), py::arg("lambda_um"), py::arg("order") = 5, py::arg("lambda0_um") = 0.65);
  m.def("idler_wavelength", &idler_wavelength, py::arg("lambda_s_um"), py::arg("lambda_p_um"));

  // States.
  m.def("haar_random_state", [](int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return CVector(haar_random_state(dim, rng).amplitudes());
  }, py::arg("dim"), py::arg("seed"));
  m.def("fidelity", [](const CVector& a, const CVector& b) {
    return fidelity_pure(StateVector::normalized(a), StateVector::normalized(b));
  }, py::arg("phi"), py::arg("psi"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("name", &ExperimentConfig::name)
      .def_readwrite("dim", &ExperimentConfig::dim)
      .def_readwrite("symmetry", &ExperimentConfig::symmetry)
      .def_readwrite("width_nm", &ExperimentConfig::width_nm)
      .def_readwrite("lambda_s_um", &ExperimentConfig::lambda_s_um)
      .def_readwrite("lambda_p_um", &ExperimentConfig::lambda_p_um)
      .def_readwrite("hwp_order", &ExperimentConfig::hwp_order)
      .def_readwrite("qwp_order", &ExperimentConfig::qwp_order)
      .def_readwrite("spectral_points", &ExperimentConfig::spectral_points)
      .def_readwrite("n_tot", &ExperimentConfig::n_tot)
      .def_readwrite("n_exp", &ExperimentConfig::n_exp)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("reconstruction_model", &ExperimentConfig::reconstruction_model)
      .def_readwrite("data_model", &ExperimentConfig::data_model)
      .def("validate", &ExperimentConfig::validate)
      .def("to_dict", [](const ExperimentConfig& c) { return to_py_json(c.to_json()); })
      .def_static("from_dict", [](const py::dict& d) { return ExperimentConfig::from_json(to_cpp_json(d)); })
      .def("__repr__", [](const ExperimentConfig& c) { return "ExperimentConfig(" + c.to_json().dump() + ")"; });

  py::class_<MeasurementProtocol>(m, "Protocol")
      .def_readonly("dim", &MeasurementProtocol::dim)
      .def_readonly("symmetry", &MeasurementProtocol::symmetry)
      .def_property_readonly("num_settings", &MeasurementProtocol::num_settings)
      .def_property_readonly("ideal", [](const MeasurementProtocol& p) { return raw_sets(p.ideal); })
      .def_property_readonly("fuzzy", [](const MeasurementProtocol& p) { return raw_sets(p.fuzzy); })
      .def_property_readonly("angles", [](const MeasurementProtocol& p) {
        std::vector<std::vector<double>> out;
        for (const auto& s : p.settings) {
          std::vector<double> row{s.signal.hwp, s.signal.qwp};
          if (s.idler) row.insert(row.end(), {s.idler->hwp, s.idler->qwp});
          out.push_back(std::move(row));
        }
        return out;
      }, "Per setting: (alpha, beta) or (alpha, beta, gamma, theta).")
      .def("hash", &MeasurementProtocol::hash)
      .def("completeness_error", [](const MeasurementProtocol& p, OperatorModel model) {
        return completeness_error(p.operators(model));
      }, py::arg("model") = OperatorModel::fuzzy)
      .def("informationally_complete", [](const MeasurementProtocol& p, OperatorModel model) {
        return informationally_complete(p.operators(model), p.dim);
      }, py::arg("model") = OperatorModel::fuzzy)
      .def("to_dict", [](const MeasurementProtocol& p) { return to_py_json(p.to_json()); });

  m.def("protocol_for", &protocol_for, py::arg("config"));

  m.def("sample_counts", [](const std::vector<double>& probs, std::int64_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_counts(probs, n, rng);
  }, py::arg("probs"), py::arg("n"), py::arg("seed"));

  m.def("mle_reconstruct", [](const std::vector<std::vector<std::int64_t>>& counts,
                              const std::vector<std::vector<CMatrix>>& ops, bool pure, double tolerance,
                              int max_iterations) {
    MleOptions opt;
    opt.rank = pure ? Rank::pure : Rank::full;
    opt.tolerance = tolerance;
    opt.max_iterations = max_iterations;
    const auto r = mle_reconstruct(CountData{counts}, operator_sets(ops), opt);
    py::dict out;
    out["rho"] = CMatrix(r.rho.elements());
    out["state"] = r.pure ? py::cast(CVector(r.pure->amplitudes())) : py::none();
    out["log_likelihood"] = r.log_likelihood;
    out["iterations"] = r.iterations;
    out["converged"] = r.converged;
    return out;
  }, py::arg("counts"), py::arg("operators"), py::arg("pure") = true, py::arg("tolerance") = 1e-10,
     py::arg("max_iterations") = 10000);

  m.def("information_matrix", [](const CVector& psi, const std::vector<std::vector<CMatrix>>& ops,
                                 const std::vector<double>& exposures) {
    return Eigen::MatrixXd(information_matrix(StateVector::normalized(psi), operator_sets(ops), exposures).matrix);
  }, py::arg("psi"), py::arg("operators"), py::arg("exposures"));
  m.def("universal_coefficients", [](const CVector& psi, const std::vector<std::vector<CMatrix>>& ops,
                                     const std::vector<double>& exposures) {
    return universal_coefficients(information_matrix(StateVector::normalized(psi), operator_sets(ops), exposures));
  }, py::arg("psi"), py::arg("operators"), py::arg("exposures"),
     "Eigenvalues d_j with 1 - F ~ sum_j d_j xi_j^2.");

  py::class_<ExperimentResult>(m, "CampaignResult")
      .def_readonly("config", &ExperimentResult::config)
      .def_readonly("loss", &ExperimentResult::loss)
      .def_readonly("loss_stderr", &ExperimentResult::loss_stderr)
      .def_readonly("efficiency", &ExperimentResult::efficiency)
      .def_readonly("efficiency_stderr", &ExperimentResult::efficiency_stderr)
      .def_readonly("predicted_loss", &ExperimentResult::predicted_loss)
      .def_readonly("predicted_loss_stderr", &ExperimentResult::predicted_loss_stderr)
      .def_readonly("mean_infidelity", &ExperimentResult::mean_infidelity)
      .def_readonly("converged_fraction", &ExperimentResult::converged_fraction)
      .def_property_readonly("infidelities", &ExperimentResult::infidelities)
      .def_property_readonly("p_values", [](const ExperimentResult& r) {
        std::vector<double> p;
        for (const auto& run : r.runs) p.push_back(run.p_value);
        return p;
      })
      .def("summary", [](const ExperimentResult& r) { return to_py_json(r.summary_json()); });

  m.def("run_campaign", &run_campaign, py::arg("config"), py::arg("jobs") = 1,
        py::call_guard<py::gil_scoped_release>());

  py::class_<ModelComparison>(m, "Comparison")
      .def_readonly("standard", &ModelComparison::standard)
      .def_readonly("fuzzy", &ModelComparison::fuzzy)
      .def_readonly("loss_ratio", &ModelComparison::loss_ratio)
      .def_readonly("paired", &ModelComparison::paired);
  m.def("compare_models", &compare_models, py::arg("config"), py::arg("jobs") = 1,
        py::call_guard<py::gil_scoped_release>());

  m.def("presets", [] {
    py::list out;
    for (const auto& p : presets()) {
      py::dict d;
      d["name"] = p.name;
      d["description"] = p.description;
      d["config"] = p.config;
      d["full_n_exp"] = p.full_n_exp;
      if (p.loss) d["loss_band"] = std::make_pair(p.loss->lo(), p.loss->hi());
      if (p.efficiency) d["efficiency_band"] = std::make_pair(p.efficiency->lo(), p.efficiency->hi());
      if (p.loss_ratio) d["loss_ratio_band"] = std::make_pair(p.loss_ratio->lo(), p.loss_ratio->hi());
      out.append(d);
    }
    return out;
  });
}
