#include "fuzzytomo/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace fuzzytomo {

namespace {

constexpr double kProbFloor = 1e-12;

struct MeanStd {
  double mean = 0.0;
  double stderr_of_mean = 0.0;
};

MeanStd mean_and_stderr(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return out;
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  out.stderr_of_mean = sd / std::sqrt(static_cast<double>(v.size()));
  return out;
}

// Runs `body(i)` for i in [0, n) on `jobs` threads. Each index writes only its
// own output slot, so the result is independent of scheduling.
template <typename Body>
void parallel_for(int n, int jobs, Body&& body) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

struct SimulatedRun {
  StateVector truth;
  CountData data;
  std::vector<double> universal;
};

SimulatedRun simulate_run(const ExperimentConfig& config, const MeasurementProtocol& protocol,
                          const std::vector<std::int64_t>& exposures, int index) {
  std::mt19937_64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(index)));
  StateVector psi = haar_random_state(config.dim, rng);
  const auto& data_ops = protocol.operators(config.data_model);
  CountData data;
  data.counts.reserve(data_ops.size());
  for (std::size_t v = 0; v < data_ops.size(); ++v)
    data.counts.push_back(sample_counts(outcome_probabilities(psi, data_ops[v]), exposures[v], rng));
  std::vector<double> expo(exposures.begin(), exposures.end());
  auto d = universal_coefficients(information_matrix(psi, data_ops, expo));
  return {std::move(psi), std::move(data), std::move(d)};
}

RunRecord reconstruct_run(const SimulatedRun& sim, const std::vector<OperatorSet>& ops, int index) {
  RunRecord rec;
  rec.run_index = index;
  const auto fit = mle_reconstruct(sim.data, ops, {Rank::pure});
  rec.fidelity = fidelity_pure(*fit.pure, sim.truth);
  rec.infidelity = 1.0 - rec.fidelity;
  rec.converged = fit.converged;
  rec.iterations = fit.iterations;
  rec.count_hash = sim.data.hash();
  rec.universal = sim.universal;
  rec.predicted_infidelity = std::accumulate(sim.universal.begin(), sim.universal.end(), 0.0);
  try {
    const auto chi = chi_square_adequacy(sim.data, fitted_probabilities(*fit.pure, ops), 2 * sim.truth.dim() - 2);
    rec.chi2 = chi.statistic;
    rec.dof = chi.dof;
    rec.p_value = chi.p_value;
  } catch (const std::invalid_argument&) {
    rec.chi2 = std::numeric_limits<double>::quiet_NaN();
    rec.dof = 0;
    rec.p_value = std::numeric_limits<double>::quiet_NaN();
  }
  return rec;
}

}  // namespace

void aggregate(ExperimentResult& res) {
  const auto& cfg = res.config;
  const auto n = static_cast<double>(cfg.n_tot);
  const auto inf = res.infidelities();
  const auto l = loss(cfg.n_tot, inf);
  res.loss = l.value;
  res.loss_stderr = l.std_error;
  res.mean_infidelity = l.value / n;
  if (res.mean_infidelity > 0.0) {
    res.efficiency = efficiency(res.mean_infidelity, cfg.dim, cfg.n_tot);
    res.efficiency_stderr = res.efficiency * l.std_error / l.value;
  }
  std::vector<double> predicted, state_eff;
  int converged = 0;
  for (const auto& r : res.runs) {
    predicted.push_back(n * r.predicted_infidelity);
    state_eff.push_back((cfg.dim - 1) / (n * r.predicted_infidelity));
    converged += r.converged ? 1 : 0;
  }
  const auto p = mean_and_stderr(predicted);
  res.predicted_loss = p.mean;
  res.predicted_loss_stderr = p.stderr_of_mean;
  res.mean_state_efficiency = mean_and_stderr(state_eff).mean;
  res.converged_fraction = res.runs.empty() ? 0.0 : static_cast<double>(converged) / res.runs.size();
}

namespace {

// Shared driver: simulate each run once and reconstruct it with every model listed.
std::vector<ExperimentResult> run_models(const ExperimentConfig& config,
                                         const std::vector<OperatorModel>& models, int jobs) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const MeasurementProtocol protocol = protocol_for(config);
  const auto exposures = split_exposures(config.n_tot, protocol.num_settings());
  const std::uint64_t phash = protocol.hash();

  std::vector<ExperimentResult> results(models.size());
  for (std::size_t m = 0; m < models.size(); ++m) {
    results[m].config = config;
    results[m].config.reconstruction_model = models[m];
    results[m].runs.resize(static_cast<std::size_t>(config.n_exp));
    results[m].protocol_hash = phash;
  }
  parallel_for(config.n_exp, jobs, [&](int i) {
    const SimulatedRun sim = simulate_run(config, protocol, exposures, i);
    for (std::size_t m = 0; m < models.size(); ++m)
      results[m].runs[static_cast<std::size_t>(i)] = reconstruct_run(sim, protocol.operators(models[m]), i);
  });
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (auto& r : results) {
    aggregate(r);
    r.runtime_s = elapsed;
  }
  return results;
}

}  // namespace

Eigen::VectorXd probability_gradient(const CVector& psi, const CMatrix& op) {
  const Eigen::Index s = psi.size();
  const CVector lp = op * psi;
  Eigen::VectorXd g(2 * s);
  g.head(s) = 2.0 * lp.real();
  g.tail(s) = 2.0 * lp.imag();
  return g;
}

Eigen::MatrixXd tangent_basis(const CVector& psi) {
  const Eigen::Index s = psi.size();
  Eigen::VectorXd u(2 * s), v(2 * s);
  u << psi.real(), psi.imag();
  v << -psi.imag(), psi.real();
  u.normalize();
  v -= u.dot(v) * u;
  v.normalize();
  const Eigen::MatrixXd proj =
      Eigen::MatrixXd::Identity(2 * s, 2 * s) - u * u.transpose() - v * v.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(proj);
  // Eigenvalues ascend: two zeros (normalization, phase), then 2s - 2 ones.
  return es.eigenvectors().rightCols(2 * s - 2);
}

Eigen::MatrixXd raw_information(const StateVector& psi, const std::vector<OperatorSet>& ops,
                                const std::vector<double>& exposures) {
  if (ops.size() != exposures.size()) throw std::invalid_argument("information_matrix: exposures mismatch");
  const Eigen::Index s = psi.dim();
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(2 * s, 2 * s);
  for (std::size_t v = 0; v < ops.size(); ++v) {
    for (const auto& e : ops[v]) {
      const double p = std::max(psi.amplitudes().dot(e.op * psi.amplitudes()).real(), kProbFloor);
      const Eigen::VectorXd g = probability_gradient(psi.amplitudes(), e.op);
      info.noalias() += (exposures[v] / p) * g * g.transpose();
    }
  }
  return info;
}

InformationMatrix information_matrix(const StateVector& psi, const std::vector<OperatorSet>& ops,
                                     const std::vector<double>& exposures) {
  const Eigen::MatrixXd basis = tangent_basis(psi.amplitudes());
  Eigen::MatrixXd tangent = basis.transpose() * raw_information(psi, ops, exposures) * basis;
  tangent = 0.5 * (tangent + tangent.transpose());
  return {static_cast<int>(tangent.rows()), std::move(tangent), exposures};
}

std::vector<double> universal_coefficients(const InformationMatrix& info, double calibration) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info.matrix, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  if (!(top > 0.0) || ev.minCoeff() <= 1e-12 * top)
    throw std::domain_error("information matrix is singular: protocol is not informationally complete");
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = ev.size() - 1; i >= 0; --i) d.push_back(calibration / ev(i));
  return d;
}

double Histogram::mode_height() const {
  return density.empty() ? 0.0 : *std::max_element(density.begin(), density.end());
}

double Histogram::mode_center() const {
  if (density.empty()) return 0.0;
  const auto i = static_cast<std::size_t>(std::max_element(density.begin(), density.end()) - density.begin());
  return 0.5 * (edges[i] + edges[i + 1]);
}

Histogram make_histogram(const std::vector<double>& samples, int bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw std::invalid_argument("make_histogram: invalid binning");
  Histogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) h.edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / bins;
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  const double width = (hi - lo) / bins;
  for (double x : samples) {
    if (x < lo || x > hi) continue;
    auto b = static_cast<std::size_t>((x - lo) / width);
    if (b >= counts.size()) b = counts.size() - 1;
    counts[b] += 1.0;
  }
  h.density.resize(counts.size());
  const double norm = samples.empty() ? 1.0 : static_cast<double>(samples.size()) * width;
  for (std::size_t b = 0; b < counts.size(); ++b) h.density[b] = counts[b] / norm;
  return h;
}

double quantile(std::vector<double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("quantile: no samples");
  std::sort(samples.begin(), samples.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(samples.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= samples.size()) return samples.back();
  const double frac = pos - static_cast<double>(i);
  return samples[i] * (1.0 - frac) + samples[i + 1] * frac;
}

InfidelityDistribution infidelity_distribution(const InformationMatrix& info, double calibration,
                                               std::uint64_t seed, int draws, int bins) {
  if (draws < 1) throw std::invalid_argument("infidelity_distribution: draws must be >= 1");
  InfidelityDistribution out;
  out.coefficients = universal_coefficients(info, calibration);
  out.predicted_mean = std::accumulate(out.coefficients.begin(), out.coefficients.end(), 0.0);
  std::mt19937_64 rng(seed);
  std::vector<double> samples(static_cast<std::size_t>(draws));
  for (auto& x : samples) x = sample_universal(out.coefficients, rng);
  out.density = make_histogram(samples, bins, 0.0, quantile(samples, 0.999));
  return out;
}

LossEstimate loss(std::int64_t n_tot, const std::vector<double>& infidelities) {
  if (infidelities.empty()) throw std::invalid_argument("loss: no infidelities");
  const auto ms = mean_and_stderr(infidelities);
  const auto n = static_cast<double>(n_tot);
  return {n * ms.mean, n * ms.stderr_of_mean};
}

double efficiency(double mean_infidelity, int s, std::int64_t n_tot) {
  if (!(mean_infidelity > 0.0)) throw std::domain_error("efficiency: mean infidelity must be positive");
  return (static_cast<double>(s - 1) / static_cast<double>(n_tot)) / mean_infidelity;
}

void ExperimentConfig::validate() const {
  if (dim != 2 && dim != 4) throw std::invalid_argument("config: dim must be 2 or 4");
  if (n_tot < 1) throw std::invalid_argument("config: n_tot must be >= 1");
  if (n_exp < 1) throw std::invalid_argument("config: n_exp must be >= 1");
  if (!(width_nm >= 0.0)) throw std::invalid_argument("config: width_nm must be >= 0");
  if (!(lambda_s_um > lambda_p_um) || !(lambda_p_um > 0.0))
    throw std::invalid_argument("config: requires lambda_s > lambda_p > 0");
  if (hwp_order < 0 || qwp_order < 0) throw std::invalid_argument("config: plate orders must be >= 0");
  if (spectral_points < 1) throw std::invalid_argument("config: spectral_points must be >= 1");
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"name", name},
          {"dim", dim},
          {"symmetry", fuzzytomo::to_string(symmetry)},
          {"width_nm", width_nm},
          {"lambda_s_um", lambda_s_um},
          {"lambda_p_um", lambda_p_um},
          {"hwp_order", hwp_order},
          {"qwp_order", qwp_order},
          {"spectral_points", spectral_points},
          {"n_tot", n_tot},
          {"n_exp", n_exp},
          {"seed", seed},
          {"reconstruction_model", fuzzytomo::to_string(reconstruction_model)},
          {"data_model", fuzzytomo::to_string(data_model)}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  ExperimentConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "name") value.get_to(c.name);
    else if (key == "dim") value.get_to(c.dim);
    else if (key == "symmetry") c.symmetry = symmetry_from_string(value.get<std::string>());
    else if (key == "width_nm") value.get_to(c.width_nm);
    else if (key == "lambda_s_um") value.get_to(c.lambda_s_um);
    else if (key == "lambda_p_um") value.get_to(c.lambda_p_um);
    else if (key == "hwp_order") value.get_to(c.hwp_order);
    else if (key == "qwp_order") value.get_to(c.qwp_order);
    else if (key == "spectral_points") value.get_to(c.spectral_points);
    else if (key == "n_tot") value.get_to(c.n_tot);
    else if (key == "n_exp") value.get_to(c.n_exp);
    else if (key == "seed") value.get_to(c.seed);
    else if (key == "reconstruction_model") c.reconstruction_model = operator_model_from_string(value.get<std::string>());
    else if (key == "data_model") c.data_model = operator_model_from_string(value.get<std::string>());
    else throw std::invalid_argument("config: unknown field '" + key + "'");
  }
  c.validate();
  return c;
}

MeasurementProtocol protocol_for(const ExperimentConfig& config) {
  config.validate();
  const auto& quartz = DispersionModel::quartz();
  const double lambda0 = config.lambda_s_um;
  ArmApparatus arm{WavePlateSpec::from_order(PlateKind::half, config.hwp_order, lambda0, quartz),
                   WavePlateSpec::from_order(PlateKind::quarter, config.qwp_order, lambda0, quartz)};
  const double width_um = config.width_nm * 1e-3;
  const int points = width_um > 0.0 ? config.spectral_points : 1;
  const auto grid = spectral_grid(lambda0, width_um, config.lambda_p_um, points);
  return build_protocol(config.symmetry, config.dim, Apparatus{arm, arm}, grid, lambda0);
}

std::vector<double> ExperimentResult::infidelities() const {
  std::vector<double> v;
  v.reserve(runs.size());
  for (const auto& r : runs) v.push_back(r.infidelity);
  return v;
}

nlohmann::json ExperimentResult::summary_json() const {
  return {{"config", config.to_json()},
          {"L", loss},
          {"L_stderr", loss_stderr},
          {"Eff", efficiency},
          {"Eff_stderr", efficiency_stderr},
          {"mean_infidelity", mean_infidelity},
          {"predicted_L", predicted_loss},
          {"predicted_L_stderr", predicted_loss_stderr},
          {"mean_state_efficiency", mean_state_efficiency},
          {"converged_fraction", converged_fraction},
          {"protocol_hash", protocol_hash},
          {"runtime", runtime_s}};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ExperimentResult run_campaign(const ExperimentConfig& config, int jobs) {
  return std::move(run_models(config, {config.reconstruction_model}, jobs).front());
}

ModelComparison compare_models(const ExperimentConfig& config, int jobs) {
  auto results = run_models(config, {OperatorModel::standard, OperatorModel::fuzzy}, jobs);
  ModelComparison cmp{std::move(results[0]), std::move(results[1]), 0.0, true};
  for (std::size_t i = 0; i < cmp.standard.runs.size(); ++i)
    cmp.paired = cmp.paired && cmp.standard.runs[i].count_hash == cmp.fuzzy.runs[i].count_hash;
  cmp.loss_ratio = cmp.fuzzy.loss > 0.0 ? cmp.standard.loss / cmp.fuzzy.loss : std::numeric_limits<double>::infinity();
  return cmp;
}

Summary summarize(std::vector<ExperimentResult> results, int draws_per_run, std::uint64_t seed, int bins) {
  Summary out;
  if (results.empty()) return out;
  std::stable_sort(results.begin(), results.end(),
                   [](const auto& a, const auto& b) { return a.config.width_nm < b.config.width_nm; });

  std::vector<std::vector<double>> universal(results.size());
  std::vector<double> pooled;
  for (std::size_t r = 0; r < results.size(); ++r) {
    std::mt19937_64 rng(derive_seed(seed, r));
    for (const auto& run : results[r].runs)
      for (int k = 0; k < draws_per_run; ++k) universal[r].push_back(sample_universal(run.universal, rng));
    pooled.insert(pooled.end(), universal[r].begin(), universal[r].end());
  }
  const double hi = pooled.empty() ? 1.0 : quantile(pooled, 0.999);

  for (std::size_t r = 0; r < results.size(); ++r) {
    const auto& res = results[r];
    SummaryRow row;
    row.width_nm = res.config.width_nm;
    row.loss = res.loss;
    row.loss_stderr = res.loss_stderr;
    row.efficiency = res.efficiency;
    row.efficiency_stderr = res.efficiency_stderr;
    row.mean_infidelity = res.mean_infidelity;
    row.predicted_mean_infidelity = res.predicted_loss / static_cast<double>(res.config.n_tot);
    out.universal.push_back(make_histogram(universal[r], bins, 0.0, hi));
    out.empirical.push_back(make_histogram(res.infidelities(), bins, 0.0, hi));
    row.mode_height = out.universal.back().mode_height();
    out.rows.push_back(row);
  }
  for (std::size_t r = 1; r < out.rows.size(); ++r) {
    out.mean_infidelity_increasing =
        out.mean_infidelity_increasing && out.rows[r].mean_infidelity > out.rows[r - 1].mean_infidelity;
    out.mode_height_decreasing = out.mode_height_decreasing && out.rows[r].mode_height < out.rows[r - 1].mode_height;
  }
  return out;
}

}  // namespace fuzzytomo
