#pragma once

// Information matrix of a pure-state tomography protocol, the universal
// infidelity distribution it implies, loss/efficiency figures of merit and
// seeded Monte Carlo campaigns.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "fuzzytomo/measurement.hpp"
#include "fuzzytomo/tomography.hpp"

namespace fuzzytomo {

/// Fisher information restricted to the 2s - 2 real tangent directions of a
/// pure state (orthogonal to normalization and global phase). The tangent
/// coordinates are orthonormal, so 1 - F = |theta|^2 to second order.
struct InformationMatrix {
  int dim_params = 0;
  Eigen::MatrixXd matrix;
  std::vector<double> exposures;
};

/// d p / d theta for p = <psi|op|psi>, theta = (Re psi_0..Re psi_{s-1}, Im psi_0..Im psi_{s-1}).
Eigen::VectorXd probability_gradient(const CVector& psi, const CMatrix& op);

/// Orthonormal real basis (2s x (2s-2)) of the tangent space at psi.
Eigen::MatrixXd tangent_basis(const CVector& psi);

/// Full 2s x 2s multinomial Fisher information in the (Re, Im) coordinates.
Eigen::MatrixXd raw_information(const StateVector& psi, const std::vector<OperatorSet>& ops,
                                const std::vector<double>& exposures);

InformationMatrix information_matrix(const StateVector& psi, const std::vector<OperatorSet>& ops,
                                     const std::vector<double>& exposures);

inline constexpr double kUniversalCalibration = 1.0;

struct Histogram {
  std::vector<double> edges;    // bins + 1 edges
  std::vector<double> density;  // normalized so sum(density * width) = in-range fraction

  double mode_height() const;
  double mode_center() const;
};

Histogram make_histogram(const std::vector<double>& samples, int bins, double lo, double hi);

/// Value below which a fraction q of the samples lie (linear interpolation).
double quantile(std::vector<double> samples, double q);

struct InfidelityDistribution {
  std::vector<double> coefficients;  // d_j
  double predicted_mean = 0.0;       // sum d_j
  Histogram density;
};

/// d_j = calibration * eigenvalues of the inverse tangent-space information.
/// Throws std::domain_error if the matrix is singular (incomplete protocol).
std::vector<double> universal_coefficients(const InformationMatrix& info,
                                           double calibration = kUniversalCalibration);

/// 1 - F ~ sum_j d_j xi_j^2 with xi_j standard normal.
template <typename Rng>
double sample_universal(const std::vector<double>& coefficients, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  double v = 0.0;
  for (double d : coefficients) {
    const double x = gauss(rng);
    v += d * x * x;
  }
  return v;
}

InfidelityDistribution infidelity_distribution(const InformationMatrix& info, double calibration,
                                               std::uint64_t seed, int draws = 100000, int bins = 60);

struct LossEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// L = n_tot * mean(1 - F) with its standard error.
LossEstimate loss(std::int64_t n_tot, const std::vector<double>& infidelities);

/// ((s - 1) / n_tot) / mean_infidelity. Throws std::domain_error for a zero mean.
double efficiency(double mean_infidelity, int s, std::int64_t n_tot);

struct ExperimentConfig {
  std::string name = "campaign";
  int dim = 4;
  Symmetry symmetry = Symmetry::octahedron;
  double width_nm = 0.0;
  double lambda_s_um = 0.65;
  double lambda_p_um = 0.325;
  int hwp_order = 5;
  int qwp_order = 5;
  int spectral_points = kDefaultSpectralPoints;
  std::int64_t n_tot = 1000000;
  int n_exp = 200;
  std::uint64_t seed = 20220101;
  OperatorModel reconstruction_model = OperatorModel::fuzzy;
  OperatorModel data_model = OperatorModel::fuzzy;

  void validate() const;
  nlohmann::json to_json() const;
  /// Missing fields keep their defaults; unknown fields are rejected.
  static ExperimentConfig from_json(const nlohmann::json& j);
};

/// Protocol described by a configuration (plates designed at lambda_s).
MeasurementProtocol protocol_for(const ExperimentConfig& config);

struct RunRecord {
  int run_index = 0;
  double fidelity = 0.0;
  double infidelity = 0.0;
  double chi2 = 0.0;
  int dof = 0;
  double p_value = 0.0;  // NaN when the chi-square test is undefined
  bool converged = false;
  int iterations = 0;
  std::uint64_t count_hash = 0;
  std::vector<double> universal;  // d_j of the data model at the true state
  double predicted_infidelity = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunRecord> runs;
  double mean_infidelity = 0.0;
  double loss = 0.0;
  double loss_stderr = 0.0;
  double efficiency = 0.0;
  double efficiency_stderr = 0.0;
  double predicted_loss = 0.0;  // n_tot * mean of sum d_j over runs
  double predicted_loss_stderr = 0.0;
  double mean_state_efficiency = 0.0;  // mean over runs of (s - 1) / (n_tot sum d_j)
  double converged_fraction = 0.0;
  double runtime_s = 0.0;
  std::uint64_t protocol_hash = 0;

  std::vector<double> infidelities() const;
  nlohmann::json summary_json() const;
};

/// Recomputes the aggregate fields from `runs` and `config` (used after loading runs from disk).
void aggregate(ExperimentResult& result);

/// Counter-based per-run seed (splitmix64 of seed and index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Runs are independent and derive their own seeds, so results do not depend on `jobs`.
ExperimentResult run_campaign(const ExperimentConfig& config, int jobs = 1);

struct ModelComparison {
  ExperimentResult standard;
  ExperimentResult fuzzy;
  double loss_ratio = 0.0;  // standard loss over fuzzy loss
  bool paired = false;      // every run used identical counts in both arms
};

/// Reconstructs each simulated data set with both operator models.
ModelComparison compare_models(const ExperimentConfig& config, int jobs = 1);

struct SummaryRow {
  double width_nm = 0.0;
  double loss = 0.0;
  double loss_stderr = 0.0;
  double efficiency = 0.0;
  double efficiency_stderr = 0.0;
  double mean_infidelity = 0.0;
  double predicted_mean_infidelity = 0.0;
  double mode_height = 0.0;  // of the averaged universal distribution
};

struct Summary {
  std::vector<SummaryRow> rows;           // sorted by width
  std::vector<Histogram> universal;       // averaged universal densities, common bins
  std::vector<Histogram> empirical;       // Monte Carlo infidelities, same bins
  bool mean_infidelity_increasing = true;
  bool mode_height_decreasing = true;
};

inline constexpr int kHistogramBins = 60;

/// Per-width comparison table and histograms. Universal samples are drawn
/// `draws_per_run` times per run from each run's d_j.
Summary summarize(std::vector<ExperimentResult> results, int draws_per_run = 500,
                  std::uint64_t seed = 7, int bins = kHistogramBins);

}  // namespace fuzzytomo
