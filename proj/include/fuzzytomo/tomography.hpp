#pragma once

// Count simulation, maximum-likelihood reconstruction and chi-square
// adequacy of a measurement model.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "fuzzytomo/measurement.hpp"
#include "fuzzytomo/quantum_core.hpp"

namespace fuzzytomo {

/// Outcome counts n_{j,nu} per setting nu.
struct CountData {
  std::vector<std::vector<std::int64_t>> counts;

  std::int64_t exposure(std::size_t setting) const;
  std::vector<std::int64_t> exposures() const;
  std::int64_t total() const;
  std::size_t num_settings() const { return counts.size(); }
  /// 64-bit FNV-1a over the counts; equal hashes identify identical data.
  std::uint64_t hash() const;

  friend bool operator==(const CountData&, const CountData&) = default;
};

/// Splits n_tot evenly across settings; the remainder goes to the first settings.
std::vector<std::int64_t> split_exposures(std::int64_t n_tot, std::size_t n_settings);

/// p_j = Tr(rho Lambda_j), clipped to [0, 1]. Throws if the set is not
/// complete within 1e-10.
std::vector<double> outcome_probabilities(const DensityMatrix& rho, const OperatorSet& ops);
/// Pure-state shortcut <psi|Lambda_j|psi> (no completeness check).
std::vector<double> outcome_probabilities(const StateVector& psi, const OperatorSet& ops);

/// Multinomial draw by sequential conditional binomials.
template <typename Rng>
std::vector<std::int64_t> sample_counts(const std::vector<double>& probs, std::int64_t n, Rng& rng);

enum class Rank { pure, full };

struct MleOptions {
  Rank rank = Rank::pure;
  double tolerance = 1e-10;  // stop when the log-likelihood gain falls below this
  int max_iterations = 10000;
  bool record_trace = false;
};

struct ReconstructionResult {
  std::optional<StateVector> pure;  // set in Rank::pure mode
  DensityMatrix rho;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  bool regularized = false;  // a cell with counts hit the 1e-12 probability floor
  std::vector<double> trace;  // log-likelihood per iteration when requested
};

/// Log-likelihood sum n_{j,nu} log p_{j,nu}, probabilities floored at 1e-12.
double log_likelihood(const CountData& data, const std::vector<OperatorSet>& ops,
                      const DensityMatrix& rho);

/// Fixed-point likelihood ascent rho <- R rho R / Tr, R = sum (n/p) Lambda.
/// In pure mode the iterate stays rank one (psi <- R psi / |R psi|). A step
/// that would lower the likelihood is diluted towards the identity map, so the
/// likelihood is non-decreasing.
ReconstructionResult mle_reconstruct(const CountData& data, const std::vector<OperatorSet>& ops,
                                     const MleOptions& options = {});

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int cells = 0;
};

inline constexpr double kChiSquareMinExpected = 5.0;

/// Pearson statistic over cells with expectation >= 5; smaller cells of a
/// setting are pooled. dof = cells - settings - free_parameters. Throws
/// std::invalid_argument when dof <= 0.
ChiSquareResult chi_square_adequacy(const CountData& data,
                                    const std::vector<std::vector<double>>& fitted,
                                    int free_parameters);

/// Fitted probabilities of a pure estimate under a given operator model.
std::vector<std::vector<double>> fitted_probabilities(const StateVector& psi,
                                                      const std::vector<OperatorSet>& ops);

/// Counts file: a "# {json header}" line, then CSV (setting_index,outcome_label,count).
void write_counts_csv(std::ostream& out, const CountData& data, const std::vector<OperatorSet>& ops,
                      const nlohmann::json& header);
/// Inverse of write_counts_csv; returns the data and the parsed header.
std::pair<CountData, nlohmann::json> read_counts_csv(std::istream& in);

// ---------------------------------------------------------------------------

template <typename Rng>
std::vector<std::int64_t> sample_counts(const std::vector<double>& probs, std::int64_t n, Rng& rng) {
  if (n < 0) throw std::invalid_argument("sample_counts: negative sample size");
  double sum = 0.0;
  for (double p : probs) {
    if (p < -1e-12) throw std::invalid_argument("sample_counts: negative probability");
    sum += std::max(p, 0.0);
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("sample_counts: probabilities do not sum to 1");

  std::vector<std::int64_t> counts(probs.size(), 0);
  std::int64_t remaining = n;
  double mass = sum;
  for (std::size_t j = 0; j + 1 < probs.size() && remaining > 0; ++j) {
    const double p = std::max(probs[j], 0.0);
    const double q = mass > 0.0 ? std::clamp(p / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::int64_t> binom(remaining, q);
    counts[j] = binom(rng);
    remaining -= counts[j];
    mass -= p;
  }
  if (!probs.empty()) counts.back() += remaining;
  return counts;
}

}  // namespace fuzzytomo
