#include "fuzzytomo/tomography.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

namespace fuzzytomo {

namespace {

constexpr double kProbFloor = 1e-12;

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

// Cells with nonzero counts; zero-count cells contribute neither to the
// likelihood nor to R.
struct Cell {
  const CMatrix* op;
  double n;
};

std::vector<Cell> active_cells(const CountData& data, const std::vector<OperatorSet>& ops) {
  if (data.counts.size() != ops.size())
    throw std::invalid_argument("mle_reconstruct: settings in data and operator list differ");
  std::vector<Cell> cells;
  for (std::size_t v = 0; v < ops.size(); ++v) {
    if (data.counts[v].size() != ops[v].size())
      throw std::invalid_argument("mle_reconstruct: outcome count mismatch in setting " + std::to_string(v));
    for (std::size_t j = 0; j < ops[v].size(); ++j)
      if (data.counts[v][j] > 0) cells.push_back({&ops[v][j].op, static_cast<double>(data.counts[v][j])});
  }
  return cells;
}

// Log-likelihood at psi; optionally accumulates R psi.
double pure_objective(const std::vector<Cell>& cells, const CVector& psi, CVector* r_psi, bool* clipped) {
  double ll = 0.0;
  if (r_psi) r_psi->setZero(psi.size());
  for (const auto& c : cells) {
    const CVector lp = (*c.op) * psi;
    double p = psi.dot(lp).real();
    if (p < kProbFloor) {
      p = kProbFloor;
      if (clipped) *clipped = true;
    }
    ll += c.n * std::log(p);
    if (r_psi) *r_psi += (c.n / p) * lp;
  }
  return ll;
}

double mixed_objective(const std::vector<Cell>& cells, const CMatrix& rho, CMatrix* r, bool* clipped) {
  double ll = 0.0;
  if (r) r->setZero(rho.rows(), rho.cols());
  for (const auto& c : cells) {
    double p = (rho * (*c.op)).trace().real();
    if (p < kProbFloor) {
      p = kProbFloor;
      if (clipped) *clipped = true;
    }
    ll += c.n * std::log(p);
    if (r) *r += (c.n / p) * (*c.op);
  }
  return ll;
}

CMatrix hermitian_unit_trace(const CMatrix& m) {
  CMatrix h = 0.5 * (m + m.adjoint());
  return h / h.trace().real();
}

}  // namespace

std::int64_t CountData::exposure(std::size_t setting) const {
  std::int64_t n = 0;
  for (auto c : counts.at(setting)) n += c;
  return n;
}

std::vector<std::int64_t> CountData::exposures() const {
  std::vector<std::int64_t> out;
  out.reserve(counts.size());
  for (std::size_t v = 0; v < counts.size(); ++v) out.push_back(exposure(v));
  return out;
}

std::int64_t CountData::total() const {
  std::int64_t n = 0;
  for (std::size_t v = 0; v < counts.size(); ++v) n += exposure(v);
  return n;
}

std::uint64_t CountData::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& setting : counts) {
    const std::uint64_t size = setting.size();
    h = fnv1a(h, &size, sizeof size);
    h = fnv1a(h, setting.data(), setting.size() * sizeof(std::int64_t));
  }
  return h;
}

std::vector<std::int64_t> split_exposures(std::int64_t n_tot, std::size_t n_settings) {
  if (n_settings == 0) throw std::invalid_argument("split_exposures: no settings");
  if (n_tot < 0) throw std::invalid_argument("split_exposures: negative total");
  const auto m = static_cast<std::int64_t>(n_settings);
  std::vector<std::int64_t> out(n_settings, n_tot / m);
  for (std::int64_t i = 0; i < n_tot % m; ++i) ++out[static_cast<std::size_t>(i)];
  return out;
}

std::vector<double> outcome_probabilities(const DensityMatrix& rho, const OperatorSet& ops) {
  if (ops.empty()) throw std::invalid_argument("outcome_probabilities: empty operator set");
  CMatrix sum = CMatrix::Zero(rho.dim(), rho.dim());
  for (const auto& e : ops) {
    if (e.op.rows() != rho.dim()) throw std::invalid_argument("outcome_probabilities: dimension mismatch");
    sum += e.op;
  }
  if ((sum - CMatrix::Identity(rho.dim(), rho.dim())).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("outcome_probabilities: operator set is not complete");
  std::vector<double> p;
  p.reserve(ops.size());
  for (const auto& e : ops) {
    const double v = (rho.elements() * e.op).trace().real();
    p.push_back(std::abs(v) < 1e-12 ? 0.0 : std::clamp(v, 0.0, 1.0));
  }
  return p;
}

std::vector<double> outcome_probabilities(const StateVector& psi, const OperatorSet& ops) {
  std::vector<double> p;
  p.reserve(ops.size());
  for (const auto& e : ops) {
    if (e.op.rows() != psi.dim()) throw std::invalid_argument("outcome_probabilities: dimension mismatch");
    const double v = psi.amplitudes().dot(e.op * psi.amplitudes()).real();
    p.push_back(std::clamp(v, 0.0, 1.0));
  }
  return p;
}

double log_likelihood(const CountData& data, const std::vector<OperatorSet>& ops, const DensityMatrix& rho) {
  return mixed_objective(active_cells(data, ops), rho.elements(), nullptr, nullptr);
}

ReconstructionResult mle_reconstruct(const CountData& data, const std::vector<OperatorSet>& ops,
                                     const MleOptions& options) {
  if (ops.empty() || ops.front().empty()) throw std::invalid_argument("mle_reconstruct: no operators");
  const Eigen::Index s = ops.front().front().op.rows();
  const auto cells = active_cells(data, ops);
  double n_total = 0.0;
  for (const auto& c : cells) n_total += c.n;
  if (!(n_total > 0.0)) throw std::invalid_argument("mle_reconstruct: no counts");

  // One R rho R step from the maximally mixed state gives the starting point.
  const CMatrix mixed = CMatrix::Identity(s, s) / static_cast<double>(s);
  CMatrix r0;
  bool regularized = false;
  mixed_objective(cells, mixed, &r0, &regularized);
  regularized = false;

  ReconstructionResult res{std::nullopt, DensityMatrix(mixed), 0.0, 0, false, false, {}};

  if (options.rank == Rank::pure) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (r0 + r0.adjoint()));
    CVector psi = es.eigenvectors().col(s - 1).normalized();
    CVector r_psi(s);
    double ll = pure_objective(cells, psi, &r_psi, &regularized);
    if (options.record_trace) res.trace.push_back(ll);
    int it = 0;
    bool converged = false;
    for (; it < options.max_iterations; ++it) {
      CVector cand = r_psi.normalized();
      CVector r_cand(s);
      double ll_cand = pure_objective(cells, cand, &r_cand, &regularized);
      if (!(ll_cand >= ll)) {
        const CVector dir = r_psi / n_total - psi;
        double t = 0.5;
        for (; t > 1e-12; t *= 0.5) {
          cand = (psi + t * dir).normalized();
          ll_cand = pure_objective(cells, cand, &r_cand, &regularized);
          if (ll_cand >= ll) break;
        }
        if (!(ll_cand >= ll)) {
          converged = true;  // no ascent left at working precision
          break;
        }
      }
      const double gain = ll_cand - ll;
      psi = std::move(cand);
      r_psi = std::move(r_cand);
      ll = ll_cand;
      if (options.record_trace) res.trace.push_back(ll);
      if (gain < options.tolerance) {
        converged = true;
        ++it;
        break;
      }
    }
    // Fix the global phase so that the largest amplitude is real and positive.
    Eigen::Index imax = 0;
    psi.cwiseAbs().maxCoeff(&imax);
    psi *= std::polar(1.0, -std::arg(psi(imax)));
    StateVector estimate = StateVector::normalized(psi);
    res.rho = density_from_state(estimate);
    res.pure = std::move(estimate);
    res.log_likelihood = ll;
    res.iterations = it;
    res.converged = converged;
    res.regularized = regularized;
    return res;
  }

  CMatrix rho = hermitian_unit_trace(r0 * mixed * r0);
  CMatrix r(s, s);
  double ll = mixed_objective(cells, rho, &r, &regularized);
  if (options.record_trace) res.trace.push_back(ll);
  int it = 0;
  bool converged = false;
  const CMatrix id = CMatrix::Identity(s, s);
  for (; it < options.max_iterations; ++it) {
    CMatrix cand = hermitian_unit_trace(r * rho * r);
    CMatrix r_cand(s, s);
    double ll_cand = mixed_objective(cells, cand, &r_cand, &regularized);
    if (!(ll_cand >= ll)) {
      const CMatrix g = r / n_total - id;
      double t = 0.5;
      for (; t > 1e-12; t *= 0.5) {
        const CMatrix step = id + t * g;
        cand = hermitian_unit_trace(step * rho * step);
        ll_cand = mixed_objective(cells, cand, &r_cand, &regularized);
        if (ll_cand >= ll) break;
      }
      if (!(ll_cand >= ll)) {
        converged = true;
        break;
      }
    }
    const double gain = ll_cand - ll;
    rho = std::move(cand);
    r = std::move(r_cand);
    ll = ll_cand;
    if (options.record_trace) res.trace.push_back(ll);
    if (gain < options.tolerance) {
      converged = true;
      ++it;
      break;
    }
  }
  res.rho = DensityMatrix(hermitian_unit_trace(rho));
  res.log_likelihood = ll;
  res.iterations = it;
  res.converged = converged;
  res.regularized = regularized;
  return res;
}

ChiSquareResult chi_square_adequacy(const CountData& data, const std::vector<std::vector<double>>& fitted,
                                    int free_parameters) {
  if (fitted.size() != data.counts.size())
    throw std::invalid_argument("chi_square_adequacy: settings mismatch");
  ChiSquareResult out;
  for (std::size_t v = 0; v < data.counts.size(); ++v) {
    const auto& n = data.counts[v];
    const auto& p = fitted[v];
    if (n.size() != p.size()) throw std::invalid_argument("chi_square_adequacy: outcome mismatch");
    const double exposure = static_cast<double>(data.exposure(v));
    std::vector<std::pair<double, double>> kept;  // (observed, expected)
    double pooled_o = 0.0, pooled_e = 0.0;
    bool any_pooled = false;
    for (std::size_t j = 0; j < n.size(); ++j) {
      const double e = exposure * p[j];
      if (e >= kChiSquareMinExpected) {
        kept.emplace_back(static_cast<double>(n[j]), e);
      } else {
        pooled_o += static_cast<double>(n[j]);
        pooled_e += e;
        any_pooled = true;
      }
    }
    if (any_pooled) {
      if (pooled_e >= kChiSquareMinExpected || kept.empty()) {
        kept.emplace_back(pooled_o, pooled_e);
      } else {
        auto smallest = std::min_element(kept.begin(), kept.end(),
                                         [](const auto& a, const auto& b) { return a.second < b.second; });
        smallest->first += pooled_o;
        smallest->second += pooled_e;
      }
    }
    for (const auto& [o, e] : kept) {
      if (e > 0.0) out.statistic += (o - e) * (o - e) / e;
    }
    out.cells += static_cast<int>(kept.size());
  }
  out.dof = out.cells - static_cast<int>(data.counts.size()) - free_parameters;
  if (out.dof <= 0)
    throw std::invalid_argument("chi_square_adequacy: non-positive degrees of freedom (protocol too small)");
  out.p_value = boost::math::gamma_q(0.5 * out.dof, 0.5 * out.statistic);
  return out;
}

std::vector<std::vector<double>> fitted_probabilities(const StateVector& psi, const std::vector<OperatorSet>& ops) {
  std::vector<std::vector<double>> out;
  out.reserve(ops.size());
  for (const auto& set : ops) out.push_back(outcome_probabilities(psi, set));
  return out;
}

void write_counts_csv(std::ostream& out, const CountData& data, const std::vector<OperatorSet>& ops,
                      const nlohmann::json& header) {
  if (ops.size() != data.counts.size()) throw std::invalid_argument("write_counts_csv: settings mismatch");
  out << "# " << header.dump() << '\n';
  out << "setting_index,outcome_label,count\n";
  for (std::size_t v = 0; v < data.counts.size(); ++v)
    for (std::size_t j = 0; j < data.counts[v].size(); ++j)
      out << v << ',' << ops[v].at(j).label << ',' << data.counts[v][j] << '\n';
}

std::pair<CountData, nlohmann::json> read_counts_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw std::runtime_error("counts file: missing '# {json}' header line");
  nlohmann::json header = nlohmann::json::parse(line.substr(2));
  if (!std::getline(in, line) || line != "setting_index,outcome_label,count")
    throw std::runtime_error("counts file: unexpected column header");
  CountData data;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string idx, label, count;
    if (!std::getline(row, idx, ',') || !std::getline(row, label, ',') || !std::getline(row, count))
      throw std::runtime_error("counts file: malformed row '" + line + "'");
    const auto v = static_cast<std::size_t>(std::stoull(idx));
    if (v == data.counts.size()) data.counts.emplace_back();
    if (v + 1 != data.counts.size()) throw std::runtime_error("counts file: setting rows out of order");
    data.counts[v].push_back(std::stoll(count));
  }
  return {std::move(data), std::move(header)};
}

}  // namespace fuzzytomo
