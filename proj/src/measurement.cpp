#include "fuzzytomo/measurement.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace fuzzytomo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::array<const char*, 2> kArmLabels{"V", "H"};

CMatrix arm_projector(int outcome) {
  CMatrix p = CMatrix::Zero(2, 2);
  p(outcome, outcome) = 1.0;
  return p;
}

Eigen::Matrix2cd arm_unitary(const ArmApparatus& arm, const ArmAngles& angles, double lambda_um) {
  return basis_unitary(WavePlateSetting(arm.hwp, angles.hwp), WavePlateSetting(arm.qwp, angles.qwp),
                       lambda_um);
}

// Residual of U^dag P_V U - target, flattened to 8 reals.
struct ProjectorResidual {
  ArmApparatus arm;
  double lambda_um;
  CMatrix target;

  Eigen::Matrix<double, 8, 1> operator()(const Eigen::Vector2d& x) const {
    const Eigen::Matrix2cd u = arm_unitary(arm, {x(0), x(1)}, lambda_um);
    const Eigen::Matrix2cd rotated = u.adjoint() * arm_projector(0) * u;
    const Eigen::Matrix2cd diff = rotated - target;
    Eigen::Matrix<double, 8, 1> r;
    for (int i = 0; i < 4; ++i) {
      r(2 * i) = diff(i % 2, i / 2).real();
      r(2 * i + 1) = diff(i % 2, i / 2).imag();
    }
    return r;
  }
};

// Levenberg-Marquardt on the 2-parameter projector match. Returns the final
// residual norm.
double solve_angles(const ProjectorResidual& f, Eigen::Vector2d& x) {
  constexpr double h = 1e-7;
  double mu = 1e-3;
  Eigen::Matrix<double, 8, 1> r = f(x);
  double cost = r.squaredNorm();
  for (int iter = 0; iter < 200 && cost > 1e-30; ++iter) {
    Eigen::Matrix<double, 8, 2> jac;
    for (int p = 0; p < 2; ++p) {
      Eigen::Vector2d xp = x, xm = x;
      xp(p) += h;
      xm(p) -= h;
      jac.col(p) = (f(xp) - f(xm)) / (2.0 * h);
    }
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Eigen::Vector2d g = jac.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::Matrix2d a = jtj;
      a.diagonal().array() += mu * (1.0 + jtj.diagonal().array());
      const Eigen::Vector2d step = a.ldlt().solve(-g);
      const Eigen::Vector2d trial = x + step;
      const auto rt = f(trial);
      const double ct = rt.squaredNorm();
      if (ct < cost) {
        x = trial;
        r = rt;
        const double gain = cost - ct;
        cost = ct;
        mu = std::max(mu * 0.3, 1e-12);
        improved = true;
        if (gain < 1e-32) iter = 1000;
        break;
      }
      mu *= 10.0;
    }
    if (!improved) break;
  }
  return std::sqrt(cost);
}

double round_significant(double v, int digits) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::stod(buf);
}

nlohmann::json matrix_to_json(const CMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json plate_to_json(const WavePlateSpec& p) {
  return {{"kind", to_string(p.kind)},
          {"order", p.order},
          {"thickness_um", p.thickness_um},
          {"design_wavelength_um", p.design_wavelength_um},
          {"dispersion", p.dispersion.name}};
}

nlohmann::json angles_to_json(const ArmAngles& a) {
  return {{"hwp", round_significant(a.hwp, 12)}, {"qwp", round_significant(a.qwp, 12)}};
}

OperatorSet hermitized(OperatorSet set) {
  for (auto& e : set) e.op = (0.5 * (e.op + e.op.adjoint())).eval();
  return set;
}

}  // namespace

std::string to_string(Symmetry s) { return s == Symmetry::cube ? "cube" : "octahedron"; }

Symmetry symmetry_from_string(const std::string& s) {
  if (s == "cube") return Symmetry::cube;
  if (s == "octahedron") return Symmetry::octahedron;
  throw std::invalid_argument("unknown symmetry '" + s + "'");
}

std::string to_string(OperatorModel m) { return m == OperatorModel::standard ? "standard" : "fuzzy"; }

OperatorModel operator_model_from_string(const std::string& s) {
  if (s == "standard") return OperatorModel::standard;
  if (s == "fuzzy") return OperatorModel::fuzzy;
  throw std::invalid_argument("unknown operator model '" + s + "'");
}

ArmApparatus ArmApparatus::of_order(int order, double lambda0_um, const DispersionModel& model) {
  return {WavePlateSpec::from_order(PlateKind::half, order, lambda0_um, model),
          WavePlateSpec::from_order(PlateKind::quarter, order, lambda0_um, model)};
}

Apparatus Apparatus::symmetric(int order, double lambda0_um, const DispersionModel& model) {
  const auto arm = ArmApparatus::of_order(order, lambda0_um, model);
  return {arm, arm};
}

std::vector<Eigen::Vector3d> protocol_directions(Symmetry symmetry) {
  if (symmetry == Symmetry::cube) return {Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ()};
  const double c = 1.0 / std::sqrt(3.0);
  return {Eigen::Vector3d(c, c, c), Eigen::Vector3d(c, -c, -c), Eigen::Vector3d(-c, c, -c),
          Eigen::Vector3d(-c, -c, c)};
}

ArmAngles angles_for_direction(const Eigen::Vector3d& direction, const ArmApparatus& arm,
                               double lambda0_um) {
  const double norm = direction.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("angles_for_direction: zero direction");
  const ProjectorResidual f{arm, lambda0_um, bloch_projector(direction / norm)};

  constexpr int kGrid = 16;
  std::optional<ArmAngles> best;
  double best_key = 0.0;
  for (int i = 1; i <= kGrid; ++i) {
    for (int j = 1; j <= kGrid; ++j) {
      Eigen::Vector2d x(i * kPi / kGrid - kPi / 2, j * kPi / kGrid - kPi / 2);
      const double res = solve_angles(f, x);
      if (res > 1e-10) continue;
      const ArmAngles cand{wrap_plate_angle(x(0)), wrap_plate_angle(x(1))};
      const double key = std::abs(cand.hwp) + std::abs(cand.qwp);
      if (!best || key < best_key - 1e-9 || (std::abs(key - best_key) <= 1e-9 && cand.hwp < best->hwp - 1e-9)) {
        best = cand;
        best_key = key;
      }
    }
  }
  if (!best) throw std::runtime_error("angles_for_direction: solver did not converge");
  return *best;
}

OperatorSet ideal_projectors(const ProtocolSetting& setting, const Apparatus& apparatus,
                             double lambda0_um, int dim) {
  if (dim != 2 && dim != 4) throw std::invalid_argument("ideal_projectors: dim must be 2 or 4");
  const Eigen::Matrix2cd us = arm_unitary(apparatus.signal, setting.signal, lambda0_um);
  std::array<CMatrix, 2> sig;
  for (int a = 0; a < 2; ++a) sig[a] = us.adjoint() * arm_projector(a) * us;
  OperatorSet out;
  if (dim == 2) {
    for (int a = 0; a < 2; ++a) out.push_back({sig[a], kArmLabels[a]});
    return hermitized(std::move(out));
  }
  if (!setting.idler) throw std::invalid_argument("ideal_projectors: dim 4 needs idler angles");
  const Eigen::Matrix2cd ui = arm_unitary(apparatus.idler, *setting.idler, lambda0_um);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      out.push_back({tensor(sig[a], CMatrix(ui.adjoint() * arm_projector(b) * ui)),
                     std::string(kArmLabels[a]) + kArmLabels[b]});
  return hermitized(std::move(out));
}

OperatorSet fuzzy_povm(const ProtocolSetting& setting, const Apparatus& apparatus,
                       const SpectralGrid& spectral, int dim) {
  if (dim != 2 && dim != 4) throw std::invalid_argument("fuzzy_povm: dim must be 2 or 4");
  if (spectral.points.empty()) throw std::invalid_argument("fuzzy_povm: empty spectral grid");
  double total = 0.0;
  for (const auto& p : spectral.points) {
    if (!(p.weight >= 0.0)) throw std::invalid_argument("fuzzy_povm: negative spectral weight");
    total += p.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("fuzzy_povm: weights do not sum to 1");
  if (dim == 4 && !setting.idler) throw std::invalid_argument("fuzzy_povm: dim 4 needs idler angles");

  OperatorSet out;
  if (dim == 2) {
    for (int a = 0; a < 2; ++a) out.push_back({CMatrix::Zero(2, 2), kArmLabels[a]});
  } else {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        out.push_back({CMatrix::Zero(4, 4), std::string(kArmLabels[a]) + kArmLabels[b]});
  }

  for (const auto& point : spectral.points) {
    const Eigen::Matrix2cd us = arm_unitary(apparatus.signal, setting.signal, point.lambda_um);
    std::array<CMatrix, 2> sig;
    for (int a = 0; a < 2; ++a) sig[a] = us.adjoint() * arm_projector(a) * us;
    if (dim == 2) {
      for (int a = 0; a < 2; ++a) out[a].op += point.weight * sig[a];
      continue;
    }
    const double lambda_i = idler_wavelength(point.lambda_um, spectral.pump_um);
    const Eigen::Matrix2cd ui = arm_unitary(apparatus.idler, *setting.idler, lambda_i);
    for (int b = 0; b < 2; ++b) {
      const CMatrix idl = ui.adjoint() * arm_projector(b) * ui;
      for (int a = 0; a < 2; ++a) out[2 * a + b].op += point.weight * tensor(sig[a], idl);
    }
  }
  return hermitized(std::move(out));
}

MeasurementProtocol build_protocol(Symmetry symmetry, int dim, const Apparatus& apparatus,
                                   const SpectralGrid& spectral, double lambda0_um) {
  if (dim != 2 && dim != 4) throw std::invalid_argument("build_protocol: dim must be 2 or 4");
  MeasurementProtocol proto;
  proto.dim = dim;
  proto.symmetry = symmetry;
  proto.apparatus = apparatus;
  proto.spectral = spectral;
  proto.design_wavelength_um = lambda0_um;

  const auto dirs = protocol_directions(symmetry);
  static const char* kCubeNames[] = {"x", "y", "z"};
  auto name = [&](std::size_t i) {
    return symmetry == Symmetry::cube ? std::string(kCubeNames[i]) : "t" + std::to_string(i + 1);
  };
  std::vector<ArmAngles> sig, idl;
  for (const auto& d : dirs) {
    sig.push_back(angles_for_direction(d, apparatus.signal, lambda0_um));
    if (dim == 4) idl.push_back(angles_for_direction(d, apparatus.idler, lambda0_um));
  }
  if (dim == 2) {
    for (std::size_t i = 0; i < dirs.size(); ++i) proto.settings.push_back({sig[i], std::nullopt, name(i)});
  } else {
    for (std::size_t i = 0; i < dirs.size(); ++i)
      for (std::size_t j = 0; j < dirs.size(); ++j)
        proto.settings.push_back({sig[i], idl[j], name(i) + "|" + name(j)});
  }
  for (const auto& s : proto.settings) {
    proto.ideal.push_back(ideal_projectors(s, apparatus, lambda0_um, dim));
    proto.fuzzy.push_back(fuzzy_povm(s, apparatus, spectral, dim));
  }
  return proto;
}

nlohmann::json MeasurementProtocol::to_json() const {
  nlohmann::json j;
  j["dim"] = dim;
  j["symmetry"] = to_string(symmetry);
  j["design_wavelength_um"] = design_wavelength_um;
  j["apparatus"] = {{"signal", {{"hwp", plate_to_json(apparatus.signal.hwp)}, {"qwp", plate_to_json(apparatus.signal.qwp)}}},
                    {"idler", {{"hwp", plate_to_json(apparatus.idler.hwp)}, {"qwp", plate_to_json(apparatus.idler.qwp)}}}};
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : spectral.points) pts.push_back({p.lambda_um, p.weight});
  j["spectral"] = {{"center_um", spectral.center_um},
                   {"width_um", spectral.width_um},
                   {"pump_um", spectral.pump_um},
                   {"points", pts}};
  nlohmann::json settings_j = nlohmann::json::array();
  for (std::size_t i = 0; i < settings.size(); ++i) {
    const auto& s = settings[i];
    nlohmann::json sj{{"label", s.label}, {"signal", angles_to_json(s.signal)}};
    if (s.idler) sj["idler"] = angles_to_json(*s.idler);
    auto ops = [](const OperatorSet& set) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& e : set) arr.push_back({{"label", e.label}, {"matrix", matrix_to_json(e.op)}});
      return arr;
    };
    sj["ideal"] = ops(ideal[i]);
    sj["fuzzy"] = ops(fuzzy[i]);
    settings_j.push_back(std::move(sj));
  }
  j["settings"] = std::move(settings_j);
  return j;
}

std::uint64_t MeasurementProtocol::hash() const {
  const std::string s = to_json().dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

int operator_span_rank(const std::vector<OperatorSet>& sets, double tol) {
  if (sets.empty() || sets.front().empty()) return 0;
  const Eigen::Index s = sets.front().front().op.rows();
  const Eigen::Index cols = 2 * s * s;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(cols, cols);
  for (const auto& set : sets) {
    for (const auto& e : set) {
      Eigen::VectorXd v(cols);
      for (Eigen::Index k = 0; k < s * s; ++k) {
        v(2 * k) = e.op(k % s, k / s).real();
        v(2 * k + 1) = e.op(k % s, k / s).imag();
      }
      gram += v * v.transpose();
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  return static_cast<int>((es.eigenvalues().array() > tol * top).count());
}

double completeness_error(const std::vector<OperatorSet>& sets) {
  double worst = 0.0;
  for (const auto& set : sets) {
    if (set.empty()) continue;
    CMatrix sum = CMatrix::Zero(set.front().op.rows(), set.front().op.cols());
    for (const auto& e : set) sum += e.op;
    worst = std::max(worst, (sum - CMatrix::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace fuzzytomo
