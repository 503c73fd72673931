#pragma once

// Polyhedral tomography protocols realised with a half- and a quarter-wave
// plate per arm, with both ideal projectors and spectrally averaged (fuzzy)
// measurement operators.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fuzzytomo/optics.hpp"
#include "fuzzytomo/quantum_core.hpp"

namespace fuzzytomo {

/// Polyhedron whose face normals give the measured Bloch directions.
///   cube:       6 faces -> 3 antipodal pairs (x, y, z), mutually unbiased bases
///   octahedron: 8 faces -> 4 antipodal pairs (+-1, +-1, +-1)/sqrt(3)
enum class Symmetry { cube, octahedron };

enum class OperatorModel { standard, fuzzy };

std::string to_string(Symmetry s);
Symmetry symmetry_from_string(const std::string& s);
std::string to_string(OperatorModel m);
OperatorModel operator_model_from_string(const std::string& s);

/// Half- then quarter-wave plate in one spatial mode.
struct ArmApparatus {
  WavePlateSpec hwp;
  WavePlateSpec qwp;

  static ArmApparatus of_order(int order, double lambda0_um,
                               const DispersionModel& model = DispersionModel::quartz());
};

struct Apparatus {
  ArmApparatus signal;
  ArmApparatus idler;

  /// Same crystal and order in both arms.
  static Apparatus symmetric(int order, double lambda0_um,
                             const DispersionModel& model = DispersionModel::quartz());
};

struct ArmAngles {
  double hwp = 0.0;  // alpha (signal) or gamma (idler)
  double qwp = 0.0;  // beta (signal) or theta (idler)
};

struct ProtocolSetting {
  ArmAngles signal;
  std::optional<ArmAngles> idler;
  std::string label;
};

struct POVMElement {
  CMatrix op;
  std::string label;
};

using OperatorSet = std::vector<POVMElement>;

struct MeasurementProtocol {
  int dim = 2;
  Symmetry symmetry = Symmetry::cube;
  Apparatus apparatus;
  SpectralGrid spectral;
  double design_wavelength_um = 0.65;
  std::vector<ProtocolSetting> settings;
  std::vector<OperatorSet> ideal;
  std::vector<OperatorSet> fuzzy;

  const std::vector<OperatorSet>& operators(OperatorModel model) const {
    return model == OperatorModel::standard ? ideal : fuzzy;
  }
  std::size_t num_settings() const { return settings.size(); }

  /// Settings with angles (12 significant digits), operators as [re, im]
  /// pairs, spectral grid and apparatus.
  nlohmann::json to_json() const;
  /// 64-bit FNV-1a of the serialized protocol.
  std::uint64_t hash() const;
};

/// One representative Bloch direction per measured basis.
std::vector<Eigen::Vector3d> protocol_directions(Symmetry symmetry);

/// Plate angles for which U^dag P_V U equals (I + n.sigma)/2 at lambda0
/// (Frobenius residual below 1e-8). Among all solutions the smallest
/// |alpha| + |beta| wins, then the smallest alpha.
ArmAngles angles_for_direction(const Eigen::Vector3d& direction, const ArmApparatus& arm,
                               double lambda0_um);

/// U^dag P_j U at lambda0; tensor product over arms for dim 4 in (VV, VH, HV, HH) order.
OperatorSet ideal_projectors(const ProtocolSetting& setting, const Apparatus& apparatus,
                             double lambda0_um, int dim);

/// Lambda_j = sum_k P(lambda_k) U_k^dag P_j U_k. For dim 4 the idler arm sees
/// the phase-matched wavelength of each signal sample.
OperatorSet fuzzy_povm(const ProtocolSetting& setting, const Apparatus& apparatus,
                       const SpectralGrid& spectral, int dim);

/// Single-arm settings for dim 2; Cartesian product of arm settings for dim 4.
MeasurementProtocol build_protocol(Symmetry symmetry, int dim, const Apparatus& apparatus,
                                   const SpectralGrid& spectral, double lambda0_um);

/// Rank of the Gram matrix of vectorized operators; s^2 means informationally complete.
int operator_span_rank(const std::vector<OperatorSet>& sets, double tol = 1e-9);

inline bool informationally_complete(const std::vector<OperatorSet>& sets, int dim) {
  return operator_span_rank(sets) == dim * dim;
}

/// Largest deviation of sum_j Lambda_j from identity across settings.
double completeness_error(const std::vector<OperatorSet>& sets);

}  // namespace fuzzytomo
