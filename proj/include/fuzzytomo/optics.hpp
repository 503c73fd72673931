#pragma once

// Birefringent dispersion, wave-plate geometry and the spectral grid of the
// signal photon. All wavelengths and thicknesses are in micrometres.

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fuzzytomo/quantum_core.hpp"

namespace fuzzytomo {

/// Raised when a wavelength falls outside a dispersion model's validity range.
class RangeError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// Refractive-index curves n_o(lambda), n_e(lambda) of a uniaxial crystal.
///
/// Supported forms (form_id):
///   "ghosh"     n^2 = A + B / (1 - C / l^2) + D / (1 - E / l^2), coefficients {A, B, C, D, E}
///   "sellmeier" n^2 = 1 + sum_i B_i l^2 / (l^2 - C_i), coefficients {B_1, C_1, B_2, C_2, ...}
struct DispersionModel {
  std::string name;
  std::string form_id;
  std::vector<double> coefficients_o;
  std::vector<double> coefficients_e;
  std::array<double, 2> range_um{0.0, 0.0};

  double n_ordinary(double lambda_um) const;
  double n_extraordinary(double lambda_um) const;
  bool in_range(double lambda_um) const {
    return lambda_um >= range_um[0] && lambda_um <= range_um[1];
  }

  /// Crystalline quartz at 20 C (Ghosh, Opt. Commun. 163, 1999).
  static const DispersionModel& quartz();

  static DispersionModel from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static DispersionModel load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  friend bool operator==(const DispersionModel&, const DispersionModel&) = default;
};

enum class PlateKind { half, quarter };

std::string to_string(PlateKind kind);
PlateKind plate_kind_from_string(const std::string& s);

struct WavePlateSpec {
  PlateKind kind = PlateKind::half;
  int order = 0;
  double thickness_um = 0.0;
  double design_wavelength_um = 0.65;
  DispersionModel dispersion;

  /// Plate whose thickness is derived from its order at the design wavelength.
  static WavePlateSpec from_order(PlateKind kind, int order, double lambda0_um,
                                  const DispersionModel& model = DispersionModel::quartz());
};

/// Plate together with its fast-axis angle from vertical, kept in (-pi/2, pi/2].
class WavePlateSetting {
public:
  WavePlateSetting(WavePlateSpec plate, double angle);

  const WavePlateSpec& plate() const { return plate_; }
  double angle() const { return angle_; }

private:
  WavePlateSpec plate_;
  double angle_;
};

/// Maps an angle into the plate's physical period (-pi/2, pi/2].
double wrap_plate_angle(double angle);

struct SpectralPoint {
  double lambda_um;
  double weight;
};

struct SpectralGrid {
  double center_um = 0.65;
  double width_um = 0.0;
  double pump_um = 0.325;
  std::vector<SpectralPoint> points;

  bool monochromatic() const { return points.size() == 1; }
};

/// |n_e - n_o| at lambda. Throws RangeError outside the model's range.
double birefringence(const DispersionModel& model, double lambda_um);

/// h = (k + 1/2) lambda0 / dn (half) or (k + 1/4) lambda0 / dn (quarter).
double plate_thickness(PlateKind kind, int order, double lambda0_um,
                       const DispersionModel& model = DispersionModel::quartz());

/// delta = pi h dn(lambda) / lambda.
double optical_thickness(double thickness_um, double lambda_um,
                         const DispersionModel& model = DispersionModel::quartz());

/// Wave-plate unitary
///   [[cos d - i sin d cos 2a,  -i sin d sin 2a],
///    [-i sin d sin 2a,          cos d + i sin d cos 2a]].
Eigen::Matrix2cd waveplate_unitary(double delta, double alpha);

/// U = QWP(delta_2, beta) * HWP(delta_1, alpha), both retardances evaluated at lambda.
Eigen::Matrix2cd basis_unitary(const WavePlateSetting& hwp, const WavePlateSetting& qwp,
                               double lambda_um);

/// Phase-matched idler wavelength lambda_s lambda_p / (lambda_s - lambda_p).
double idler_wavelength(double lambda_s_um, double lambda_p_um);

/// Uniform spectrum on [center - width/2, center + width/2] sampled at the
/// midpoints of n_points equal subintervals.
SpectralGrid spectral_grid(double center_um, double width_um, double pump_um, int n_points);

inline constexpr int kDefaultSpectralPoints = 64;

}  // namespace fuzzytomo
