#include "fuzzytomo/optics.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace fuzzytomo {

namespace {

double index_from_coefficients(const std::string& form, const std::vector<double>& c,
                               double lambda_um) {
  const double l2 = lambda_um * lambda_um;
  double n2 = 0.0;
  if (form == "ghosh") {
    if (c.size() != 5) throw std::invalid_argument("ghosh dispersion form needs 5 coefficients");
    n2 = c[0] + c[1] / (1.0 - c[2] / l2) + c[3] / (1.0 - c[4] / l2);
  } else if (form == "sellmeier") {
    if (c.empty() || c.size() % 2 != 0)
      throw std::invalid_argument("sellmeier dispersion form needs coefficient pairs");
    n2 = 1.0;
    for (std::size_t i = 0; i < c.size(); i += 2) n2 += c[i] * l2 / (l2 - c[i + 1]);
  } else {
    throw std::invalid_argument("unknown dispersion form_id '" + form + "'");
  }
  return std::sqrt(n2);
}

void require_in_range(const DispersionModel& model, double lambda_um) {
  if (!model.in_range(lambda_um)) {
    std::ostringstream os;
    os << "wavelength " << lambda_um << " um outside dispersion range [" << model.range_um[0]
       << ", " << model.range_um[1] << "] of " << model.name;
    throw RangeError(os.str());
  }
}

}  // namespace

double DispersionModel::n_ordinary(double lambda_um) const {
  require_in_range(*this, lambda_um);
  return index_from_coefficients(form_id, coefficients_o, lambda_um);
}

double DispersionModel::n_extraordinary(double lambda_um) const {
  require_in_range(*this, lambda_um);
  return index_from_coefficients(form_id, coefficients_e, lambda_um);
}

const DispersionModel& DispersionModel::quartz() {
  static const DispersionModel model{
      "quartz (Ghosh 1999, 20 C)",
      "ghosh",
      {1.28604141, 1.07044083, 1.00585997e-2, 1.10202242, 100.0},
      {1.28851804, 1.09509924, 1.02101864e-2, 1.15662475, 100.0},
      {0.198, 2.0531}};
  return model;
}

DispersionModel DispersionModel::from_json(const nlohmann::json& j) {
  DispersionModel m;
  j.at("name").get_to(m.name);
  j.at("form_id").get_to(m.form_id);
  j.at("coefficients_o").get_to(m.coefficients_o);
  j.at("coefficients_e").get_to(m.coefficients_e);
  const auto range = j.at("range_um").get<std::vector<double>>();
  if (range.size() != 2 || !(range[0] < range[1]))
    throw std::invalid_argument("dispersion range_um must be [lo, hi] with lo < hi");
  m.range_um = {range[0], range[1]};
  // Validate the form eagerly so a bad file fails at load time.
  (void)index_from_coefficients(m.form_id, m.coefficients_o, 0.5 * (range[0] + range[1]));
  (void)index_from_coefficients(m.form_id, m.coefficients_e, 0.5 * (range[0] + range[1]));
  return m;
}

nlohmann::json DispersionModel::to_json() const {
  return nlohmann::json{{"name", name},
                        {"form_id", form_id},
                        {"coefficients_o", coefficients_o},
                        {"coefficients_e", coefficients_e},
                        {"range_um", {range_um[0], range_um[1]}}};
}

DispersionModel DispersionModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dispersion file " + path.string());
  return from_json(nlohmann::json::parse(in));
}

void DispersionModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dispersion file " + path.string());
  out << to_json().dump(2) << '\n';
}

std::string to_string(PlateKind kind) { return kind == PlateKind::half ? "half" : "quarter"; }

PlateKind plate_kind_from_string(const std::string& s) {
  if (s == "half") return PlateKind::half;
  if (s == "quarter") return PlateKind::quarter;
  throw std::invalid_argument("unknown plate kind '" + s + "'");
}

WavePlateSpec WavePlateSpec::from_order(PlateKind kind, int order, double lambda0_um,
                                        const DispersionModel& model) {
  return WavePlateSpec{kind, order, plate_thickness(kind, order, lambda0_um, model), lambda0_um,
                       model};
}

double wrap_plate_angle(double angle) {
  constexpr double pi = std::numbers::pi;
  double a = std::fmod(angle, pi);
  if (a > pi / 2) a -= pi;
  if (a <= -pi / 2) a += pi;
  return a;
}

WavePlateSetting::WavePlateSetting(WavePlateSpec plate, double angle)
    : plate_(std::move(plate)), angle_(wrap_plate_angle(angle)) {}

double birefringence(const DispersionModel& model, double lambda_um) {
  return std::abs(model.n_extraordinary(lambda_um) - model.n_ordinary(lambda_um));
}

double plate_thickness(PlateKind kind, int order, double lambda0_um,
                       const DispersionModel& model) {
  if (order < 0) throw std::invalid_argument("plate_thickness: negative order");
  const double fraction = kind == PlateKind::half ? 0.5 : 0.25;
  return (order + fraction) * lambda0_um / birefringence(model, lambda0_um);
}

double optical_thickness(double thickness_um, double lambda_um, const DispersionModel& model) {
  if (!(thickness_um > 0.0)) throw std::invalid_argument("optical_thickness: thickness must be > 0");
  return std::numbers::pi * thickness_um * birefringence(model, lambda_um) / lambda_um;
}

Eigen::Matrix2cd waveplate_unitary(double delta, double alpha) {
  const double c = std::cos(delta);
  const double s = std::sin(delta);
  const double c2 = std::cos(2.0 * alpha);
  const double s2 = std::sin(2.0 * alpha);
  Eigen::Matrix2cd u;
  u << Complex(c, -s * c2), Complex(0.0, -s * s2),  //
      Complex(0.0, -s * s2), Complex(c, s * c2);
  return u;
}

Eigen::Matrix2cd basis_unitary(const WavePlateSetting& hwp, const WavePlateSetting& qwp,
                               double lambda_um) {
  const auto& h = hwp.plate();
  const auto& q = qwp.plate();
  const double delta1 = optical_thickness(h.thickness_um, lambda_um, h.dispersion);
  const double delta2 = optical_thickness(q.thickness_um, lambda_um, q.dispersion);
  return waveplate_unitary(delta2, qwp.angle()) * waveplate_unitary(delta1, hwp.angle());
}

double idler_wavelength(double lambda_s_um, double lambda_p_um) {
  if (!(lambda_p_um > 0.0) || !(lambda_s_um > lambda_p_um))
    throw std::domain_error("idler_wavelength: requires lambda_s > lambda_p > 0");
  return lambda_s_um * lambda_p_um / (lambda_s_um - lambda_p_um);
}

SpectralGrid spectral_grid(double center_um, double width_um, double pump_um, int n_points) {
  if (!(center_um > 0.0)) throw std::invalid_argument("spectral_grid: center must be > 0");
  if (!(width_um >= 0.0)) throw std::invalid_argument("spectral_grid: width must be >= 0");
  if (n_points < 1) throw std::invalid_argument("spectral_grid: n_points must be >= 1");
  if (width_um == 0.0 && n_points != 1)
    throw std::invalid_argument("spectral_grid: zero width requires a single point");
  SpectralGrid grid{center_um, width_um, pump_um, {}};
  grid.points.reserve(static_cast<std::size_t>(n_points));
  const double step = width_um / n_points;
  const double lo = center_um - 0.5 * width_um;
  const double w = 1.0 / n_points;
  for (int k = 0; k < n_points; ++k) grid.points.push_back({lo + (k + 0.5) * step, w});
  if (n_points == 1) grid.points.front().lambda_um = center_um;
  return grid;
}

}  // namespace fuzzytomo
