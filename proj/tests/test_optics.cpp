#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "fuzzytomo/optics.hpp"

using namespace fuzzytomo;
using std::numbers::pi;

namespace {

const DispersionModel& quartz() { return DispersionModel::quartz(); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool phase_equal(const Eigen::Vector2cd& a, const Eigen::Vector2cd& b, double tol) {
  return std::abs(std::abs(a.dot(b)) - 1.0) < tol;
}

}  // namespace

// Reference values evaluated independently from the published quartz formula.
TEST(Dispersion, QuartzIndicesAt650nm) {
  EXPECT_NEAR(quartz().n_ordinary(0.65), 1.5420480848654365, 1e-14);
  EXPECT_NEAR(quartz().n_extraordinary(0.65), 1.5510736556576845, 1e-14);
  EXPECT_NEAR(birefringence(quartz(), 0.65), 0.009025570792247972, 1e-15);
}

TEST(Dispersion, BirefringenceConsistentWithPlateThickness) {
  // dn implied by a 396 um order-5 half-wave plate; 396 is a rounded figure, so +-1 um.
  const double implied = 5.5 * 0.65 / 396.0;
  const double slack = 5.5 * 0.65 * (1.0 / 395.0 - 1.0 / 397.0) / 2.0;
  EXPECT_NEAR(birefringence(quartz(), 0.65), implied, slack);
  EXPECT_NEAR(birefringence(quartz(), 0.65), 0.00903, 5e-5);
}

TEST(Dispersion, SmoothAndPositive) {
  for (double l = 0.4; l <= 0.8 + 1e-12; l += 0.005) {
    EXPECT_GT(birefringence(quartz(), l), 0.0);
    EXPECT_GT(quartz().n_ordinary(l), 1.0);
    EXPECT_GT(quartz().n_extraordinary(l), 1.0);
    EXPECT_LT(std::abs(birefringence(quartz(), l) - birefringence(quartz(), l + 1e-6)), 1e-6);
  }
}

TEST(Dispersion, OutOfRangeThrows) {
  EXPECT_THROW(birefringence(quartz(), 0.1), RangeError);
  EXPECT_THROW(birefringence(quartz(), 3.0), RangeError);
  EXPECT_THROW(plate_thickness(PlateKind::half, 5, 5.0), RangeError);
  EXPECT_THROW(optical_thickness(396.0, 0.15), RangeError);
}

TEST(Dispersion, BundledFileMatchesBuiltIn) {
  const auto loaded = DispersionModel::load(std::filesystem::path(FUZZYTOMO_DATA_DIR) / "quartz_ghosh1999.json");
  EXPECT_EQ(loaded, quartz());
}

TEST(Dispersion, FileRoundTripIsBitExact) {
  const auto src = std::filesystem::path(FUZZYTOMO_DATA_DIR) / "quartz_ghosh1999.json";
  const auto tmp = std::filesystem::temp_directory_path() / "fuzzytomo_dispersion_roundtrip.json";
  const auto model = DispersionModel::load(src);
  model.save(tmp);
  EXPECT_EQ(slurp(tmp), slurp(src));
  EXPECT_EQ(DispersionModel::load(tmp), model);
  std::filesystem::remove(tmp);
}

TEST(Dispersion, SellmeierFormAndBadForms) {
  nlohmann::json j = {{"name", "toy"},
                      {"form_id", "sellmeier"},
                      {"coefficients_o", {1.0, 0.01}},
                      {"coefficients_e", {1.1, 0.01}},
                      {"range_um", {0.3, 2.0}}};
  const auto m = DispersionModel::from_json(j);
  EXPECT_NEAR(m.n_ordinary(1.0), std::sqrt(1.0 + 1.0 / (1.0 - 0.01)), 1e-14);
  EXPECT_EQ(DispersionModel::from_json(m.to_json()), m);
  j["form_id"] = "cauchy";
  EXPECT_THROW(DispersionModel::from_json(j), std::invalid_argument);
}

TEST(PlateThickness, OrderFiveAt650nm) {
  EXPECT_NEAR(plate_thickness(PlateKind::half, 5, 0.65), 396.0, 1.0);
  EXPECT_NEAR(plate_thickness(PlateKind::quarter, 5, 0.65), 378.0, 1.0);
  EXPECT_NEAR(plate_thickness(PlateKind::half, 5, 0.65), 396.0968322436243, 1e-9);
  EXPECT_NEAR(plate_thickness(PlateKind::quarter, 5, 0.65), 378.092430778005, 1e-9);
}

TEST(PlateThickness, ZeroOrderScalesByOrderRatio) {
  const double h0 = plate_thickness(PlateKind::half, 0, 0.65);
  EXPECT_NEAR(h0, 396.0 * 0.5 / 5.5, 0.1);
  EXPECT_NEAR(h0 * 11.0, plate_thickness(PlateKind::half, 5, 0.65), 1e-9);
  EXPECT_THROW(plate_thickness(PlateKind::half, -1, 0.65), std::invalid_argument);
}

TEST(OpticalThickness, InvertsPlateThickness) {
  for (int k = 0; k <= 12; ++k) {
    EXPECT_NEAR(optical_thickness(plate_thickness(PlateKind::half, k, 0.65), 0.65), pi / 2 + pi * k, 1e-9);
    EXPECT_NEAR(optical_thickness(plate_thickness(PlateKind::quarter, k, 0.8), 0.8), pi / 4 + pi * k, 1e-9);
  }
}

TEST(OpticalThickness, Examples) {
  EXPECT_NEAR(optical_thickness(396.0, 0.65), 5.5 * pi, 1e-2);
  EXPECT_DOUBLE_EQ(optical_thickness(792.0, 0.65), 2.0 * optical_thickness(396.0, 0.65));
  double prev = optical_thickness(396.0, 0.6);
  for (double l = 0.605; l <= 0.7 + 1e-12; l += 0.005) {
    const double d = optical_thickness(396.0, l);
    EXPECT_LT(d, prev);
    prev = d;
  }
}

TEST(WaveplateUnitary, Examples) {
  const Complex i(0.0, 1.0);
  for (double a : {0.0, 0.3, -1.1}) EXPECT_TRUE(waveplate_unitary(0.0, a).isApprox(Eigen::Matrix2cd::Identity()));
  Eigen::Matrix2cd diag;
  diag << -i, 0.0, 0.0, i;
  EXPECT_LE((waveplate_unitary(pi / 2, 0.0) - diag).norm(), 1e-15);
  Eigen::Matrix2cd swap;
  swap << 0.0, -i, -i, 0.0;
  EXPECT_LE((waveplate_unitary(pi / 2, pi / 4) - swap).norm(), 1e-15);
}

TEST(WaveplateUnitary, UnitaryWithUnitDeterminant) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int t = 0; t < 10000; ++t) {
    const auto m = waveplate_unitary(u(rng), u(rng));
    ASSERT_TRUE(is_unitary(m));
    ASSERT_LT(std::abs(m.determinant() - 1.0), 1e-12);
  }
}

TEST(WavePlateSetting, AngleWrapping) {
  EXPECT_DOUBLE_EQ(wrap_plate_angle(pi / 2), pi / 2);
  EXPECT_NEAR(wrap_plate_angle(-pi / 2), pi / 2, 1e-15);
  EXPECT_NEAR(wrap_plate_angle(3 * pi / 4), -pi / 4, 1e-15);
  EXPECT_NEAR(wrap_plate_angle(0.3 + 7 * pi), 0.3, 1e-13);
  const auto plate = WavePlateSpec::from_order(PlateKind::half, 5, 0.65);
  EXPECT_NEAR(WavePlateSetting(plate, pi).angle(), 0.0, 1e-15);
}

TEST(BasisUnitary, DesignWavelengthZeroAnglesIsDiagonal) {
  const WavePlateSetting hwp(WavePlateSpec::from_order(PlateKind::half, 5, 0.65), 0.0);
  const WavePlateSetting qwp(WavePlateSpec::from_order(PlateKind::quarter, 5, 0.65), 0.0);
  const auto u = basis_unitary(hwp, qwp, 0.65);
  EXPECT_LT(std::abs(u(0, 1)) + std::abs(u(1, 0)), 1e-15);
}

TEST(BasisUnitary, UnitaryForRandomInputs) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ang(-pi, pi), lam(0.55, 0.75);
  const auto h = WavePlateSpec::from_order(PlateKind::half, 5, 0.65);
  const auto q = WavePlateSpec::from_order(PlateKind::quarter, 5, 0.65);
  for (int t = 0; t < 1000; ++t)
    ASSERT_TRUE(is_unitary(basis_unitary({h, ang(rng)}, {q, ang(rng)}, lam(rng))));
}

TEST(BasisUnitary, ChromaticAberrationVisibleAt10nm) {
  const WavePlateSetting hwp(WavePlateSpec::from_order(PlateKind::half, 5, 0.65), 0.3);
  const WavePlateSetting qwp(WavePlateSpec::from_order(PlateKind::quarter, 5, 0.65), -0.2);
  EXPECT_GT((basis_unitary(hwp, qwp, 0.65) - basis_unitary(hwp, qwp, 0.66)).norm(), 0.01);
}

TEST(BasisUnitary, HalfWaveOrderZeroRotatesVTo45Degrees) {
  const WavePlateSetting hwp(WavePlateSpec::from_order(PlateKind::half, 0, 0.65), pi / 8);
  const WavePlateSetting qwp(WavePlateSpec::from_order(PlateKind::quarter, 0, 0.65), 0.0);
  // Quarter-wave plate at 0 only adds a relative phase, so check via the HWP alone.
  const Eigen::Vector2cd out = waveplate_unitary(optical_thickness(hwp.plate().thickness_um, 0.65), pi / 8) *
                               Eigen::Vector2cd(1.0, 0.0);
  EXPECT_TRUE(phase_equal(out, Eigen::Vector2cd(1.0, 1.0) / std::sqrt(2.0), 1e-10));
  // And the full HWP-then-QWP product still sends V to equal populations.
  const Eigen::Vector2cd full = basis_unitary(hwp, qwp, 0.65) * Eigen::Vector2cd(1.0, 0.0);
  EXPECT_NEAR(std::norm(full(0)), 0.5, 1e-10);
}

TEST(Idler, Examples) {
  EXPECT_NEAR(idler_wavelength(0.65, 0.325), 0.65, 1e-15);
  EXPECT_NEAR(idler_wavelength(0.66, 0.325), 0.6403, 1e-4);
  EXPECT_NEAR(idler_wavelength(0.66, 0.325), 0.6402985074626866, 1e-15);
  EXPECT_THROW(idler_wavelength(0.325, 0.325), std::domain_error);
  EXPECT_THROW(idler_wavelength(0.3, 0.325), std::domain_error);
}

TEST(Idler, EnergyConservation) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 10000; ++t) {
    const double lp = 0.2 + 0.5 * u(rng);
    const double ls = lp * (1.0 + 1e-3 + 3.0 * u(rng));
    const double li = idler_wavelength(ls, lp);
    ASSERT_GT(li, lp);
    ASSERT_NEAR((1.0 / ls + 1.0 / li) * lp, 1.0, 1e-12);
  }
}

TEST(SpectralGrid, Examples) {
  const auto mono = spectral_grid(0.65, 0.0, 0.325, 1);
  ASSERT_EQ(mono.points.size(), 1u);
  EXPECT_EQ(mono.points[0].lambda_um, 0.65);
  EXPECT_EQ(mono.points[0].weight, 1.0);

  const auto g = spectral_grid(0.65, 0.020, 0.325, 4);
  ASSERT_EQ(g.points.size(), 4u);
  const double expected[] = {0.6425, 0.6475, 0.6525, 0.6575};
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(g.points[k].lambda_um, expected[k], 1e-15);
    EXPECT_EQ(g.points[k].weight, 0.25);
  }
}

TEST(SpectralGrid, WeightsSumToOneAndStayInBand) {
  for (int n : {1, 3, 7, 64, 100, 128}) {
    const auto g = spectral_grid(0.65, 0.040, 0.325, n);
    double sum = 0.0;
    for (const auto& p : g.points) {
      sum += p.weight;
      EXPECT_GE(p.weight, 0.0);
      EXPECT_GE(p.lambda_um, 0.63 - 1e-15);
      EXPECT_LE(p.lambda_um, 0.67 + 1e-15);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(SpectralGrid, InvalidCounts) {
  EXPECT_THROW(spectral_grid(0.65, 0.0, 0.325, 2), std::invalid_argument);
  EXPECT_THROW(spectral_grid(0.65, 0.02, 0.325, 0), std::invalid_argument);
  EXPECT_THROW(spectral_grid(0.65, -0.01, 0.325, 4), std::invalid_argument);
}
