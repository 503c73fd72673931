#include "fuzzytomo/presets.hpp"

namespace fuzzytomo {

namespace {

ExperimentConfig make_config(std::string name, Symmetry symmetry, double width_nm, OperatorModel data,
                             OperatorModel recon, int n_exp) {
  ExperimentConfig c;
  c.name = std::move(name);
  c.dim = 4;
  c.symmetry = symmetry;
  c.width_nm = width_nm;
  c.data_model = data;
  c.reconstruction_model = recon;
  c.n_tot = 1000000;
  c.n_exp = n_exp;
  return c;
}

std::vector<Preset> build_presets() {
  constexpr auto fz = OperatorModel::fuzzy;
  constexpr auto st = OperatorModel::standard;
  std::vector<Preset> out;
  for (double w : {0.0, 10.0, 20.0, 40.0}) {
    const std::string name = "fig2-" + std::to_string(static_cast<int>(w)) + "nm";
    out.push_back({name,
                   "averaged universal infidelity distribution, octahedron, width " +
                       std::to_string(static_cast<int>(w)) + " nm",
                   PresetKind::simulate, make_config(name, Symmetry::octahedron, w, fz, fz, 200), 200,
                   std::nullopt, std::nullopt, std::nullopt});
  }
  out.push_back({"fig3-cube-ideal", "cube protocol, monochromatic", PresetKind::simulate,
                 make_config("fig3-cube-ideal", Symmetry::cube, 0.0, st, st, 200), 10000,
                 Band{3.26674, 0.03}, Band{0.91899, 0.01}, std::nullopt});
  out.push_back({"fig4-oct-ideal", "octahedron protocol, monochromatic", PresetKind::simulate,
                 make_config("fig4-oct-ideal", Symmetry::octahedron, 0.0, st, st, 200), 10000,
                 Band{3.21615, 0.03}, Band{0.93347, 0.01}, std::nullopt});
  out.push_back({"fig5-cube-20nm", "cube protocol, 20 nm, fuzzy model", PresetKind::simulate,
                 make_config("fig5-cube-20nm", Symmetry::cube, 20.0, fz, fz, 200), 10000,
                 Band{4.4580, 0.06}, Band{0.67578, 0.01}, std::nullopt});
  out.push_back({"fig6-oct-20nm", "octahedron protocol, 20 nm, fuzzy model", PresetKind::simulate,
                 make_config("fig6-oct-20nm", Symmetry::octahedron, 20.0, fz, fz, 200), 10000,
                 Band{4.4201, 0.05}, Band{0.67991, 0.01}, std::nullopt});
  out.push_back({"fig7-model-compare", "standard vs fuzzy reconstruction of fuzzy data, 20 nm",
                 PresetKind::compare, make_config("fig7-model-compare", Symmetry::octahedron, 20.0, fz, fz, 200),
                 200, std::nullopt, std::nullopt, Band{900.0, 600.0}});
  return out;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = build_presets();
  return all;
}

const Preset* find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return &p;
  return nullptr;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : presets()) names.push_back(p.name);
  return names;
}

}  // namespace fuzzytomo
