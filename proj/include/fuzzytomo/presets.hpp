#pragma once

// Named campaign presets with their target bands.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fuzzytomo/analysis.hpp"

namespace fuzzytomo {

struct Band {
  double center = 0.0;
  double tolerance = 0.0;

  bool contains(double x) const { return std::abs(x - center) <= tolerance; }
  double lo() const { return center - tolerance; }
  double hi() const { return center + tolerance; }
};

enum class PresetKind { simulate, compare };

struct Preset {
  std::string name;
  std::string description;
  PresetKind kind = PresetKind::simulate;
  ExperimentConfig config;  // reduced scale
  int full_n_exp = 10000;
  std::optional<Band> loss;
  std::optional<Band> efficiency;
  std::optional<Band> loss_ratio;  // compare presets, [lo, hi] as center +- tolerance
};

const std::vector<Preset>& presets();
const Preset* find_preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace fuzzytomo
