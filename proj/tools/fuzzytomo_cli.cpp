// Batch front end: simulate, compare and plot.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fuzzytomo/analysis.hpp"
#include "fuzzytomo/campaign_io.hpp"
#include "fuzzytomo/presets.hpp"

namespace fs = std::filesystem;
using namespace fuzzytomo;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Manifest {
  std::string config_path;
  std::string preset;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> n_exp;
  std::optional<std::int64_t> n_tot;
  int jobs = 1;
  bool full = false;
  std::vector<std::string> inputs;  // plot only
};

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (const auto& it : items) s += (s.empty() ? "" : ", ") + it;
  return s;
}

ExperimentConfig resolve_config(const Manifest& m) {
  if (m.config_path.empty() == m.preset.empty())
    throw ConfigError("exactly one of --config or --preset is required");
  ExperimentConfig cfg;
  if (!m.preset.empty()) {
    const Preset* p = find_preset(m.preset);
    if (!p) throw ConfigError("unknown preset '" + m.preset + "'; valid presets: " + join(preset_names()));
    cfg = p->config;
    if (m.full) cfg.n_exp = p->full_n_exp;
  } else {
    std::ifstream in(m.config_path);
    if (!in) throw ConfigError("cannot open config file '" + m.config_path + "'");
    try {
      cfg = ExperimentConfig::from_json(nlohmann::json::parse(in));
    } catch (const std::exception& e) {
      throw ConfigError("invalid config '" + m.config_path + "': " + e.what());
    }
  }
  if (m.seed) cfg.seed = *m.seed;
  if (m.n_exp) cfg.n_exp = *m.n_exp;
  if (m.n_tot) cfg.n_tot = *m.n_tot;
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
  return fs::path(dir);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

void write_campaign(const fs::path& dir, const std::string& stem, const ExperimentResult& r,
                    const nlohmann::json& extra = {}) {
  std::ostringstream csv, universal;
  write_campaign_csv(csv, r);
  write_universal_csv(universal, r);
  write_file(dir / (stem + ".csv"), csv.str());
  write_file(dir / (stem + ".universal.csv"), universal.str());
  auto summary = r.summary_json();
  if (!extra.is_null()) summary.update(extra);
  write_file(dir / (stem + ".summary.json"), summary.dump(2) + "\n");
}

void print_result(const std::string& label, const ExperimentResult& r) {
  std::printf("%s: L = %.5f +- %.5f  Eff = %.5f +- %.5f  (predicted L %.5f, %d runs, %.1f s)\n", label.c_str(),
              r.loss, r.loss_stderr, r.efficiency, r.efficiency_stderr, r.predicted_loss,
              static_cast<int>(r.runs.size()), r.runtime_s);
}

int cmd_simulate(const Manifest& m) {
  const auto cfg = resolve_config(m);
  const auto dir = prepare_out(m.out_dir);
  const auto result = run_campaign(cfg, m.jobs);
  write_campaign(dir, cfg.name, result);
  print_result(cfg.name, result);
  if (const Preset* p = m.preset.empty() ? nullptr : find_preset(m.preset)) {
    if (p->loss)
      std::printf("  L band [%.5f, %.5f]: %s\n", p->loss->lo(), p->loss->hi(),
                  p->loss->contains(result.loss) ? "inside" : "outside");
    if (p->efficiency)
      std::printf("  Eff band [%.5f, %.5f]: %s\n", p->efficiency->lo(), p->efficiency->hi(),
                  p->efficiency->contains(result.efficiency) ? "inside" : "outside");
  }
  return 0;
}

int cmd_compare(const Manifest& m) {
  const auto cfg = resolve_config(m);
  if (cfg.data_model != OperatorModel::fuzzy)
    throw ConfigError("compare requires data_model = fuzzy");
  const auto dir = prepare_out(m.out_dir);
  const auto cmp = compare_models(cfg, m.jobs);
  const nlohmann::json extra = {{"loss_ratio", cmp.loss_ratio}, {"paired", cmp.paired}};
  write_campaign(dir, cfg.name + ".standard", cmp.standard, extra);
  write_campaign(dir, cfg.name + ".fuzzy", cmp.fuzzy, extra);
  nlohmann::json report = {{"config", cfg.to_json()},
                           {"L_standard", cmp.standard.loss},
                           {"L_standard_stderr", cmp.standard.loss_stderr},
                           {"L_fuzzy", cmp.fuzzy.loss},
                           {"L_fuzzy_stderr", cmp.fuzzy.loss_stderr},
                           {"loss_ratio", cmp.loss_ratio},
                           {"paired", cmp.paired}};
  write_file(dir / (cfg.name + ".compare.json"), report.dump(2) + "\n");
  print_result("standard", cmp.standard);
  print_result("fuzzy", cmp.fuzzy);
  std::printf("loss ratio (standard / fuzzy) = %.2f, paired counts: %s\n", cmp.loss_ratio,
              cmp.paired ? "yes" : "no");
  return 0;
}

bool is_campaign_csv(const fs::path& p) {
  if (p.extension() != ".csv") return false;
  if (fs::file_size(p) == 0) return true;  // an empty campaign is an error, not something to skip
  std::ifstream in(p);
  std::string line;
  return std::getline(in, line) && line.rfind("run_index,fidelity", 0) == 0;
}

ExperimentResult load_campaign(const fs::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw ConfigError("cannot open campaign '" + csv_path.string() + "'");
  ExperimentResult r;
  try {
    r.runs = read_campaign_csv(in);
  } catch (const std::exception& e) {
    throw ConfigError(csv_path.string() + ": " + e.what());
  }
  if (r.runs.empty()) throw ConfigError("campaign '" + csv_path.string() + "' has no runs");

  const std::string stem = csv_path.stem().string();
  const fs::path summary = csv_path.parent_path() / (stem + ".summary.json");
  const fs::path universal = csv_path.parent_path() / (stem + ".universal.csv");
  std::ifstream js(summary);
  if (!js) throw ConfigError("missing summary '" + summary.string() + "'");
  std::ifstream us(universal);
  if (!us) throw ConfigError("missing universal coefficients '" + universal.string() + "'");
  try {
    r.config = ExperimentConfig::from_json(nlohmann::json::parse(js).at("config"));
    read_universal_csv(us, r.runs);
    aggregate(r);
    r.config.name = stem;  // keeps paired campaigns apart
  } catch (const std::exception& e) {
    throw ConfigError(stem + ": " + e.what());
  }
  return r;
}

int cmd_plot(const Manifest& m) {
  std::vector<fs::path> inputs;
  for (const auto& s : m.inputs) inputs.emplace_back(s);
  if (inputs.empty()) {
    std::error_code ec;
    if (!fs::is_directory(m.out_dir, ec)) throw ConfigError("no such directory '" + m.out_dir + "'");
    for (const auto& e : fs::directory_iterator(m.out_dir))
      if (e.is_regular_file() && is_campaign_csv(e.path())) inputs.push_back(e.path());
    std::sort(inputs.begin(), inputs.end());
  }
  if (inputs.empty()) throw ConfigError("no campaign CSV files found in '" + m.out_dir + "'");

  std::vector<ExperimentResult> results;
  for (const auto& p : inputs) results.push_back(load_campaign(p));
  const auto summary = summarize(results);
  const auto dir = prepare_out(m.out_dir);

  // summarize() orders rows by width with a stable sort; mirror it for the names.
  std::stable_sort(results.begin(), results.end(),
                   [](const auto& a, const auto& b) { return a.config.width_nm < b.config.width_nm; });
  std::vector<DensityCurve> curves;
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t i = 0; i < summary.rows.size(); ++i) {
    const auto& row = summary.rows[i];
    const std::string& name = results[i].config.name;
    char width[32];
    std::snprintf(width, sizeof width, "%g nm", row.width_nm);
    std::ostringstream u, e;
    write_histogram_csv(u, summary.universal[i]);
    write_histogram_csv(e, summary.empirical[i]);
    write_file(dir / ("hist_" + name + ".universal.csv"), u.str());
    write_file(dir / ("hist_" + name + ".empirical.csv"), e.str());
    curves.push_back({name + " (" + width + ")", summary.universal[i]});
    table.push_back({{"campaign", name},
                     {"width_nm", row.width_nm},
                     {"L", row.loss},
                     {"L_stderr", row.loss_stderr},
                     {"Eff", row.efficiency},
                     {"Eff_stderr", row.efficiency_stderr},
                     {"mean_infidelity", row.mean_infidelity},
                     {"predicted_mean_infidelity", row.predicted_mean_infidelity},
                     {"mode_height", row.mode_height}});
    std::printf("%-28s width %5.1f nm: L = %.4f +- %.4f  Eff = %.4f  mode height = %.4g\n", name.c_str(), row.width_nm, row.loss,
                row.loss_stderr, row.efficiency, row.mode_height);
  }
  write_file(dir / "density.svg", render_density_svg(curves, "Averaged universal infidelity density", "1 - F"));
  const nlohmann::json doc = {{"rows", table},
                              {"mean_infidelity_increasing", summary.mean_infidelity_increasing},
                              {"mode_height_decreasing", summary.mode_height_decreasing}};
  write_file(dir / "summary_table.json", doc.dump(2) + "\n");
  std::printf("mean infidelity increasing: %s, mode height decreasing: %s\n",
              summary.mean_infidelity_increasing ? "yes" : "no", summary.mode_height_decreasing ? "yes" : "no");
  return 0;
}

void add_run_options(CLI::App* cmd, Manifest& m) {
  cmd->add_option("--config", m.config_path, "JSON experiment configuration");
  cmd->add_option("--preset", m.preset, "named preset (see `fuzzytomo presets`)");
  cmd->add_option("--out", m.out_dir, "output directory");
  cmd->add_option("--seed", m.seed, "override the campaign seed");
  cmd->add_option("--n-exp", m.n_exp, "override the number of runs");
  cmd->add_option("--n-tot", m.n_tot, "override the total sample size");
  cmd->add_option("--jobs", m.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--full", m.full, "use the preset's full-scale number of runs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuzzy-measurement polarization tomography simulator"};
  app.require_subcommand(1);
  Manifest m;
  auto* simulate = app.add_subcommand("simulate", "run one Monte Carlo campaign");
  add_run_options(simulate, m);
  auto* compare = app.add_subcommand("compare", "reconstruct the same data with standard and fuzzy operators");
  add_run_options(compare, m);
  auto* plot = app.add_subcommand("plot", "histograms and density overlay from saved campaigns");
  plot->add_option("--out", m.out_dir, "directory holding campaigns; outputs go here too");
  plot->add_option("inputs", m.inputs, "campaign CSV files (default: every campaign in --out)");
  auto* list = app.add_subcommand("presets", "list the named presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(m);
    if (compare->parsed()) return cmd_compare(m);
    if (plot->parsed()) return cmd_plot(m);
    if (list->parsed()) {
      for (const auto& p : presets())
        std::printf("%-20s n_exp %-4d (full %5d)  %s\n", p.name.c_str(), p.config.n_exp,
                    p.full_n_exp, p.description.c_str());
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
