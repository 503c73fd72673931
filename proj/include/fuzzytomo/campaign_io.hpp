#pragma once

// Campaign, histogram and plot file formats.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fuzzytomo/analysis.hpp"

namespace fuzzytomo {

/// Columns: run_index,fidelity,infidelity,chi2,dof,p_value,converged. Doubles
/// are written with 17 significant digits so files are bit-reproducible.
void write_campaign_csv(std::ostream& out, const ExperimentResult& result);
std::vector<RunRecord> read_campaign_csv(std::istream& in);

/// Per-run universal coefficients: run_index,d_1,...,d_k.
void write_universal_csv(std::ostream& out, const ExperimentResult& result);
/// Fills `universal` and `predicted_infidelity` of matching runs.
void read_universal_csv(std::istream& in, std::vector<RunRecord>& runs);

/// Columns: bin_left,bin_right,density.
void write_histogram_csv(std::ostream& out, const Histogram& h);

struct DensityCurve {
  std::string label;
  Histogram histogram;
};

/// Static SVG overlay of step-density curves sharing one set of axes.
std::string render_density_svg(const std::vector<DensityCurve>& curves, const std::string& title,
                               const std::string& x_label);

std::string format_double(double v);

}  // namespace fuzzytomo
