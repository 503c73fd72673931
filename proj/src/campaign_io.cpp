#include "fuzzytomo/campaign_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fuzzytomo {

namespace {

constexpr const char* kCampaignHeader = "run_index,fidelity,infidelity,chi2,dof,p_value,converged";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream row(line);
  std::string cell;
  while (std::getline(row, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error("malformed number '" + s + "'");
  return v;
}

// Palette for up to eight curves; wraps after that.
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_campaign_csv(std::ostream& out, const ExperimentResult& result) {
  out << kCampaignHeader << '\n';
  for (const auto& r : result.runs) {
    out << r.run_index << ',' << format_double(r.fidelity) << ',' << format_double(r.infidelity) << ','
        << format_double(r.chi2) << ',' << r.dof << ',' << format_double(r.p_value) << ','
        << (r.converged ? 1 : 0) << '\n';
  }
}

std::vector<RunRecord> read_campaign_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCampaignHeader)
    throw std::runtime_error("campaign file: unexpected header");
  std::vector<RunRecord> runs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 7) throw std::runtime_error("campaign file: malformed row '" + line + "'");
    RunRecord r;
    r.run_index = std::stoi(cells[0]);
    r.fidelity = parse_double(cells[1]);
    r.infidelity = parse_double(cells[2]);
    r.chi2 = parse_double(cells[3]);
    r.dof = std::stoi(cells[4]);
    r.p_value = parse_double(cells[5]);
    r.converged = cells[6] == "1";
    runs.push_back(std::move(r));
  }
  return runs;
}

void write_universal_csv(std::ostream& out, const ExperimentResult& result) {
  const std::size_t k = result.runs.empty() ? 0 : result.runs.front().universal.size();
  out << "run_index";
  for (std::size_t j = 1; j <= k; ++j) out << ",d_" << j;
  out << '\n';
  for (const auto& r : result.runs) {
    out << r.run_index;
    for (double d : r.universal) out << ',' << format_double(d);
    out << '\n';
  }
}

void read_universal_csv(std::istream& in, std::vector<RunRecord>& runs) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("run_index", 0) != 0)
    throw std::runtime_error("universal file: unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    const int idx = std::stoi(cells.at(0));
    auto it = std::find_if(runs.begin(), runs.end(), [&](const RunRecord& r) { return r.run_index == idx; });
    if (it == runs.end()) throw std::runtime_error("universal file: unknown run index");
    it->universal.clear();
    it->predicted_infidelity = 0.0;
    for (std::size_t j = 1; j < cells.size(); ++j) {
      it->universal.push_back(parse_double(cells[j]));
      it->predicted_infidelity += it->universal.back();
    }
  }
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "bin_left,bin_right,density\n";
  for (std::size_t b = 0; b < h.density.size(); ++b)
    out << format_double(h.edges[b]) << ',' << format_double(h.edges[b + 1]) << ',' << format_double(h.density[b])
        << '\n';
}

std::string render_density_svg(const std::vector<DensityCurve>& curves, const std::string& title,
                               const std::string& x_label) {
  constexpr double W = 640, H = 420, left = 70, right = 20, top = 40, bottom = 60;
  double x_lo = 0.0, x_hi = 0.0, y_hi = 0.0;
  bool first = true;
  for (const auto& c : curves) {
    if (c.histogram.edges.empty()) continue;
    if (first) {
      x_lo = c.histogram.edges.front();
      x_hi = c.histogram.edges.back();
      first = false;
    }
    x_lo = std::min(x_lo, c.histogram.edges.front());
    x_hi = std::max(x_hi, c.histogram.edges.back());
    y_hi = std::max(y_hi, c.histogram.mode_height());
  }
  if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
  if (!(y_hi > 0.0)) y_hi = 1.0;
  const double pw = W - left - right, ph = H - top - bottom;
  auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double y) { return top + ph - y / (1.05 * y_hi) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
      << title << "</text>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double x = x_lo + (x_hi - x_lo) * t / 4.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    svg << "<text x=\"" << sx(x) << "\" y=\"" << top + ph + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label << "</text>\n";
  svg << "<text x=\"18\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 18 " << top + ph / 2
      << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">density</text>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& h = curves[i].histogram;
    const char* color = kColors[i % (sizeof kColors / sizeof *kColors)];
    std::ostringstream path;
    for (std::size_t b = 0; b < h.density.size(); ++b) {
      path << (b == 0 ? 'M' : 'L') << sx(h.edges[b]) << ',' << sy(h.density[b]) << ' ';
      path << 'L' << sx(h.edges[b + 1]) << ',' << sy(h.density[b]) << ' ';
    }
    svg << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    svg << "<text x=\"" << left + pw - 140 << "\" y=\"" << top + 16 + 16 * i << "\" fill=\"" << color
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << curves[i].label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace fuzzytomo
