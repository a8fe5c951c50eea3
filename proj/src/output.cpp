#include "holonic/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "holonic/errors.hpp"

namespace holonic {

namespace {

void append_double(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

std::string trace_csv(const Trace& trace) {
  std::string out = "t,alpha,beta";
  for (int i = 0; i < trace.holons; ++i) {
    out += ",belief_mean_" + std::to_string(i);
  }
  out += ",theta0_avg,theta1_avg,d_t,eps_t,risk\n";
  for (const TraceRow& row : trace.rows) {
    out += std::to_string(row.t);
    for (double v : {row.alpha, row.beta}) {
      out += ',';
      append_double(out, v);
    }
    for (int i = 0; i < trace.holons; ++i) {
      out += ',';
      append_double(out, row.belief_means[i]);
    }
    for (double v : {row.theta0_avg, row.theta1_avg, row.d_t, row.eps_t, row.risk}) {
      out += ',';
      append_double(out, v);
    }
    out += '\n';
  }
  return out;
}

std::string particle_csv(const ParticleMeasure& measure) {
  std::string out = "value,weight\n";
  for (Eigen::Index i = 0; i < measure.size(); ++i) {
    append_double(out, measure.values()[i]);
    out += ',';
    append_double(out, measure.weights()[i]);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
}

nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json game{{"kind", c.kind},       {"M", c.M},
                      {"n", c.n},             {"D", c.D},
                      {"kappa", c.kappa},     {"gamma", c.gamma},
                      {"rho", c.rho},         {"type_distribution", c.type_distribution}};
  if (!c.D_per_holon.empty()) game["D_per_holon"] = c.D_per_holon;
  nlohmann::json learner{{"a0", c.a0},
                         {"b0", c.b0},
                         {"exponent_alpha", c.exponent_alpha},
                         {"exponent_beta", c.exponent_beta},
                         {"offset", c.offset},
                         {"iterations", c.iterations},
                         {"n_samples", c.n_samples},
                         {"belief_mode", c.belief_mode},
                         {"particle_cap", c.particle_cap},
                         {"coupling_semantics", c.coupling_semantics},
                         {"t_argument", c.t_argument}};
  nlohmann::json solver{{"inner_iterations", c.inner_iterations},
                        {"inner_step_size", c.inner_step_size},
                        {"gradient_samples", c.gradient_samples},
                        {"tolerance", c.tolerance},
                        {"max_picard_iterations", c.max_picard_iterations}};
  nlohmann::json run{{"seed", c.seed}, {"output_dir", c.output_dir}};
  return nlohmann::json{
      {"game", game}, {"learner", learner}, {"solver", solver}, {"run", run}};
}

nlohmann::json beliefs_json(const BeliefProfile& beliefs) {
  nlohmann::json out = nlohmann::json::array();
  for (int i = 0; i < beliefs.holons(); ++i) {
    out.push_back({{"mean", beliefs.mean(i)},
                   {"variance", beliefs.variance(i)},
                   {"particle_count", beliefs.mode() == BeliefMode::Particle
                                          ? beliefs.particle(i).size()
                                          : 0}});
  }
  return out;
}

nlohmann::json profile_json(const StrategyProfile& profile) {
  nlohmann::json slopes = nlohmann::json::array();
  nlohmann::json intercepts = nlohmann::json::array();
  for (int i = 0; i < profile.holons(); ++i) {
    std::vector<double> srow(static_cast<std::size_t>(profile.agents()));
    std::vector<double> irow(static_cast<std::size_t>(profile.agents()));
    for (int k = 0; k < profile.agents(); ++k) {
      srow[static_cast<std::size_t>(k)] = profile.slopes(i, k);
      irow[static_cast<std::size_t>(k)] = profile.intercepts(i, k);
    }
    slopes.push_back(srow);
    intercepts.push_back(irow);
  }
  return {{"theta1", slopes},
          {"theta0", intercepts},
          {"theta0_avg", profile.mean_intercept()},
          {"theta1_avg", profile.mean_slope()}};
}

namespace {

struct Panel {
  double x0, x1, y0, y1;  // pixel bounds, y grows downward
  double vmin, vmax;      // value range
  long tmax;

  double px(long t) const {
    return x0 + (x1 - x0) * static_cast<double>(t) / static_cast<double>(std::max(1L, tmax));
  }
  double py(double v) const {
    return y1 - (y1 - y0) * (v - vmin) / (vmax - vmin);
  }
};

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void expand_range(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
}

void polyline(std::string& svg, const Panel& panel, const Trace& trace,
              long stride, const char* color,
              double (*pick)(const TraceRow&, int), int arg) {
  svg += "<polyline class=\"series\" fill=\"none\" stroke=\"";
  svg += color;
  svg += "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t r = 0; r < trace.rows.size(); r += static_cast<std::size_t>(stride)) {
    const TraceRow& row = trace.rows[r];
    svg += fmt2(panel.px(row.t)) + "," + fmt2(panel.py(pick(row, arg))) + " ";
  }
  const TraceRow& last = trace.rows.back();
  svg += fmt2(panel.px(last.t)) + "," + fmt2(panel.py(pick(last, arg)));
  svg += "\"/>\n";
}

void ref_line(std::string& svg, const Panel& panel, double value,
              const char* color) {
  double y = panel.py(value);
  svg += "<line class=\"ref\" x1=\"" + fmt2(panel.x0) + "\" x2=\"" +
         fmt2(panel.x1) + "\" y1=\"" + fmt2(y) + "\" y2=\"" + fmt2(y) +
         "\" stroke=\"" + color + "\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>\n";
}

void axes(std::string& svg, const Panel& panel, const char* title) {
  svg += "<line x1=\"" + fmt2(panel.x0) + "\" x2=\"" + fmt2(panel.x0) +
         "\" y1=\"" + fmt2(panel.y0) + "\" y2=\"" + fmt2(panel.y1) +
         "\" stroke=\"#444\"/>\n";
  svg += "<line x1=\"" + fmt2(panel.x0) + "\" x2=\"" + fmt2(panel.x1) +
         "\" y1=\"" + fmt2(panel.y1) + "\" y2=\"" + fmt2(panel.y1) +
         "\" stroke=\"#444\"/>\n";
  svg += "<text x=\"" + fmt2(panel.x0) + "\" y=\"" + fmt2(panel.y0 - 8) +
         "\" font-size=\"13\" fill=\"#222\">" + title + "</text>\n";
  svg += "<text x=\"" + fmt2(panel.x0 - 6) + "\" y=\"" + fmt2(panel.y1) +
         "\" font-size=\"10\" text-anchor=\"end\" fill=\"#555\">" +
         fmt2(panel.vmin) + "</text>\n";
  svg += "<text x=\"" + fmt2(panel.x0 - 6) + "\" y=\"" + fmt2(panel.y0 + 4) +
         "\" font-size=\"10\" text-anchor=\"end\" fill=\"#555\">" +
         fmt2(panel.vmax) + "</text>\n";
  svg += "<text x=\"" + fmt2(panel.x1) + "\" y=\"" + fmt2(panel.y1 + 14) +
         "\" font-size=\"10\" text-anchor=\"end\" fill=\"#555\">t=" +
         std::to_string(panel.tmax) + "</text>\n";
}

const char* kBeliefColors[] = {"#1f77b4", "#1fa0c9", "#3b5bdb",
                               "#1864ab", "#4dabf7", "#748ffc"};

}  // namespace

std::string convergence_svg(const Trace& trace,
                            const std::optional<ReferencePoint>& reference) {
  if (trace.rows.empty()) throw InvalidArgumentError("empty trace");
  const long tmax = trace.rows.back().t;
  const long stride = std::max<long>(1, static_cast<long>(trace.rows.size()) / 1200);

  Panel beliefs{60, 880, 40, 300, 0, 1, tmax};
  Panel thetas{60, 880, 360, 620, 0, 1, tmax};

  double blo = trace.rows.front().belief_means.minCoeff();
  double bhi = trace.rows.front().belief_means.maxCoeff();
  double tlo = std::min(trace.rows.front().theta0_avg, trace.rows.front().theta1_avg);
  double thi = std::max(trace.rows.front().theta0_avg, trace.rows.front().theta1_avg);
  for (const TraceRow& row : trace.rows) {
    blo = std::min(blo, row.belief_means.minCoeff());
    bhi = std::max(bhi, row.belief_means.maxCoeff());
    tlo = std::min({tlo, row.theta0_avg, row.theta1_avg});
    thi = std::max({thi, row.theta0_avg, row.theta1_avg});
  }
  if (reference) {
    const Equilibrium& eq = reference->equilibrium;
    blo = std::min(blo, eq.omega_mean.minCoeff());
    bhi = std::max(bhi, eq.omega_mean.maxCoeff());
    tlo = std::min({tlo, eq.mean_slope(), eq.mean_intercept()});
    thi = std::max({thi, eq.mean_slope(), eq.mean_intercept()});
  }
  expand_range(blo, bhi);
  expand_range(tlo, thi);
  beliefs.vmin = blo;
  beliefs.vmax = bhi;
  thetas.vmin = tlo;
  thetas.vmax = thi;

  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"640\" "
      "viewBox=\"0 0 900 640\">\n<rect width=\"900\" height=\"640\" fill=\"white\"/>\n";

  axes(svg, beliefs, "average holon belief E[omega]");
  if (reference) {
    for (Eigen::Index i = 0; i < reference->equilibrium.omega_mean.size(); ++i) {
      ref_line(svg, beliefs, reference->equilibrium.omega_mean[i], "#d62728");
    }
  }
  for (int i = 0; i < trace.holons; ++i) {
    polyline(
        svg, beliefs, trace, stride, kBeliefColors[i % 6],
        [](const TraceRow& row, int holon) { return row.belief_means[holon]; },
        i);
  }

  axes(svg, thetas, "average strategy parameters");
  if (reference) {
    ref_line(svg, thetas, reference->equilibrium.mean_intercept(), "#e8890c");
    ref_line(svg, thetas, reference->equilibrium.mean_slope(), "#2ca02c");
  }
  polyline(
      svg, thetas, trace, stride, "#ff7f0e",
      [](const TraceRow& row, int) { return row.theta0_avg; }, 0);
  polyline(
      svg, thetas, trace, stride, "#2ca02c",
      [](const TraceRow& row, int) { return row.theta1_avg; }, 0);

  svg += "</svg>\n";
  return svg;
}

}  // namespace holonic
