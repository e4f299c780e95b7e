// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace mhlora::cli {

using ojson = nlohmann::ordered_json;

namespace {

// Shortest representation that round-trips.
std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string class_label(const ReportOptions& opt, int id) {
  if (id < 0) return "average";
  if (id < static_cast<int>(opt.class_names.size())) return opt.class_names[static_cast<std::size_t>(id)];
  return "class" + std::to_string(id);
}

ojson gap_json(const ClassGap& g, const ReportOptions& opt) {
  ojson j;
  j["class"] = class_label(opt, g.class_id);
  j["class_id"] = g.class_id;
  j["n_real"] = g.n_real;
  j["n_synth"] = g.n_synth;
  j["rho"] = g.rho;
  j["frechet"] = g.frechet;
  j["cov_real_by_synth"] = g.cov_real_by_synth;
  j["cov_synth_by_real"] = g.cov_synth_by_real;
  j["centroid_similarity"] = g.centroid_sim;
  j["score"] = opt.has_scores ? ojson(g.score) : ojson(nullptr);
  return j;
}

std::string gap_row(const std::string& set, const ClassGap& g, const ReportOptions& opt) {
  std::ostringstream os;
  os << set << ',' << class_label(opt, g.class_id) << ',' << g.n_real << ',' << g.n_synth << ','
     << num(g.rho) << ',' << num(g.frechet) << ',' << num(g.cov_real_by_synth) << ','
     << num(g.cov_synth_by_real) << ',' << num(g.centroid_sim) << ','
     << (opt.has_scores ? num(g.score) : "") << '\n';
  return os.str();
}

double metric_value(const ClassGap& g, GapMetric m) {
  switch (m) {
    case GapMetric::kFrechet: return g.frechet;
    case GapMetric::kCovRealBySynth: return g.cov_real_by_synth;
    case GapMetric::kCovSynthByReal: return g.cov_synth_by_real;
    case GapMetric::kCentroid: return g.centroid_sim;
  }
  return 0.0;
}

std::string metric_title(GapMetric m) {
  switch (m) {
    case GapMetric::kFrechet: return "Frechet distance (lower is closer)";
    case GapMetric::kCovRealBySynth: return "Cov(R;S): real points covered by synthetic";
    case GapMetric::kCovSynthByReal: return "Cov(S;R): synthetic points covered by real";
    case GapMetric::kCentroid: return "Centroid similarity (real = 100)";
  }
  return "";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string gap_reports_json(const std::vector<NamedReport>& reports, const ReportOptions& opt) {
  ojson root;
  root["per_class_radius"] = true;
  root["sets"] = ojson::array();
  for (const auto& r : reports) {
    ojson s;
    s["name"] = r.name;
    s["classes"] = ojson::array();
    for (const auto& g : r.report.classes) s["classes"].push_back(gap_json(g, opt));
    s["average"] = gap_json(r.report.average, opt);
    root["sets"].push_back(std::move(s));
  }
  return root.dump(2) + "\n";
}

std::string gap_reports_csv(const std::vector<NamedReport>& reports, const ReportOptions& opt) {
  std::string out = "set,class,n_real,n_synth,rho,frechet,cov_real_by_synth,cov_synth_by_real,centroid_similarity,score\n";
  for (const auto& r : reports) {
    for (const auto& g : r.report.classes) out += gap_row(r.name, g, opt);
    out += gap_row(r.name, r.report.average, opt);
  }
  return out;
}

std::string gap_table_csv(const std::vector<NamedReport>& reports, const ReportOptions& opt) {
  std::string out = "set,frechet,cov_real_by_synth,cov_synth_by_real,centroid_similarity,score\n";
  for (const auto& r : reports) {
    const ClassGap& a = r.report.average;
    out += r.name + ',' + num(a.frechet) + ',' + num(a.cov_real_by_synth) + ',' +
           num(a.cov_synth_by_real) + ',' + num(a.centroid_sim) + ',' +
           (opt.has_scores ? num(a.score) : "") + '\n';
  }
  return out;
}

std::string gap_table_text(const std::vector<NamedReport>& reports, const ReportOptions& opt) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof line, "%-12s %10s %9s %9s %9s %8s\n", "set", "Frechet", "Cov(R;S)",
                "Cov(S;R)", "Centroid", "Score");
  out += line;
  for (const auto& r : reports) {
    const ClassGap& a = r.report.average;
    std::snprintf(line, sizeof line, "%-12s %10s %9s %9s %9s %8s\n", r.name.c_str(),
                  fixed(a.frechet, 4).c_str(), fixed(a.cov_real_by_synth, 3).c_str(),
                  fixed(a.cov_synth_by_real, 3).c_str(), fixed(a.centroid_sim, 2).c_str(),
                  opt.has_scores ? fixed(a.score, 2).c_str() : "-");
    out += line;
  }
  return out;
}

std::string gap_chart_svg(const std::vector<NamedReport>& reports, const ReportOptions& opt,
                          GapMetric metric) {
  static constexpr std::array<const char*, 6> kColors = {"#4C72B0", "#DD8452", "#55A868",
                                                         "#C44E52", "#8172B3", "#937860"};
  // Groups follow the class order of the first report; the average comes last.
  std::vector<int> groups;
  if (!reports.empty())
    for (const auto& g : reports.front().report.classes) groups.push_back(g.class_id);
  groups.push_back(-1);

  auto lookup = [&](const NamedReport& r, int id) -> const ClassGap* {
    if (id < 0) return &r.report.average;
    for (const auto& g : r.report.classes)
      if (g.class_id == id) return &g;
    return nullptr;
  };

  double vmax = 0.0;
  for (const auto& r : reports)
    for (int id : groups)
      if (const ClassGap* g = lookup(r, id)) vmax = std::max(vmax, metric_value(*g, metric));
  if (!(vmax > 0.0)) vmax = 1.0;

  const int bar_w = 18, gap = 14, left = 60, top = 40, plot_h = 220;
  const int n_sets = std::max<int>(1, static_cast<int>(reports.size()));
  const int group_w = n_sets * bar_w + gap;
  const int width = left + static_cast<int>(groups.size()) * group_w + 20 + 120;
  const int height = top + plot_h + 60;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left << "\" y=\"20\" font-size=\"13\">" << xml_escape(metric_title(metric))
     << "</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << width - 130 << "\" y2=\""
     << top + plot_h << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = vmax * tick / 4.0;
    const int y = top + plot_h - static_cast<int>(std::lround(plot_h * tick / 4.0));
    os << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << fixed(v, 3)
       << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << width - 130 << "\" y2=\"" << y
       << "\" stroke=\"#ddd\"/>\n";
  }
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const int gx = left + static_cast<int>(gi) * group_w + gap / 2;
    for (std::size_t si = 0; si < reports.size(); ++si) {
      const ClassGap* g = lookup(reports[si], groups[gi]);
      if (!g) continue;
      const double v = metric_value(*g, metric);
      const int h = static_cast<int>(std::lround(plot_h * std::max(v, 0.0) / vmax));
      os << "<rect x=\"" << gx + static_cast<int>(si) * bar_w << "\" y=\"" << top + plot_h - h
         << "\" width=\"" << bar_w - 2 << "\" height=\"" << h << "\" fill=\""
         << kColors[si % kColors.size()] << "\"><title>" << xml_escape(reports[si].name) << ' '
         << xml_escape(class_label(opt, groups[gi])) << ": " << num(v) << "</title></rect>\n";
    }
    os << "<text x=\"" << gx + n_sets * bar_w / 2 << "\" y=\"" << top + plot_h + 16
       << "\" text-anchor=\"middle\">" << xml_escape(class_label(opt, groups[gi])) << "</text>\n";
  }
  for (std::size_t si = 0; si < reports.size(); ++si) {
    const int y = top + 10 + static_cast<int>(si) * 18;
    os << "<rect x=\"" << width - 120 << "\" y=\"" << y - 10 << "\" width=\"12\" height=\"12\" fill=\""
       << kColors[si % kColors.size()] << "\"/>\n";
    os << "<text x=\"" << width - 102 << "\" y=\"" << y << "\">" << xml_escape(reports[si].name)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string probe_json(const std::vector<ProbeRow>& rows, const std::vector<std::string>& class_names,
                       bool long_tail) {
  ojson root;
  root["long_tail"] = long_tail;
  root["rows"] = ojson::array();
  for (const auto& r : rows) {
    ojson j;
    j["config"] = r.config;
    j["train_items"] = r.train_items;
    j["accuracy"] = r.scores.accuracy;
    j["long"] = r.scores.long_accuracy;
    j["tail"] = r.scores.tail_accuracy;
    j["avg"] = r.scores.average;
    ojson per = ojson::object();
    for (std::size_t c = 0; c < r.scores.per_class.size(); ++c) {
      const std::string name = c < class_names.size() ? class_names[c] : "class" + std::to_string(c);
      const double v = r.scores.per_class[c];
      per[name] = std::isnan(v) ? ojson(nullptr) : ojson(v);
    }
    j["per_class"] = std::move(per);
    root["rows"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

std::string probe_csv(const std::vector<ProbeRow>& rows, bool long_tail) {
  std::string out = long_tail ? "config,train_items,accuracy,long,tail,avg\n" : "config,train_items,accuracy,avg\n";
  for (const auto& r : rows) {
    out += r.config + ',' + std::to_string(r.train_items) + ',' + num(r.scores.accuracy) + ',';
    if (long_tail) out += num(r.scores.long_accuracy) + ',' + num(r.scores.tail_accuracy) + ',';
    out += num(r.scores.average) + '\n';
  }
  return out;
}

std::string probe_text(const std::vector<ProbeRow>& rows, bool long_tail) {
  char line[160];
  std::string out;
  if (long_tail)
    std::snprintf(line, sizeof line, "%-20s %7s %8s %7s %7s %7s\n", "config", "train", "acc", "Long", "Tail", "Avg.");
  else
    std::snprintf(line, sizeof line, "%-20s %7s %8s %7s\n", "config", "train", "acc", "Avg.");
  out += line;
  for (const auto& r : rows) {
    if (long_tail)
      std::snprintf(line, sizeof line, "%-20s %7d %8s %7s %7s %7s\n", r.config.c_str(), r.train_items,
                    fixed(100 * r.scores.accuracy, 1).c_str(), fixed(100 * r.scores.long_accuracy, 1).c_str(),
                    fixed(100 * r.scores.tail_accuracy, 1).c_str(), fixed(100 * r.scores.average, 1).c_str());
    else
      std::snprintf(line, sizeof line, "%-20s %7d %8s %7s\n", r.config.c_str(), r.train_items,
                    fixed(100 * r.scores.accuracy, 1).c_str(), fixed(100 * r.scores.average, 1).c_str());
    out += line;
  }
  return out;
}

}  // namespace mhlora::cli
