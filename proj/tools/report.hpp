// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "mhlora/metrics.hpp"
#include "mhlora/probe.hpp"

namespace mhlora::cli {

// Gap report of one synthetic set (a regime) against the shared real set.
struct NamedReport {
  std::string name;
  GapReport report;
};

struct ReportOptions {
  std::vector<std::string> class_names;  // indexed by class id
  bool has_scores = false;               // class directions were available
};

std::string gap_reports_json(const std::vector<NamedReport>& reports, const ReportOptions& opt);
// One row per (set, class) plus an "average" row per set.
std::string gap_reports_csv(const std::vector<NamedReport>& reports, const ReportOptions& opt);
// One row per set with class-averaged metrics.
std::string gap_table_csv(const std::vector<NamedReport>& reports, const ReportOptions& opt);
std::string gap_table_text(const std::vector<NamedReport>& reports, const ReportOptions& opt);

// Grouped bar chart: one group per class plus the average, one bar per set.
enum class GapMetric { kFrechet, kCovRealBySynth, kCovSynthByReal, kCentroid };
std::string gap_chart_svg(const std::vector<NamedReport>& reports, const ReportOptions& opt,
                          GapMetric metric);

struct ProbeRow {
  std::string config;
  int train_items = 0;
  ProbeScores scores;
};

std::string probe_json(const std::vector<ProbeRow>& rows, const std::vector<std::string>& class_names,
                       bool long_tail);
std::string probe_csv(const std::vector<ProbeRow>& rows, bool long_tail);
std::string probe_text(const std::vector<ProbeRow>& rows, bool long_tail);

}  // namespace mhlora::cli
