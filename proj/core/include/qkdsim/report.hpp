#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qkdsim/analyzer.hpp"
#include "qkdsim/protocol.hpp"

namespace qkdsim {

/// Machine-readable report (JSON). Field names are stable: qber (null when
/// undefined), loss_rate, invalid_rate, double_click_rate, aborted, eve_info,
/// sifted_key_length, burned, and the counters.
std::string report_json(const RunReport& report);
/// Inverse of report_json. Throws ConfigError on malformed input.
RunReport parse_report_json(std::string_view text);
/// Aligned two-column table for humans.
std::string report_table(const RunReport& report);

std::string analysis_json(const AnalysisReport& report);
std::string analysis_table(const AnalysisReport& report);

/// Reads a JSON run report; errors name the file.
RunReport load_report(const std::filesystem::path& path);

struct NamedReport {
  std::string source;
  RunReport report;
};

/// Side-by-side table of (scenario, qber, loss, invalid, eve_info, aborted),
/// followed by the contrasts against the first report. Needs >= 2 reports.
std::string compare_runs(const std::vector<NamedReport>& reports);

}  // namespace qkdsim
