#include "qkdsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "qkdsim/errors.hpp"

namespace qkdsim {
namespace {

using nlohmann::ordered_json;

std::string format_rate(std::optional<double> v) {
  return v ? fmt::format("{:.4f}", *v) : std::string("undefined");
}

// Rows of (label, value), printed with the labels padded to one width.
std::string align(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::size_t width = 0;
  for (const auto& [label, value] : rows) width = std::max(width, label.size());
  std::string out;
  for (const auto& [label, value] : rows) {
    out += fmt::format("{:<{}}  {}\n", label, width, value);
  }
  return out;
}

ordered_json to_json(const RunReport& r) {
  ordered_json j;
  j["scenario"] = r.scenario;
  j["attack"] = r.attack;
  j["rounds"] = r.rounds;
  j["seed"] = r.seed;
  j["qber"] = r.qber ? ordered_json(*r.qber) : ordered_json(nullptr);
  j["loss_rate"] = r.loss_rate;
  j["invalid_rate"] = r.invalid_rate;
  j["double_click_rate"] = r.double_click_rate;
  j["aborted"] = r.aborted;
  j["eve_info"] = r.eve_info;
  j["multi_photon_eve_info"] =
      r.multi_photon_eve_info ? ordered_json(*r.multi_photon_eve_info) : ordered_json(nullptr);
  j["sifted_key_length"] = r.sifted_key_length;
  j["test_sample_size"] = r.test_sample_size;
  j["final_key_length"] = r.final_key_length;
  j["matched_rounds"] = r.matched_rounds;
  j["valid_rounds"] = r.valid_rounds;
  j["loss_rounds"] = r.loss_rounds;
  j["invalid_rounds"] = r.invalid_rounds;
  j["burned"] = r.burned;
  return j;
}

ordered_json to_json(const ThresholdEstimate& t) {
  return {{"n1", {{"low", t.n1.low}, {"high", t.n1.high}}},
          {"n2", {{"low", t.n2.low}, {"high", t.n2.high}}},
          {"probe_count", t.probe_count},
          {"sacrificial_probes", t.sacrificial_probes}};
}

ordered_json to_json(const ResponseDistribution& d) {
  ordered_json j;
  for (std::size_t i = 0; i < kResponseClassCount; ++i) {
    j[std::string(to_string(static_cast<ResponseClass>(i)))] = d.probability[i];
  }
  return j;
}

std::string preimage_string(const std::optional<PureState>& s) {
  return s ? Incident(*s).describe() : std::string("not found");
}

}  // namespace

std::string report_json(const RunReport& report) { return to_json(report).dump(2) + "\n"; }

RunReport parse_report_json(std::string_view text) {
  RunReport r;
  try {
    const auto j = nlohmann::json::parse(text);
    r.scenario = j.at("scenario").get<std::string>();
    r.attack = j.at("attack").get<std::string>();
    r.rounds = j.at("rounds").get<std::uint64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("qber").is_null()) r.qber = j.at("qber").get<double>();
    r.loss_rate = j.at("loss_rate").get<double>();
    r.invalid_rate = j.at("invalid_rate").get<double>();
    r.double_click_rate = j.at("double_click_rate").get<double>();
    r.aborted = j.at("aborted").get<bool>();
    r.eve_info = j.at("eve_info").get<double>();
    if (j.contains("multi_photon_eve_info") && !j.at("multi_photon_eve_info").is_null()) {
      r.multi_photon_eve_info = j.at("multi_photon_eve_info").get<double>();
    }
    r.sifted_key_length = j.at("sifted_key_length").get<std::size_t>();
    r.test_sample_size = j.at("test_sample_size").get<std::size_t>();
    r.final_key_length = j.at("final_key_length").get<std::size_t>();
    r.matched_rounds = j.at("matched_rounds").get<std::size_t>();
    r.valid_rounds = j.at("valid_rounds").get<std::size_t>();
    r.loss_rounds = j.at("loss_rounds").get<std::size_t>();
    r.invalid_rounds = j.at("invalid_rounds").get<std::size_t>();
    r.burned = j.at("burned").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed report: {}", e.what()));
  }
  return r;
}

std::string report_table(const RunReport& r) {
  std::vector<std::pair<std::string, std::string>> rows{
      {"scenario", r.scenario},
      {"attack", r.attack},
      {"rounds", std::to_string(r.rounds)},
      {"seed", std::to_string(r.seed)},
      {"qber", format_rate(r.qber)},
      {"loss_rate", format_rate(r.loss_rate)},
      {"invalid_rate", format_rate(r.invalid_rate)},
      {"double_click_rate", format_rate(r.double_click_rate)},
      {"eve_info", format_rate(r.eve_info)},
      {"multi_photon_eve_info", format_rate(r.multi_photon_eve_info)},
      {"sifted_key_length", std::to_string(r.sifted_key_length)},
      {"test_sample_size", std::to_string(r.test_sample_size)},
      {"final_key_length", std::to_string(r.final_key_length)},
      {"burned", r.burned ? "yes" : "no"},
      {"aborted", r.aborted ? "yes" : "no"},
  };
  return align(rows);
}

std::string analysis_json(const AnalysisReport& a) {
  ordered_json j;
  j["receiver"] = a.receiver_name;
  j["thresholds"] = a.thresholds ? to_json(*a.thresholds) : ordered_json(nullptr);
  j["candidate_count"] = a.candidate_count;
  if (a.recipe) {
    ordered_json recipe;
    recipe["background"] = a.recipe->background;
    recipe["loss_rate"] = a.recipe->loss_rate;
    ordered_json entries = ordered_json::array();
    for (const RecipeEntry& e : a.recipe->entries) {
      entries.push_back({{"eve_basis", to_string(e.eve_basis)},
                         {"eve_bit", e.eve_bit},
                         {"incident", e.candidate.label},
                         {"computational", to_json(e.profile.in(Basis::computational))},
                         {"hadamard", to_json(e.profile.in(Basis::hadamard))}});
    }
    recipe["entries"] = std::move(entries);
    j["recipe"] = std::move(recipe);
  } else {
    j["recipe"] = nullptr;
  }
  ordered_json pre = ordered_json::array();
  for (const Preimage& p : a.preimages) {
    pre.push_back({{"basis", to_string(p.desired.basis)},
                   {"bit", p.desired.bit},
                   {"time", to_string(p.desired.time)},
                   {"state", p.state ? ordered_json(preimage_string(p.state))
                                     : ordered_json(nullptr)}});
  }
  j["preimages"] = std::move(pre);
  j["verification"] = a.verification ? to_json(*a.verification) : ordered_json(nullptr);
  return j.dump(2) + "\n";
}

std::string analysis_table(const AnalysisReport& a) {
  std::vector<std::pair<std::string, std::string>> rows{{"receiver", a.receiver_name}};
  if (a.thresholds) {
    const ThresholdEstimate& t = *a.thresholds;
    rows.emplace_back("N1 bracket", fmt::format("({}, {}]", t.n1.low, t.n1.high));
    rows.emplace_back("N2 bracket", fmt::format("({}, {}]", t.n2.low, t.n2.high));
    rows.emplace_back("probes", fmt::format("{} ({} sacrificial)", t.probe_count,
                                            t.sacrificial_probes));
  }
  rows.emplace_back("candidates", std::to_string(a.candidate_count));
  if (a.recipe) {
    rows.emplace_back("recipe", fmt::format("found, background {:g}, loss {:.4f}",
                                            a.recipe->background, a.recipe->loss_rate));
    for (const RecipeEntry& e : a.recipe->entries) {
      rows.emplace_back(fmt::format("  Eve {} {}", to_string(e.eve_basis), e.eve_bit),
                        e.candidate.label);
    }
  } else {
    rows.emplace_back("recipe", "not found");
  }
  for (const Preimage& p : a.preimages) {
    rows.emplace_back(fmt::format("U_B^-1 {} {} @ {}", to_string(p.desired.basis),
                                  p.desired.bit, to_string(p.desired.time)),
                      preimage_string(p.state));
  }
  std::string out = align(rows);
  if (a.verification) out += "\nreplayed recipe:\n" + report_table(*a.verification);
  return out;
}

RunReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read report '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_report_json(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string compare_runs(const std::vector<NamedReport>& reports) {
  if (reports.size() < 2) throw UsageError("compare needs at least two reports");

  const std::vector<std::string> header{"scenario", "qber", "loss", "invalid", "eve_info",
                                        "aborted"};
  std::vector<std::vector<std::string>> rows{header};
  for (const NamedReport& n : reports) {
    const RunReport& r = n.report;
    rows.push_back({r.scenario, format_rate(r.qber), format_rate(r.loss_rate),
                    format_rate(r.invalid_rate), format_rate(r.eve_info),
                    r.aborted ? "yes" : "no"});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      line += fmt::format("{:<{}}", row[i], width[i] + (i + 1 < row.size() ? 2 : 0));
    }
    out += line + "\n";
  }

  // Contrasts: what an honest party sees versus what Eve learns.
  const RunReport& ref = reports.front().report;
  constexpr double kSame = 1e-9;
  for (std::size_t k = 1; k < reports.size(); ++k) {
    const RunReport& r = reports[k].report;
    const bool same_qber = ref.qber && r.qber && std::abs(*ref.qber - *r.qber) <= kSame;
    std::string note = fmt::format("{} vs {}:", r.scenario, ref.scenario);
    if (same_qber) {
      note += " same qber";
    } else {
      note += fmt::format(" qber {} -> {}", format_rate(ref.qber), format_rate(r.qber));
    }
    if (std::abs(ref.eve_info - r.eve_info) > kSame) {
      note += fmt::format(", eve_info {:.4f} -> {:.4f}", ref.eve_info, r.eve_info);
    }
    if (std::abs(ref.loss_rate - r.loss_rate) > kSame) {
      note += fmt::format(", loss {:.4f} -> {:.4f}", ref.loss_rate, r.loss_rate);
    }
    if (ref.aborted != r.aborted) note += r.aborted ? ", aborts" : ", no longer aborts";
    if (same_qber && r.eve_info > ref.eve_info + kSame && !r.aborted) {
      note += "  <- undetected information gain";
    }
    out += note + "\n";
  }
  return out;
}

}  // namespace qkdsim
