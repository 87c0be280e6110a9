#include "tapverify/meter/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tapverify/error.hpp"
#include "tapverify/numcore/random.hpp"

namespace tapverify::meter {

namespace {

nlohmann::json optional_value(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> parse_optional(const std::string& field) {
  if (field.empty()) return std::nullopt;
  return std::stod(field);
}

}  // namespace

std::string format_pct(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", value);
  const std::string out(buf);
  return out == "-0.0" ? "0.0" : out;
}

std::string config_hash(const nlohmann::json& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(numcore::fnv1a64(config.dump())));
  return buf;
}

ReportPaths emit_report(const std::filesystem::path& stem, const std::vector<SavingsRow>& rows,
                        const nlohmann::json& metadata) {
  ReportPaths paths{std::filesystem::path(stem.string() + ".csv"),
                    std::filesystem::path(stem.string() + ".json")};
  std::ofstream csv(paths.csv, std::ios::trunc);
  if (!csv) throw IoError("cannot write report: " + paths.csv.string());
  csv << kSavingsCsvHeader << '\n';
  for (const auto& r : rows) {
    csv << r.baseline << ',' << r.candidate << ',' << format_pct(r.time_saved_pct) << ','
        << (r.flops_saved_pct ? format_pct(*r.flops_saved_pct) : "") << ','
        << (r.mem_saved_pct ? format_pct(*r.mem_saved_pct) : "") << '\n';
  }
  if (!csv) throw IoError("failed writing report: " + paths.csv.string());

  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["metadata"] = metadata;
  j["config_hash"] = config_hash(metadata.value("config", nlohmann::json::object()));
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"baseline", r.baseline},
                         {"candidate", r.candidate},
                         {"time_saved_pct", r.time_saved_pct},
                         {"flops_saved_pct", optional_value(r.flops_saved_pct)},
                         {"mem_saved_pct", optional_value(r.mem_saved_pct)}});
  }
  std::ofstream js(paths.json, std::ios::trunc);
  if (!js) throw IoError("cannot write report: " + paths.json.string());
  js << j.dump(2) << '\n';
  if (!js) throw IoError("failed writing report: " + paths.json.string());
  return paths;
}

std::vector<SavingsRow> read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read report: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kSavingsCsvHeader) {
    throw IoError("unexpected report header in " + path.string());
  }
  std::vector<SavingsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 5) throw IoError("malformed report row: " + line);
    rows.push_back({fields[0], fields[1], std::stod(fields[2]), parse_optional(fields[3]),
                    parse_optional(fields[4])});
  }
  return rows;
}

ParsedReport read_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read report: " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    ParsedReport r;
    r.schema_version = j.at("schema_version").get<int>();
    r.metadata = j.at("metadata");
    r.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& row : j.at("rows")) {
      SavingsRow s{row.at("baseline").get<std::string>(), row.at("candidate").get<std::string>(),
                   row.at("time_saved_pct").get<double>(), std::nullopt, std::nullopt};
      if (!row.at("flops_saved_pct").is_null()) s.flops_saved_pct = row["flops_saved_pct"].get<double>();
      if (!row.at("mem_saved_pct").is_null()) s.mem_saved_pct = row["mem_saved_pct"].get<double>();
      r.rows.push_back(std::move(s));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed report " + path.string() + ": " + e.what());
  }
}

}  // namespace tapverify::meter
