#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tapverify/meter/savings.hpp"

namespace tapverify::meter {

inline constexpr int kReportSchemaVersion = 1;

// Fixed CSV column order.
inline constexpr const char* kSavingsCsvHeader =
    "baseline,candidate,time_saved_pct,flops_saved_pct,mem_saved_pct";

// FNV-1a of the canonical (key-sorted, compact) JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

struct ReportPaths {
  std::filesystem::path csv;
  std::filesystem::path json;
};

// Writes `<stem>.csv` (percentages to one decimal) and `<stem>.json`
// (schema_version, metadata, config_hash of metadata["config"], raw rows).
// Throws IoError when a file cannot be written.
ReportPaths emit_report(const std::filesystem::path& stem, const std::vector<SavingsRow>& rows,
                        const nlohmann::json& metadata);

std::vector<SavingsRow> read_report_csv(const std::filesystem::path& path);

struct ParsedReport {
  int schema_version = 0;
  nlohmann::json metadata;
  std::string config_hash;
  std::vector<SavingsRow> rows;
};
ParsedReport read_report_json(const std::filesystem::path& path);

// Percentage formatted with one decimal, as in the CSV.
std::string format_pct(double value);

}  // namespace tapverify::meter
