#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "tapverify/error.hpp"
#include "tapverify/meter/report.hpp"
#include "tapverify/meter/savings.hpp"
#include "tapverify/meter/timing.hpp"
#include "tapverify/numcore/kernels.hpp"
#include "tapverify/numcore/random.hpp"
#include "tapverify/scale/profile.hpp"

namespace tv = tapverify;
namespace mt = tapverify::meter;
using tv::numcore::MeterContext;
using tv::numcore::Tensor;

namespace {

tv::scale::PaperProfile profile(const std::string& name) {
  return tv::scale::load_profile(std::filesystem::path(TAPVERIFY_TEST_DATA_DIR) / "profiles" /
                                 (name + ".json"));
}

const mt::SavingsRow& row_for(const std::vector<mt::SavingsRow>& rows, const std::string& c) {
  for (const auto& r : rows)
    if (r.candidate == c) return r;
  throw std::runtime_error("no row " + c);
}

}  // namespace

TEST(Savings, Percentage) {
  EXPECT_DOUBLE_EQ(mt::saved_pct(200, 50), 75.0);
  EXPECT_DOUBLE_EQ(mt::saved_pct(100, 120), -20.0);
  EXPECT_THROW(mt::saved_pct(0, 1), tv::InvalidArgument);
}

TEST(Savings, SanaTableRows) {
  const auto rows = mt::savings_table(profile("sana"));
  ASSERT_EQ(rows.size(), 2u);
  const auto& hidden = row_for(rows, "hidden_state");
  EXPECT_NEAR(hidden.time_saved_pct, 63.3, 0.2);
  EXPECT_NEAR(*hidden.flops_saved_pct, 62.9, 0.2);
  EXPECT_NEAR(*hidden.mem_saved_pct, 14.5, 0.2);
  const auto& ae = row_for(rows, "ae_latent");
  EXPECT_NEAR(ae.time_saved_pct, 50.2, 0.2);
  EXPECT_NEAR(*ae.flops_saved_pct, 51.0, 0.2);
  EXPECT_NEAR(*ae.mem_saved_pct, 14.5, 0.2);
  EXPECT_EQ(hidden.baseline, "pixel_reencode");
}

TEST(Savings, PixartTimeOnly) {
  const auto rows = mt::savings_table(profile("pixart"));
  const auto& hidden = row_for(rows, "hidden_state");
  // 1 - 76/145 = 47.6%, within half a point of the quoted 48.0.
  EXPECT_NEAR(hidden.time_saved_pct, 48.0, 0.5);
  EXPECT_FALSE(hidden.flops_saved_pct.has_value());
}

TEST(Report, CsvAndJsonRoundTrip) {
  const auto rows = mt::savings_table(profile("sana"));
  const auto stem = std::filesystem::temp_directory_path() / "tapverify_report";
  const nlohmann::json meta{{"config", {{"profile", "sana"}, {"n", 1}}}, {"source", "test"}};
  const auto paths = mt::emit_report(stem, rows, meta);
  std::ifstream in(paths.csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, mt::kSavingsCsvHeader);

  const auto csv_rows = mt::read_report_csv(paths.csv);
  ASSERT_EQ(csv_rows.size(), rows.size());
  EXPECT_NEAR(csv_rows[0].time_saved_pct, rows[0].time_saved_pct, 0.05);

  const auto parsed = mt::read_report_json(paths.json);
  EXPECT_EQ(parsed.schema_version, mt::kReportSchemaVersion);
  EXPECT_EQ(parsed.rows, rows);
  EXPECT_EQ(parsed.config_hash, mt::config_hash(meta["config"]));
}

TEST(Report, ConfigHashIsKeyOrderInsensitive) {
  const auto a = nlohmann::json::parse(R"({"b": 1, "a": [1, 2]})");
  const auto b = nlohmann::json::parse(R"({"a": [1, 2], "b": 1})");
  EXPECT_EQ(mt::config_hash(a), mt::config_hash(b));
  EXPECT_EQ(mt::config_hash(a).size(), 16u);
  EXPECT_NE(mt::config_hash(a), mt::config_hash(nlohmann::json{{"b", 2}}));
}

TEST(Report, FormatsOneDecimal) {
  EXPECT_EQ(mt::format_pct(63.2851), "63.3");
  EXPECT_EQ(mt::format_pct(-0.04), "0.0");
  EXPECT_EQ(mt::format_pct(14.5), "14.5");
}

TEST(Timing, RunsAndWarmupCounted) {
  int calls = 0;
  tv::numcore::Rng rng(1);
  const Tensor a = rng.normal_tensor({16, 16}, 1.0);
  const auto report = mt::time_pipeline(
      [&](MeterContext& ctx) {
        ++calls;
        tv::numcore::matmul(a, a, ctx);
      },
      5, 2);
  EXPECT_EQ(calls, 7);
  EXPECT_EQ(report.runs, 5u);
  EXPECT_EQ(report.samples_ms.size(), 5u);
  EXPECT_EQ(report.flops_total, 2u * 16 * 16 * 16);
  EXPECT_TRUE(report.flops_invariant);
  EXPECT_GT(report.bytes_peak, 0u);
  EXPECT_THROW(mt::time_pipeline([](MeterContext&) {}, 1), tv::InvalidArgument);
}

TEST(Timing, LiveSavingsRow) {
  mt::TimingReport base, cand;
  base.mean_ms = 10;
  base.flops_total = 1000;
  base.bytes_peak = 400;
  cand.mean_ms = 4;
  cand.flops_total = 300;
  cand.bytes_peak = 300;
  const auto r = mt::savings_row("pixel_reencode", base, "hidden_state", cand);
  EXPECT_DOUBLE_EQ(r.time_saved_pct, 60.0);
  EXPECT_DOUBLE_EQ(*r.flops_saved_pct, 70.0);
  EXPECT_DOUBLE_EQ(*r.mem_saved_pct, 25.0);
}
