#include <gtest/gtest.h>

#include "rtransfer/report.hpp"
#include "support/published_report.hpp"

namespace rt = rtransfer;
using rt::testing::kTable1;

TEST(Report, TableOneBoldingMatches) {
  const auto r = rt::testing::report_from(kTable1);
  const auto md = rt::render_report(r, rt::ReportFormat::Markdown);
  const auto flags = rt::testing::bold_flags(md);
  ASSERT_EQ(flags.size(), 64u);
  std::size_t i = 0;
  for (int tr = 0; tr < 4; ++tr)
    for (int te = 0; te < 4; ++te)
      for (int d = 0; d < 4; ++d, ++i)
        EXPECT_EQ(flags[i], kTable1.at(tr, te, d).bold) << "train " << tr << " test " << te << " dir " << d;
  EXPECT_NE(md.find("| character-level attack | character-level attack | **38.8** | **12.2** (↑27.1%)"),
            std::string::npos)
      << md;
  EXPECT_NE(md.find("en-fr (attacked)"), std::string::npos);
}

TEST(Report, DeltasAgainstCleanRow) {
  const auto r = rt::testing::report_from(kTable1);
  const rt::Direction ja("en", "ja");
  for (rt::Setting te : rt::kAllSettings) {
    EXPECT_EQ(*r.grid.at({rt::Setting::Clean, te, ja}).delta_pct, 0.0);
  }
  EXPECT_NEAR(*r.grid.at({rt::Setting::CharAttack, rt::Setting::CharAttack, ja}).delta_pct, 27.083, 1e-3);
}

TEST(Report, ZeroBaselineHasNoDelta) {
  auto r = rt::testing::report_from(kTable1);
  const rt::Direction de("en", "de");
  r.grid[{rt::Setting::Clean, rt::Setting::WordAttack, de}].bleu = 0.0;
  r.compute_deltas();
  EXPECT_FALSE(r.grid.at({rt::Setting::MultiAttack, rt::Setting::WordAttack, de}).delta_pct);
  EXPECT_EQ(*r.grid.at({rt::Setting::Clean, rt::Setting::WordAttack, de}).delta_pct, 0.0);
  const auto tsv = rt::render_report(r, rt::ReportFormat::DeltasTsv);
  EXPECT_NE(tsv.find("en-de\tmulti\tword\t0\tNA\n"), std::string::npos) << tsv;
}

TEST(Report, CsvAndTsvShapes) {
  const auto r = rt::testing::report_from(kTable1);
  const auto csv = rt::render_report(r, rt::ReportFormat::Csv);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 65);
  EXPECT_NE(csv.find("char,char,en-ja,0,12.2000,27.0833,"), std::string::npos) << csv;
  const auto tsv = rt::render_report(r, rt::ReportFormat::DeltasTsv);
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 1 + 4 * 3 * 4);
  EXPECT_NE(tsv.find("en-ja\tchar\tchar\t0\t27.1\n"), std::string::npos);
}

TEST(Report, IncompleteGridIsRejected) {
  auto r = rt::testing::report_from(kTable1);
  r.grid.erase(r.grid.begin());
  EXPECT_FALSE(r.complete());
  try {
    rt::render_report(r, rt::ReportFormat::Markdown);
    FAIL();
  } catch (const rt::Error& e) {
    EXPECT_EQ(e.kind(), rt::ErrorKind::IncompleteGrid);
  }
}

TEST(Report, SettingNames) {
  for (auto s : rt::kAllSettings) EXPECT_EQ(rt::parse_setting(rt::to_string(s)), s);
  EXPECT_THROW(rt::parse_setting("noise"), rt::Error);
  EXPECT_FALSE(rt::level_of(rt::Setting::Clean));
  EXPECT_EQ(*rt::level_of(rt::Setting::MultiAttack), rt::AttackLevel::Multi);
}
