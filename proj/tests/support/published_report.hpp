#pragma once

// Builds TransferReports from the printed published grids.

#include <string>

#include "rtransfer/report.hpp"
#include "support/published_tables.hpp"

namespace rtransfer::testing {

inline TransferReport report_from(const PublishedTable& t) {
  TransferReport r;
  r.settings.assign(kAllSettings.begin(), kAllSettings.end());
  for (auto d : t.directions) r.directions.push_back(Direction::parse(d));
  r.attacked = Direction::parse(t.attacked);
  for (int tr = 0; tr < 4; ++tr)
    for (int te = 0; te < 4; ++te)
      for (int d = 0; d < 4; ++d) {
        ReportCell c;
        c.bleu = t.at(tr, te, d).bleu;
        r.grid[{kAllSettings[tr], kAllSettings[te], r.directions[d]}] = c;
      }
  r.compute_deltas();
  return r;
}

/// Bold flags parsed back out of a rendered Markdown table, in
/// (train, test, direction) order.
inline std::vector<bool> bold_flags(const std::string& markdown) {
  std::vector<bool> flags;
  std::size_t pos = 0;
  while ((pos = markdown.find("\n| ", pos)) != std::string::npos) {
    ++pos;
    const auto end = markdown.find('\n', pos);
    const std::string row = markdown.substr(pos, end - pos);
    if (row.rfind("| Training", 0) == 0 || row.rfind("|---", 0) == 0) continue;
    // Skip the two label cells.
    std::size_t cell = 0, i = 0;
    while ((i = row.find('|', i)) != std::string::npos) {
      const auto next = row.find('|', i + 1);
      if (next == std::string::npos) break;
      if (cell >= 2) flags.push_back(row.substr(i + 1, next - i - 1).find("**") != std::string::npos);
      ++cell;
      i = next;
    }
  }
  return flags;
}

}  // namespace rtransfer::testing
