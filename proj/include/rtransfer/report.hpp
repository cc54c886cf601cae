#pragma once

// Transfer grid (training setting x test setting x direction) and its
// Markdown / CSV / bar-chart renderings.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtransfer/attack.hpp"
#include "rtransfer/corpus.hpp"
#include "rtransfer/error.hpp"
#include "rtransfer/metrics.hpp"

namespace rtransfer {

enum class Setting { Clean, CharAttack, WordAttack, MultiAttack };

inline constexpr std::array<Setting, 4> kAllSettings = {Setting::Clean, Setting::CharAttack, Setting::WordAttack,
                                                        Setting::MultiAttack};

inline std::string_view to_string(Setting s) {
  switch (s) {
    case Setting::Clean: return "clean";
    case Setting::CharAttack: return "char";
    case Setting::WordAttack: return "word";
    case Setting::MultiAttack: return "multi";
  }
  return "?";
}

inline std::string_view display_name(Setting s) {
  switch (s) {
    case Setting::Clean: return "clean corpus";
    case Setting::CharAttack: return "character-level attack";
    case Setting::WordAttack: return "word-level attack";
    case Setting::MultiAttack: return "multi-level attack";
  }
  return "?";
}

inline Setting parse_setting(std::string_view s) {
  for (Setting x : kAllSettings)
    if (to_string(x) == s) return x;
  throw Error(ErrorKind::InvalidArgument, "unknown setting '" + std::string(s) + "' (clean|char|word|multi)");
}

/// Attack level of a non-clean setting.
inline std::optional<AttackLevel> level_of(Setting s) {
  switch (s) {
    case Setting::Clean: return std::nullopt;
    case Setting::CharAttack: return AttackLevel::Char;
    case Setting::WordAttack: return AttackLevel::Word;
    case Setting::MultiAttack: return AttackLevel::Multi;
  }
  return std::nullopt;
}

struct GridKey {
  Setting train;
  Setting test;
  Direction direction;

  auto operator<=>(const GridKey&) const = default;
};

struct ReportCell {
  double bleu = 0.0;
  // Percent change against the clean-trained model on the same test
  // setting and direction.
  std::optional<double> delta_pct;
  BleuResult detail;
  std::string hyp_sha256;
  std::string ref_sha256;
};

struct TransferReport {
  std::vector<Setting> settings;
  std::vector<Direction> directions;
  Direction attacked;
  std::map<GridKey, ReportCell> grid;
  // Free-form run metadata (seed, dataset, timestamps); rendered in order.
  std::vector<std::pair<std::string, std::string>> metadata;

  bool complete() const {
    for (Setting tr : settings)
      for (Setting te : settings)
        for (const auto& d : directions)
          if (!grid.count({tr, te, d})) return false;
    return true;
  }

  void require_complete() const {
    for (Setting tr : settings)
      for (Setting te : settings)
        for (const auto& d : directions)
          if (!grid.count({tr, te, d}))
            throw Error(ErrorKind::IncompleteGrid, "missing cell " + std::string(to_string(tr)) + "/" +
                                                       std::string(to_string(te)) + "/" + d.id());
  }

  /// Fills delta_pct of every cell from the clean-trained row. The clean row
  /// is 0 by definition; other cells whose baseline BLEU is 0 get no delta.
  void compute_deltas() {
    for (auto& [key, cell] : grid) {
      if (key.train == Setting::Clean) {
        cell.delta_pct = 0.0;
        continue;
      }
      auto base = grid.find({Setting::Clean, key.test, key.direction});
      if (base == grid.end() || !(base->second.bleu > 0.0)) {
        cell.delta_pct.reset();
        continue;
      }
      cell.delta_pct = percent_improvement(cell.bleu, base->second.bleu);
    }
  }

  /// Training settings whose cell is bold for (test setting, direction).
  std::vector<Setting> best_training(Setting test, const Direction& d) const {
    std::vector<double> column;
    for (Setting tr : settings) column.push_back(grid.at({tr, test, d}).bleu);
    std::vector<Setting> best;
    for (std::size_t i : mark_best(column)) best.push_back(settings[i]);
    return best;
  }
};

enum class ReportFormat { Markdown, Csv, DeltasTsv };

namespace detail {

inline std::string render_markdown(const TransferReport& r) {
  std::string out = "# Robustness transfer report\n\n";
  for (const auto& [k, v] : r.metadata) out += "- " + k + ": " + v + "\n";
  if (!r.metadata.empty()) out += "\n";
  out += "| Training dataset | Test dataset |";
  for (const auto& d : r.directions) out += " " + d.id() + (d == r.attacked ? " (attacked)" : "") + " |";
  out += "\n|---|---|";
  for (std::size_t i = 0; i < r.directions.size(); ++i) out += "---|";
  out += "\n";

  for (Setting tr : r.settings) {
    for (Setting te : r.settings) {
      out += "| " + std::string(display_name(tr)) + " | " + std::string(display_name(te)) + " |";
      for (const auto& d : r.directions) {
        const auto& cell = r.grid.at({tr, te, d});
        const auto best = r.best_training(te, d);
        const bool bold = std::find(best.begin(), best.end(), tr) != best.end();
        std::string text = format_fixed(cell.bleu, 1);
        if (bold) text = "**" + text + "**";
        if (tr == te && tr != Setting::Clean && d != r.attacked && cell.delta_pct)
          text += " (" + format_delta(*cell.delta_pct) + ")";
        out += " " + text + " |";
      }
      out += "\n";
    }
  }
  out += "\nBold: best training setting for each test set and direction. "
         "Percentages: change against the clean-trained model on the same test set.\n";
  return out;
}

inline std::string render_csv(const TransferReport& r) {
  std::string out =
      "train_setting,test_setting,direction,attacked,bleu,delta_pct,bp,p1,p2,p3,p4,hyp_len,ref_len,hyp_sha256,"
      "ref_sha256\n";
  for (Setting tr : r.settings)
    for (Setting te : r.settings)
      for (const auto& d : r.directions) {
        const auto& c = r.grid.at({tr, te, d});
        out += std::string(to_string(tr)) + "," + std::string(to_string(te)) + "," + d.id() + "," +
               (d == r.attacked ? "1" : "0") + "," + format_fixed(c.bleu, 4) + "," +
               (c.delta_pct ? format_fixed(*c.delta_pct, 4) : std::string()) + "," +
               format_fixed(c.detail.brevity_penalty, 4);
        for (std::size_t n = 0; n < kBleuOrder; ++n)
          out += "," + std::to_string(c.detail.matches[n]) + "/" + std::to_string(c.detail.totals[n]);
        out += "," + std::to_string(c.detail.hyp_len) + "," + std::to_string(c.detail.ref_len) + "," + c.hyp_sha256 +
               "," + c.ref_sha256 + "\n";
      }
  return out;
}

inline std::string render_deltas(const TransferReport& r) {
  std::string out = "direction\ttrain_setting\ttest_setting\tattacked\tdelta_pct\n";
  for (const auto& d : r.directions)
    for (Setting tr : r.settings) {
      if (tr == Setting::Clean) continue;
      for (Setting te : r.settings) {
        const auto& c = r.grid.at({tr, te, d});
        out += d.id() + "\t" + std::string(to_string(tr)) + "\t" + std::string(to_string(te)) + "\t" +
               (d == r.attacked ? "1" : "0") + "\t" + (c.delta_pct ? format_fixed(*c.delta_pct, 1) : "NA") + "\n";
      }
    }
  return out;
}

}  // namespace detail

inline std::string render_report(const TransferReport& report, ReportFormat format) {
  report.require_complete();
  switch (format) {
    case ReportFormat::Markdown: return detail::render_markdown(report);
    case ReportFormat::Csv: return detail::render_csv(report);
    case ReportFormat::DeltasTsv: return detail::render_deltas(report);
  }
  return {};
}

}  // namespace rtransfer
