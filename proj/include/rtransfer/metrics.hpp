#pragma once

// Corpus BLEU and the relative-improvement arithmetic of the transfer
// reports.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rtransfer/attack.hpp"
#include "rtransfer/error.hpp"

namespace rtransfer {

inline constexpr std::size_t kBleuOrder = 4;

struct BleuResult {
  double score = 0.0;
  std::array<std::size_t, kBleuOrder> matches{};
  std::array<std::size_t, kBleuOrder> totals{};
  double brevity_penalty = 1.0;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;

  double precision(std::size_t n) const {
    return totals[n] == 0 ? 0.0 : static_cast<double>(matches[n]) / static_cast<double>(totals[n]);
  }
};

/// Sufficient statistics of one sentence pair, added up over the corpus.
struct BleuStats {
  std::array<std::size_t, kBleuOrder> matches{};
  std::array<std::size_t, kBleuOrder> totals{};
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;

  BleuStats& operator+=(const BleuStats& o) {
    for (std::size_t n = 0; n < kBleuOrder; ++n) {
      matches[n] += o.matches[n];
      totals[n] += o.totals[n];
    }
    hyp_len += o.hyp_len;
    ref_len += o.ref_len;
    return *this;
  }
};

namespace detail {
inline std::map<std::vector<std::string_view>, std::size_t> ngram_counts(const std::vector<std::string_view>& toks,
                                                                        std::size_t n) {
  std::map<std::vector<std::string_view>, std::size_t> counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i)
    ++counts[std::vector<std::string_view>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                           toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return counts;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> toks;
  std::size_t i = 0;
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (i < line.size()) {
    while (i < line.size() && ws(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !ws(line[j])) ++j;
    if (j > i) toks.push_back(line.substr(i, j - i));
    i = j;
  }
  return toks;
}
}  // namespace detail

/// Clipped n-gram statistics of a single (hypothesis, reference) pair.
inline BleuStats sentence_stats(std::string_view hypothesis, std::string_view reference) {
  const auto hyp = detail::split_ws(hypothesis);
  const auto ref = detail::split_ws(reference);
  BleuStats s;
  s.hyp_len = hyp.size();
  s.ref_len = ref.size();
  for (std::size_t n = 1; n <= kBleuOrder; ++n) {
    const auto hc = detail::ngram_counts(hyp, n);
    const auto rc = detail::ngram_counts(ref, n);
    for (const auto& [gram, count] : hc) {
      auto it = rc.find(gram);
      if (it != rc.end()) s.matches[n - 1] += std::min(count, it->second);
    }
    s.totals[n - 1] = hyp.size() >= n ? hyp.size() - n + 1 : 0;
  }
  return s;
}

/// BLEU-4 from aggregated statistics. Without smoothing any zero precision
/// yields 0. `add_one` smooths orders 2..4 as (m + 1) / (t + 1).
inline BleuResult bleu_from_stats(const BleuStats& s, bool add_one = false) {
  BleuResult r;
  r.matches = s.matches;
  r.totals = s.totals;
  r.hyp_len = s.hyp_len;
  r.ref_len = s.ref_len;
  if (s.hyp_len == 0) {
    r.brevity_penalty = 0.0;
    r.score = 0.0;
    return r;
  }
  r.brevity_penalty =
      s.hyp_len < s.ref_len ? std::exp(1.0 - static_cast<double>(s.ref_len) / static_cast<double>(s.hyp_len)) : 1.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    double m = static_cast<double>(s.matches[n]);
    double t = static_cast<double>(s.totals[n]);
    if (add_one && n > 0) {
      m += 1.0;
      t += 1.0;
    }
    if (m == 0.0 || t == 0.0) {
      r.score = 0.0;
      return r;
    }
    log_sum += std::log(m / t);
  }
  r.score = 100.0 * r.brevity_penalty * std::exp(log_sum / static_cast<double>(kBleuOrder));
  return r;
}

inline BleuResult corpus_bleu(std::span<const std::string> hypotheses, std::span<const std::string> references,
                              bool add_one = false) {
  if (hypotheses.size() != references.size())
    throw Error(ErrorKind::LengthMismatch, std::to_string(hypotheses.size()) + " hypotheses vs " +
                                               std::to_string(references.size()) + " references");
  if (hypotheses.empty()) throw Error(ErrorKind::EmptyCorpus, "no sentences to score");
  BleuStats total;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) total += sentence_stats(hypotheses[i], references[i]);
  return bleu_from_stats(total, add_one);
}

// ---------------------------------------------------------------------------
// Report arithmetic

/// Rounds half up (towards +inf) at `decimals` places.
inline double round_half_up(double x, int decimals = 1) {
  const double scale = std::pow(10.0, decimals);
  // Nudge values that are a representation error away from the half point.
  return std::floor(x * scale + 0.5 + 1e-9) / scale;
}

inline std::string format_fixed(double x, int decimals) {
  const double r = round_half_up(x, decimals);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r == 0.0 ? 0.0 : r);
  return buf;
}

/// Percent change of an attacked-trained model's BLEU over the clean-trained
/// model's on the same test set: (a - c) / c * 100, unrounded.
inline double percent_improvement(double attacked_model_bleu, double clean_model_bleu) {
  if (!(clean_model_bleu > 0.0))
    throw Error(ErrorKind::ZeroBaseline, "clean-model BLEU must be positive, got " + std::to_string(clean_model_bleu));
  return (attacked_model_bleu - clean_model_bleu) / clean_model_bleu * 100.0;
}

/// "↑27.1%" / "↓1.3%"; zero renders as "↑0.0%".
inline std::string format_delta(double delta_pct) {
  const double r = round_half_up(delta_pct, 1);
  return (r < 0 ? "↓" : "↑") + format_fixed(std::abs(r), 1) + "%";
}

/// Indices of every cell attaining the column maximum at one-decimal
/// display precision (ties are all marked).
inline std::vector<std::size_t> mark_best(std::span<const double> column) {
  std::vector<std::size_t> best;
  if (column.empty()) return best;
  double top = -INFINITY;
  for (double v : column) top = std::max(top, round_half_up(v, 1));
  for (std::size_t i = 0; i < column.size(); ++i)
    if (round_half_up(column[i], 1) == top) best.push_back(i);
  return best;
}

/// `BLEU=<x.x> P=<p1/p2/p3/p4> BP=<b.bbb> len=<hyp>/<ref>`, precisions in
/// percent.
inline std::string format_bleu_line(const BleuResult& r) {
  std::string p;
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    if (n) p += '/';
    p += format_fixed(100.0 * r.precision(n), 1);
  }
  return "BLEU=" + format_fixed(r.score, 1) + " P=" + p + " BP=" + format_fixed(r.brevity_penalty, 3) +
         " len=" + std::to_string(r.hyp_len) + "/" + std::to_string(r.ref_len);
}

}  // namespace rtransfer
