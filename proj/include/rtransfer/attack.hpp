#pragma once

// Black-box noise operations and the sentence-level attack procedure.
//
// An attack on a sentence of n tokens applies clamp(round_half_up(p * n), 1, n)
// events. Each event targets a distinct original token position (sampled
// without replacement) and draws its operation from the configured weights.
// Operations that are illegal for the current target fall back so that the
// procedure is total:
//   - CharDelete / CharSwapAdjacent on a token without a usable pair, or
//     CharSubstitute without an alternative cluster: redraw among the legal
//     character operations of positive weight, else CharInsert.
//   - WordSwap / WordDelete on a one-token sentence: redraw among the legal
//     word operations of positive weight, else the character fallback.
//   - WordInsert / WordReplace on an out-of-vocabulary target: retarget to a
//     uniformly chosen in-vocabulary token; with none left, degrade to
//     WordSwap, or to CharSubstitute on a one-token sentence.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rtransfer/embedding.hpp"
#include "rtransfer/error.hpp"
#include "rtransfer/rng.hpp"
#include "rtransfer/unicode.hpp"

namespace rtransfer {

enum class AttackLevel { Char, Word, Multi };

enum class NoiseOp : std::uint8_t {
  CharInsert,
  CharDelete,
  CharSubstitute,
  CharSwapAdjacent,
  WordSwap,
  WordDelete,
  WordInsert,
  WordReplace,
};

inline constexpr std::size_t kNumOps = 8;

inline constexpr std::array<NoiseOp, kNumOps> kAllOps = {
    NoiseOp::CharInsert, NoiseOp::CharDelete, NoiseOp::CharSubstitute, NoiseOp::CharSwapAdjacent,
    NoiseOp::WordSwap,   NoiseOp::WordDelete, NoiseOp::WordInsert,     NoiseOp::WordReplace,
};

constexpr std::size_t op_index(NoiseOp op) noexcept { return static_cast<std::size_t>(op); }
constexpr bool is_char_op(NoiseOp op) noexcept { return op_index(op) < 4; }
constexpr bool is_word_op(NoiseOp op) noexcept { return !is_char_op(op); }

constexpr bool level_allows(AttackLevel level, NoiseOp op) noexcept {
  switch (level) {
    case AttackLevel::Char: return is_char_op(op);
    case AttackLevel::Word: return is_word_op(op);
    case AttackLevel::Multi: return true;
  }
  return false;
}

inline std::string_view to_string(NoiseOp op) {
  static constexpr std::array<std::string_view, kNumOps> names = {
      "CharInsert", "CharDelete", "CharSubstitute", "CharSwapAdjacent",
      "WordSwap",   "WordDelete", "WordInsert",     "WordReplace",
  };
  return names[op_index(op)];
}

inline std::optional<NoiseOp> parse_noise_op(std::string_view s) {
  for (NoiseOp op : kAllOps)
    if (to_string(op) == s) return op;
  return std::nullopt;
}

inline std::string_view to_string(AttackLevel level) {
  switch (level) {
    case AttackLevel::Char: return "char";
    case AttackLevel::Word: return "word";
    case AttackLevel::Multi: return "multi";
  }
  return "?";
}

inline std::optional<AttackLevel> parse_attack_level(std::string_view s) {
  if (s == "char") return AttackLevel::Char;
  if (s == "word") return AttackLevel::Word;
  if (s == "multi") return AttackLevel::Multi;
  return std::nullopt;
}

using OpWeights = std::array<double, kNumOps>;

/// Uniform over the level's operation set: 0.25 each for Char or Word,
/// 0.125 each for Multi.
inline OpWeights default_weights(AttackLevel level) {
  OpWeights w{};
  std::size_t n = 0;
  for (NoiseOp op : kAllOps) n += level_allows(level, op);
  for (NoiseOp op : kAllOps)
    if (level_allows(level, op)) w[op_index(op)] = 1.0 / static_cast<double>(n);
  return w;
}

struct AttackConfig {
  AttackLevel level = AttackLevel::Char;
  double proportion = 0.1;
  OpWeights weights = default_weights(AttackLevel::Char);
  std::size_t top_k = 10;
  // Explicit character pool; empty means the corpus-local pool.
  std::string alphabet;
  std::uint64_t seed = 0;

  static AttackConfig for_level(AttackLevel level) {
    AttackConfig c;
    c.level = level;
    c.weights = default_weights(level);
    return c;
  }

  bool uses_word_ops() const {
    for (NoiseOp op : kAllOps)
      if (is_word_op(op) && weights[op_index(op)] > 0.0) return true;
    return false;
  }

  void validate() const {
    if (!(proportion > 0.0 && proportion <= 1.0))
      throw Error(ErrorKind::InvalidArgument, "proportion must be in (0, 1], got " + std::to_string(proportion));
    if (top_k == 0) throw Error(ErrorKind::InvalidArgument, "top_k must be positive");
    double sum = 0.0;
    for (NoiseOp op : kAllOps) {
      const double w = weights[op_index(op)];
      if (!(w >= 0.0) || !std::isfinite(w))
        throw Error(ErrorKind::InvalidArgument, "negative weight for " + std::string(to_string(op)));
      if (w > 0.0 && !level_allows(level, op))
        throw Error(ErrorKind::InvalidArgument, std::string(to_string(op)) + " is not part of the " +
                                                    std::string(to_string(level)) + " level");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw Error(ErrorKind::InvalidArgument, "operation weights sum to " + std::to_string(sum));
  }
};

/// Events per sentence: clamp(round_half_up(p * n), 1, n).
inline std::size_t select_attack_count(std::size_t n_tokens, double p) {
  if (n_tokens == 0) throw Error(ErrorKind::InvalidArgument, "sentence has no tokens");
  // The epsilon absorbs representation error in products such as 25 * 0.1.
  const double scaled = p * static_cast<double>(n_tokens);
  const auto rounded = static_cast<long long>(std::floor(scaled + 0.5 + 1e-9));
  return static_cast<std::size_t>(std::clamp<long long>(rounded, 1, static_cast<long long>(n_tokens)));
}

// ---------------------------------------------------------------------------
// Tokens

/// Splits a pre-tokenized line on spaces; runs of spaces never yield empty
/// tokens.
inline std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) tokens.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

inline std::string detokenize(const std::vector<std::string>& tokens) { return unicode::join(tokens, " "); }

// ---------------------------------------------------------------------------
// Character pool

/// Sorted set of grapheme clusters that character insertion and
/// substitution draw from.
class Alphabet {
 public:
  Alphabet() = default;

  explicit Alphabet(std::vector<std::string> clusters) : clusters_(std::move(clusters)) {
    std::sort(clusters_.begin(), clusters_.end());
    clusters_.erase(std::unique(clusters_.begin(), clusters_.end()), clusters_.end());
    clusters_.erase(std::remove(clusters_.begin(), clusters_.end(), std::string(" ")), clusters_.end());
  }

  static Alphabet from_string(std::string_view chars) { return Alphabet(unicode::graphemes(chars)); }

  /// Every cluster observed in the tokens of `lines`.
  static Alphabet from_corpus(std::span<const std::string> lines) {
    std::set<std::string> seen;
    for (const auto& line : lines)
      for (const auto& token : tokenize(line))
        for (auto& c : unicode::graphemes(token)) seen.insert(std::move(c));
    return Alphabet(std::vector<std::string>(seen.begin(), seen.end()));
  }

  std::size_t size() const noexcept { return clusters_.size(); }
  bool empty() const noexcept { return clusters_.empty(); }
  const std::vector<std::string>& clusters() const noexcept { return clusters_; }

  bool contains(std::string_view c) const {
    return std::binary_search(clusters_.begin(), clusters_.end(), c, std::less<>());
  }

  /// Number of clusters different from `c`.
  std::size_t alternatives(std::string_view c) const { return size() - (contains(c) ? 1 : 0); }

  const std::string& draw(Rng& rng) const {
    if (empty()) throw Error(ErrorKind::InvalidArgument, "empty alphabet");
    return clusters_[rng.index(clusters_.size())];
  }

  const std::string& draw_excluding(std::string_view c, Rng& rng) const {
    const std::size_t n = alternatives(c);
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "alphabet has no alternative to '" + std::string(c) + "'");
    std::size_t pick = rng.index(n);
    if (contains(c)) {
      const auto pos = static_cast<std::size_t>(
          std::lower_bound(clusters_.begin(), clusters_.end(), c, std::less<>()) - clusters_.begin());
      if (pick >= pos) ++pick;
    }
    return clusters_[pick];
  }

 private:
  std::vector<std::string> clusters_;
};

// ---------------------------------------------------------------------------
// Character operations (grapheme clusters are the unit)

inline std::string char_insert(std::string_view token, const Alphabet& alphabet, Rng& rng) {
  auto clusters = unicode::graphemes(token);
  const std::size_t at = rng.index(clusters.size() + 1);
  clusters.insert(clusters.begin() + static_cast<std::ptrdiff_t>(at), alphabet.draw(rng));
  return unicode::join(clusters);
}

inline bool char_delete_legal(std::string_view token) { return unicode::grapheme_count(token) >= 2; }

inline std::string char_delete(std::string_view token, Rng& rng) {
  auto clusters = unicode::graphemes(token);
  if (clusters.size() < 2) throw Error(ErrorKind::InvalidArgument, "char_delete needs two clusters");
  clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(rng.index(clusters.size())));
  return unicode::join(clusters);
}

inline bool char_substitute_legal(std::string_view token, const Alphabet& alphabet) {
  for (const auto& c : unicode::graphemes(token))
    if (alphabet.alternatives(c) > 0) return true;
  return false;
}

/// Replaces one cluster with a different one from the pool. The position is
/// uniform over clusters that have an alternative in the pool.
inline std::string char_substitute(std::string_view token, const Alphabet& alphabet, Rng& rng) {
  auto clusters = unicode::graphemes(token);
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < clusters.size(); ++i)
    if (alphabet.alternatives(clusters[i]) > 0) eligible.push_back(i);
  if (eligible.empty()) throw Error(ErrorKind::InvalidArgument, "no substitutable cluster in '" + std::string(token) + "'");
  const std::size_t at = eligible[rng.index(eligible.size())];
  clusters[at] = alphabet.draw_excluding(clusters[at], rng);
  return unicode::join(clusters);
}

namespace detail {
inline std::vector<std::size_t> distinct_adjacent_pairs(const std::vector<std::string>& items) {
  std::vector<std::size_t> pairs;
  for (std::size_t i = 0; i + 1 < items.size(); ++i)
    if (items[i] != items[i + 1]) pairs.push_back(i);
  return pairs;
}
}  // namespace detail

inline bool char_swap_legal(std::string_view token) {
  return !detail::distinct_adjacent_pairs(unicode::graphemes(token)).empty();
}

/// Transposes one adjacent pair of distinct clusters.
inline std::string char_swap_adjacent(std::string_view token, Rng& rng) {
  auto clusters = unicode::graphemes(token);
  const auto pairs = detail::distinct_adjacent_pairs(clusters);
  if (pairs.empty()) throw Error(ErrorKind::InvalidArgument, "no swappable pair in '" + std::string(token) + "'");
  const std::size_t i = pairs[rng.index(pairs.size())];
  std::swap(clusters[i], clusters[i + 1]);
  return unicode::join(clusters);
}

// ---------------------------------------------------------------------------
// Word operations

/// Swaps the token at `i` with a uniformly chosen existing neighbour.
/// Returns the index of the neighbour.
inline std::size_t word_swap_at(std::vector<std::string>& tokens, std::size_t i, Rng& rng) {
  if (tokens.size() < 2) throw Error(ErrorKind::InvalidArgument, "word_swap needs two tokens");
  std::size_t j;
  if (i == 0) j = 1;
  else if (i + 1 == tokens.size()) j = i - 1;
  else j = rng.coin() ? i + 1 : i - 1;
  std::swap(tokens[i], tokens[j]);
  return j;
}

inline std::vector<std::string> word_swap(std::vector<std::string> tokens, Rng& rng) {
  if (tokens.size() < 2) throw Error(ErrorKind::InvalidArgument, "word_swap needs two tokens");
  const std::size_t i = rng.index(tokens.size() - 1);
  std::swap(tokens[i], tokens[i + 1]);
  return tokens;
}

inline std::vector<std::string> word_delete(std::vector<std::string> tokens, Rng& rng) {
  if (tokens.size() < 2) throw Error(ErrorKind::InvalidArgument, "word_delete needs two tokens");
  tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(rng.index(tokens.size())));
  return tokens;
}

namespace detail {
inline bool has_neighbors(const EmbeddingStore* store, std::string_view token) {
  return store && store->size() >= 2 && store->contains(token);
}
inline std::size_t effective_k(const EmbeddingStore& store, std::size_t k) {
  return std::min(k, store.size() - 1);
}
}  // namespace detail

/// Inserts an embedding neighbour of a uniformly chosen in-vocabulary
/// anchor, on a uniformly chosen side of the anchor.
inline std::vector<std::string> word_insert(std::vector<std::string> tokens, const EmbeddingStore& store,
                                            std::size_t k, Rng& rng) {
  std::vector<std::size_t> anchors;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (detail::has_neighbors(&store, tokens[i])) anchors.push_back(i);
  if (anchors.empty()) throw Error(ErrorKind::OutOfVocabulary, "no in-vocabulary anchor");
  const std::size_t at = anchors[rng.index(anchors.size())];
  std::string word = store.sample_neighbor(tokens[at], detail::effective_k(store, k), rng);
  const std::size_t pos = rng.coin() ? at + 1 : at;
  tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(pos), std::move(word));
  return tokens;
}

/// Replaces a uniformly chosen in-vocabulary token with an embedding
/// neighbour.
inline std::vector<std::string> word_replace(std::vector<std::string> tokens, const EmbeddingStore& store,
                                             std::size_t k, Rng& rng) {
  std::vector<std::size_t> targets;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (detail::has_neighbors(&store, tokens[i])) targets.push_back(i);
  if (targets.empty()) throw Error(ErrorKind::OutOfVocabulary, "no in-vocabulary target");
  const std::size_t at = targets[rng.index(targets.size())];
  tokens[at] = store.sample_neighbor(tokens[at], detail::effective_k(store, k), rng);
  return tokens;
}

// ---------------------------------------------------------------------------
// Sentence attack

struct AttackEvent {
  NoiseOp drawn;
  NoiseOp applied;
  // Original index of the token the event was aimed at.
  std::size_t position;
  // Token acted on and what it became (for WordSwap: the token it was
  // swapped with; for WordInsert: the inserted token; empty for deletions).
  std::string before;
  std::string after;
};

struct AttackResult {
  std::vector<std::string> tokens;
  std::vector<AttackEvent> events;
};

/// Shared, read-only state for attacking one corpus side.
struct AttackContext {
  const AttackConfig& config;
  const Alphabet& alphabet;
  const EmbeddingStore* store = nullptr;
};

namespace detail {

struct Slot {
  std::string text;
  // Original token index, or -1 for inserted tokens.
  long long origin;
};

inline NoiseOp draw_op(const OpWeights& weights, Rng& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double u = rng.uniform() * total;
  double acc = 0.0;
  NoiseOp last = NoiseOp::CharInsert;
  for (NoiseOp op : kAllOps) {
    const double w = weights[op_index(op)];
    if (w <= 0.0) continue;
    acc += w;
    last = op;
    if (u < acc) return op;
  }
  return last;
}

class SentenceAttacker {
 public:
  SentenceAttacker(const AttackContext& ctx, Rng& rng) : ctx_(ctx), rng_(rng) {}

  AttackResult run(const std::vector<std::string>& tokens) {
    AttackResult result;
    if (tokens.empty()) return result;
    slots_.clear();
    for (std::size_t i = 0; i < tokens.size(); ++i) slots_.push_back({tokens[i], static_cast<long long>(i)});

    const std::size_t n = tokens.size();
    const std::size_t count = select_attack_count(n, ctx_.config.proportion);
    // Partial Fisher-Yates: the first `count` entries are the targets.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) std::swap(order[i], order[i + rng_.index(n - i)]);

    for (std::size_t e = 0; e < count; ++e) {
      const NoiseOp drawn = draw_op(ctx_.config.weights, rng_);
      AttackEvent ev{drawn, drawn, order[e], {}, {}};
      apply(ev, slot_of(order[e]));
      result.events.push_back(std::move(ev));
    }
    for (auto& s : slots_) result.tokens.push_back(std::move(s.text));
    return result;
  }

 private:
  std::size_t slot_of(std::size_t origin) const {
    for (std::size_t i = 0; i < slots_.size(); ++i)
      if (slots_[i].origin == static_cast<long long>(origin)) return i;
    throw Error(ErrorKind::InvalidArgument, "attack target vanished");
  }

  bool legal(NoiseOp op, std::size_t slot) const {
    const std::string& t = slots_[slot].text;
    switch (op) {
      case NoiseOp::CharInsert: return !ctx_.alphabet.empty();
      case NoiseOp::CharDelete: return char_delete_legal(t);
      case NoiseOp::CharSubstitute: return char_substitute_legal(t, ctx_.alphabet);
      case NoiseOp::CharSwapAdjacent: return char_swap_legal(t);
      case NoiseOp::WordSwap:
      case NoiseOp::WordDelete: return slots_.size() >= 2;
      case NoiseOp::WordInsert:
      case NoiseOp::WordReplace: return in_vocab_slot_exists();
    }
    return false;
  }

  bool in_vocab_slot_exists() const {
    for (const auto& s : slots_)
      if (has_neighbors(ctx_.store, s.text)) return true;
    return false;
  }

  // Draws among ops of the same family (char or word) that are legal for
  // `slot` and carry positive weight.
  std::optional<NoiseOp> redraw_in_family(NoiseOp failed, std::size_t slot) {
    OpWeights w{};
    bool any = false;
    for (NoiseOp op : kAllOps) {
      if (is_char_op(op) != is_char_op(failed)) continue;
      const double weight = ctx_.config.weights[op_index(op)];
      if (weight > 0.0 && legal(op, slot)) {
        w[op_index(op)] = weight;
        any = true;
      }
    }
    if (!any) return std::nullopt;
    return draw_op(w, rng_);
  }

  NoiseOp char_fallback(std::size_t slot) const {
    if (legal(NoiseOp::CharSubstitute, slot)) return NoiseOp::CharSubstitute;
    return NoiseOp::CharInsert;
  }

  NoiseOp resolve(NoiseOp op, std::size_t slot) {
    if (legal(op, slot)) return op;
    if (op == NoiseOp::WordInsert || op == NoiseOp::WordReplace) {
      return slots_.size() >= 2 ? NoiseOp::WordSwap : char_fallback(slot);
    }
    if (auto redrawn = redraw_in_family(op, slot)) return *redrawn;
    return char_fallback(slot);
  }

  void apply(AttackEvent& ev, std::size_t slot) {
    const NoiseOp op = resolve(ev.drawn, slot);
    ev.applied = op;
    const std::size_t k = ctx_.config.top_k;
    switch (op) {
      case NoiseOp::CharInsert:
        ev.before = slots_[slot].text;
        slots_[slot].text = char_insert(slots_[slot].text, ctx_.alphabet, rng_);
        ev.after = slots_[slot].text;
        break;
      case NoiseOp::CharDelete:
        ev.before = slots_[slot].text;
        slots_[slot].text = char_delete(slots_[slot].text, rng_);
        ev.after = slots_[slot].text;
        break;
      case NoiseOp::CharSubstitute:
        ev.before = slots_[slot].text;
        slots_[slot].text = char_substitute(slots_[slot].text, ctx_.alphabet, rng_);
        ev.after = slots_[slot].text;
        break;
      case NoiseOp::CharSwapAdjacent:
        ev.before = slots_[slot].text;
        slots_[slot].text = char_swap_adjacent(slots_[slot].text, rng_);
        ev.after = slots_[slot].text;
        break;
      case NoiseOp::WordSwap: {
        std::vector<std::string> texts = texts_of();
        const std::size_t j = word_swap_at(texts, slot, rng_);
        ev.before = slots_[slot].text;
        ev.after = slots_[j].text;
        std::swap(slots_[slot], slots_[j]);
        break;
      }
      case NoiseOp::WordDelete:
        ev.before = slots_[slot].text;
        slots_.erase(slots_.begin() + static_cast<std::ptrdiff_t>(slot));
        break;
      case NoiseOp::WordInsert: {
        const std::size_t anchor = retarget(slot);
        ev.before = slots_[anchor].text;
        ev.after = ctx_.store->sample_neighbor(ev.before, effective_k(*ctx_.store, k), rng_);
        const std::size_t pos = rng_.coin() ? anchor + 1 : anchor;
        slots_.insert(slots_.begin() + static_cast<std::ptrdiff_t>(pos), Slot{ev.after, -1});
        break;
      }
      case NoiseOp::WordReplace: {
        const std::size_t target = retarget(slot);
        ev.before = slots_[target].text;
        ev.after = ctx_.store->sample_neighbor(ev.before, effective_k(*ctx_.store, k), rng_);
        slots_[target].text = ev.after;
        break;
      }
    }
  }

  // The slot itself when it has embedding neighbours, else a uniformly
  // chosen slot that does.
  std::size_t retarget(std::size_t slot) {
    if (has_neighbors(ctx_.store, slots_[slot].text)) return slot;
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < slots_.size(); ++i)
      if (has_neighbors(ctx_.store, slots_[i].text)) candidates.push_back(i);
    return candidates[rng_.index(candidates.size())];
  }

  std::vector<std::string> texts_of() const {
    std::vector<std::string> t;
    t.reserve(slots_.size());
    for (const auto& s : slots_) t.push_back(s.text);
    return t;
  }

  const AttackContext& ctx_;
  Rng& rng_;
  std::vector<Slot> slots_;
};

}  // namespace detail

/// Attacks one sentence with its own random stream. The result depends only
/// on the tokens, the context, the direction id and the line index.
inline AttackResult attack_sentence(const std::vector<std::string>& tokens, const AttackContext& ctx,
                                    std::string_view direction_id, std::uint64_t line_index) {
  Rng rng(line_stream_seed(ctx.config.seed, direction_id, line_index));
  detail::SentenceAttacker attacker(ctx, rng);
  return attacker.run(tokens);
}

/// Running totals over many attacked sentences.
struct AttackStats {
  std::size_t sentences = 0;
  std::size_t events = 0;
  std::size_t fallbacks = 0;
  std::array<std::size_t, kNumOps> applied{};

  void add(const AttackResult& r) {
    ++sentences;
    events += r.events.size();
    for (const auto& e : r.events) {
      ++applied[op_index(e.applied)];
      if (e.applied != e.drawn) ++fallbacks;
    }
  }

  void merge(const AttackStats& o) {
    sentences += o.sentences;
    events += o.events;
    fallbacks += o.fallbacks;
    for (std::size_t i = 0; i < kNumOps; ++i) applied[i] += o.applied[i];
  }

  /// "CharInsert:3,CharDelete:1,..." over every operation.
  std::string histogram() const {
    std::string out;
    for (NoiseOp op : kAllOps) {
      if (!out.empty()) out += ',';
      out += std::string(to_string(op)) + ":" + std::to_string(applied[op_index(op)]);
    }
    return out;
  }
};

}  // namespace rtransfer
