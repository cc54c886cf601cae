#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtransfer/attack.hpp"
#include "rtransfer/embedding.hpp"
#include "rtransfer/error.hpp"
#include "rtransfer/io.hpp"
#include "rtransfer/unicode.hpp"

namespace rtransfer {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Directions and splits

namespace detail {
inline bool valid_lang_code(std::string_view code) {
  if (code.size() < 2 || code.size() > 3) return false;
  return std::all_of(code.begin(), code.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}
}  // namespace detail

struct Direction {
  std::string src;
  std::string tgt;

  Direction() = default;
  Direction(std::string src_lang, std::string tgt_lang) : src(std::move(src_lang)), tgt(std::move(tgt_lang)) {
    if (!detail::valid_lang_code(src) || !detail::valid_lang_code(tgt))
      throw Error(ErrorKind::InvalidArgument, "language codes must be 2-3 lowercase ASCII letters: " + id());
    if (src == tgt) throw Error(ErrorKind::InvalidArgument, "direction needs distinct languages: " + id());
  }

  /// Parses "src-tgt".
  static Direction parse(std::string_view s) {
    const auto dash = s.find('-');
    if (dash == std::string_view::npos || s.find('-', dash + 1) != std::string_view::npos)
      throw Error(ErrorKind::InvalidArgument, "direction must look like 'fr-en': '" + std::string(s) + "'");
    return Direction(std::string(s.substr(0, dash)), std::string(s.substr(dash + 1)));
  }

  std::string id() const { return src + "-" + tgt; }

  auto operator<=>(const Direction&) const = default;
};

enum class Split { Train, Valid, Test };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "?";
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "valid") return Split::Valid;
  if (s == "test") return Split::Test;
  throw Error(ErrorKind::InvalidArgument, "unknown split '" + std::string(s) + "'");
}

enum class Side { Src, Tgt };

/// `<split>.<src>-<tgt>.<side>`, e.g. train.fr-en.src
inline std::string corpus_file_name(Split split, const Direction& d, Side side) {
  return std::string(to_string(split)) + "." + d.id() + (side == Side::Src ? ".src" : ".tgt");
}

// ---------------------------------------------------------------------------
// Corpora

struct ParallelCorpus {
  Direction direction;
  Split split = Split::Train;
  std::vector<std::string> src_lines;
  std::vector<std::string> tgt_lines;

  std::size_t size() const noexcept { return src_lines.size(); }

  bool operator==(const ParallelCorpus&) const = default;
};

/// Reads one side: UTF-8 validated (line numbers are 1-based), CRLF
/// normalized to LF, NFC applied.
inline std::vector<std::string> read_lines(const fs::path& path) {
  const std::string data = io::read_file(path);
  auto lines = io::split_lines(data);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (auto bad = unicode::first_invalid_utf8(lines[i]))
      throw Error(ErrorKind::InvalidUtf8,
                  path.string() + ":" + std::to_string(i + 1) + ": invalid UTF-8 at byte " + std::to_string(*bad));
    lines[i] = unicode::nfc(lines[i]);
  }
  return lines;
}

inline ParallelCorpus read_corpus(const fs::path& src_path, const fs::path& tgt_path, const Direction& direction,
                                  Split split) {
  ParallelCorpus c{direction, split, read_lines(src_path), read_lines(tgt_path)};
  if (c.src_lines.size() != c.tgt_lines.size())
    throw Error(ErrorKind::LineCountMismatch, src_path.string() + " has " + std::to_string(c.src_lines.size()) +
                                                  " lines, " + tgt_path.string() + " has " +
                                                  std::to_string(c.tgt_lines.size()));
  if (c.src_lines.empty()) throw Error(ErrorKind::EmptyCorpus, src_path.string() + " is empty");
  return c;
}

/// Writes the corpus under its conventional file names; returns (src, tgt).
inline std::pair<fs::path, fs::path> write_corpus(const ParallelCorpus& corpus, const fs::path& out_dir) {
  const fs::path src = out_dir / corpus_file_name(corpus.split, corpus.direction, Side::Src);
  const fs::path tgt = out_dir / corpus_file_name(corpus.split, corpus.direction, Side::Tgt);
  io::write_file_atomic(src, io::join_lines(corpus.src_lines));
  io::write_file_atomic(tgt, io::join_lines(corpus.tgt_lines));
  return {src, tgt};
}

// ---------------------------------------------------------------------------
// Manifest and dataset

/// Directory-level description of a dataset:
///   {"name": "...", "directions": ["en-fr", ...], "splits": ["train", "test"]}
/// Files live next to the manifest under the conventional names.
struct Manifest {
  std::string name;
  std::vector<Direction> directions;
  std::vector<Split> splits;
  fs::path root;

  bool has_split(Split s) const { return std::find(splits.begin(), splits.end(), s) != splits.end(); }

  fs::path file(Split split, const Direction& d, Side side) const { return root / corpus_file_name(split, d, side); }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["directions"] = nlohmann::json::array();
    for (const auto& d : directions) j["directions"].push_back(d.id());
    j["splits"] = nlohmann::json::array();
    for (auto s : splits) j["splits"].push_back(std::string(to_string(s)));
    return j;
  }

  static Manifest from_json(const nlohmann::json& j, fs::path root) {
    Manifest m;
    m.root = std::move(root);
    try {
      m.name = j.value("name", std::string("dataset"));
      for (const auto& d : j.at("directions")) m.directions.push_back(Direction::parse(d.get<std::string>()));
      for (const auto& s : j.at("splits")) m.splits.push_back(parse_split(s.get<std::string>()));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ParseError, std::string("manifest: ") + e.what());
    }
    auto sorted = m.directions;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw Error(ErrorKind::InvalidArgument, "manifest lists a direction twice");
    if (m.directions.empty()) throw Error(ErrorKind::InvalidArgument, "manifest lists no directions");
    return m;
  }

  static Manifest load(const fs::path& path) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(io::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
    }
    return from_json(j, path.parent_path());
  }

  void save(const fs::path& path) const { io::write_file_atomic(path, to_json().dump(2) + "\n"); }
};

struct MultilingualDataset {
  std::string name;
  std::map<Split, std::map<Direction, ParallelCorpus>> corpora;

  const ParallelCorpus& at(Split split, const Direction& d) const {
    auto s = corpora.find(split);
    if (s == corpora.end()) throw Error(ErrorKind::MissingSplit, std::string(to_string(split)) + " split missing");
    auto c = s->second.find(d);
    if (c == s->second.end()) throw Error(ErrorKind::UnknownDirection, d.id() + " not in dataset");
    return c->second;
  }

  std::vector<Direction> directions() const {
    std::vector<Direction> out;
    for (const auto& [split, by_dir] : corpora)
      for (const auto& [d, _] : by_dir)
        if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(d);
    return out;
  }

  bool operator==(const MultilingualDataset&) const = default;

  void add(ParallelCorpus corpus) {
    auto& slot = corpora[corpus.split];
    const Direction d = corpus.direction;
    if (slot.count(d)) throw Error(ErrorKind::InvalidArgument, "duplicate corpus " + d.id());
    slot.emplace(d, std::move(corpus));
  }

  static MultilingualDataset load(const Manifest& m) {
    MultilingualDataset ds;
    ds.name = m.name;
    for (Split s : m.splits)
      for (const auto& d : m.directions)
        ds.add(read_corpus(m.file(s, d, Side::Src), m.file(s, d, Side::Tgt), d, s));
    return ds;
  }

  void write(const fs::path& out_dir) const {
    for (const auto& [split, by_dir] : corpora)
      for (const auto& [d, c] : by_dir) write_corpus(c, out_dir);
  }
};

// ---------------------------------------------------------------------------
// Applying attacks

/// Runs fn(i) for i in [0, n) on up to `jobs` threads (0 = all cores).
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, std::max<std::size_t>(n, 1));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < jobs; ++t) {
    threads.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += jobs) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Attack inputs shared by every corpus: configuration plus one embedding
/// store per source language (only needed when word operations are on).
struct AttackResources {
  AttackConfig config;
  std::map<std::string, const EmbeddingStore*> embeddings;
  std::size_t jobs = 1;

  const EmbeddingStore* store_for(const std::string& lang) const {
    auto it = embeddings.find(lang);
    return it == embeddings.end() ? nullptr : it->second;
  }
};

/// Pool for character insertion/substitution on `lines`.
inline Alphabet alphabet_for(const AttackConfig& config, std::span<const std::string> lines) {
  return config.alphabet.empty() ? Alphabet::from_corpus(lines) : Alphabet::from_string(config.alphabet);
}

/// Attacks every line of a source side. Empty lines pass through untouched.
inline std::vector<std::string> attack_lines(const std::vector<std::string>& lines, const Direction& direction,
                                             const AttackResources& res, AttackStats* stats = nullptr,
                                             std::vector<std::vector<AttackEvent>>* events = nullptr) {
  res.config.validate();
  const EmbeddingStore* store = res.store_for(direction.src);
  if (res.config.uses_word_ops() && !store)
    throw Error(ErrorKind::InvalidArgument, "word operations need embeddings for '" + direction.src + "'");
  const Alphabet alphabet = alphabet_for(res.config, lines);
  if (alphabet.empty()) throw Error(ErrorKind::InvalidArgument, "empty character pool");
  const AttackContext ctx{res.config, alphabet, store};
  const std::string id = direction.id();

  std::vector<std::string> out(lines.size());
  std::vector<AttackResult> results(lines.size());
  parallel_for(lines.size(), res.jobs, [&](std::size_t i) {
    results[i] = attack_sentence(tokenize(lines[i]), ctx, id, i);
    out[i] = results[i].tokens.empty() ? lines[i] : detokenize(results[i].tokens);
  });
  if (stats)
    for (const auto& r : results)
      if (!r.events.empty()) stats->add(r);
  if (events) {
    events->clear();
    for (auto& r : results) events->push_back(std::move(r.events));
  }
  return out;
}

/// Training phase: only the attacked direction's source side changes.
inline MultilingualDataset attack_training_direction(const MultilingualDataset& dataset, const Direction& attacked,
                                                     const AttackResources& res, AttackStats* stats = nullptr,
                                                     bool include_valid = false) {
  MultilingualDataset out = dataset;
  bool found = false;
  for (Split split : {Split::Train, Split::Valid}) {
    if (split == Split::Valid && !include_valid) continue;
    auto s = out.corpora.find(split);
    if (s == out.corpora.end()) continue;
    auto c = s->second.find(attacked);
    if (c == s->second.end()) continue;
    if (split == Split::Train) found = true;
    c->second.src_lines = attack_lines(c->second.src_lines, attacked, res, stats);
  }
  if (!found) throw Error(ErrorKind::UnknownDirection, attacked.id() + " has no training corpus");
  return out;
}

/// Testing phase: every direction's test source side is attacked.
inline MultilingualDataset attack_test_all(const MultilingualDataset& dataset, const AttackResources& res,
                                           AttackStats* stats = nullptr) {
  auto s = dataset.corpora.find(Split::Test);
  if (s == dataset.corpora.end() || s->second.empty())
    throw Error(ErrorKind::MissingSplit, "dataset has no test split");
  for (const auto& d : dataset.directions())
    if (!s->second.count(d)) throw Error(ErrorKind::MissingSplit, "no test corpus for " + d.id());
  MultilingualDataset out;
  out.name = dataset.name;
  for (const auto& [d, c] : s->second) {
    ParallelCorpus attacked = c;
    attacked.src_lines = attack_lines(c.src_lines, d, res, stats);
    out.add(std::move(attacked));
  }
  return out;
}

}  // namespace rtransfer
