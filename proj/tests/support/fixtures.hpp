#pragma once

// Temporary directories and synthetic corpora / embeddings for tests.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "rtransfer/corpus.hpp"
#include "rtransfer/io.hpp"
#include "rtransfer/process.hpp"
#include "rtransfer/protocol.hpp"
#include "rtransfer/rng.hpp"

namespace rtransfer::testing {

namespace fs = std::filesystem;

/// Directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "rt") {
    static std::uint64_t counter = 0;
    Rng rng(static_cast<std::uint64_t>(std::random_device{}()) ^ ++counter);
    path_ = fs::temp_directory_path() / (tag + "-" + std::to_string(rng.next() % 1000000000ULL));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

/// Small closed vocabulary shared by the synthetic source and target sides.
inline std::vector<std::string> synthetic_vocab() {
  return {"the",   "a",     "cat",  "dog",   "sat",  "ran",    "on",    "under", "mat",   "house",
          "red",   "blue",  "big",  "small", "quick", "slow",  "bird",  "tree",  "river", "stone",
          "sees",  "finds", "near", "over",  "green", "old",   "new",   "city",  "road",  "light",
          "cafe",  "naïve", "über", "garçon", ".",    ",",     "?",     "!",     "is",    "was"};
}

/// `n` sentences of 3..25 tokens drawn from the synthetic vocabulary.
inline std::vector<std::string> synthetic_lines(std::size_t n, std::uint64_t seed, std::size_t min_len = 3,
                                                std::size_t max_len = 25,
                                                const std::vector<std::string>& vocab = synthetic_vocab()) {
  Rng rng(seed);
  std::vector<std::string> lines;
  lines.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = min_len + rng.index(max_len - min_len + 1);
    std::string line;
    for (std::size_t t = 0; t < len; ++t) {
      if (t) line += ' ';
      line += vocab[rng.index(vocab.size())];
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

/// A "translation" of each line that keeps most tokens, so copying the
/// source scores well above zero BLEU.
inline std::vector<std::string> synthetic_targets(const std::vector<std::string>& src, std::uint64_t seed) {
  const auto vocab = synthetic_vocab();
  Rng rng(seed);
  std::vector<std::string> out;
  for (const auto& line : src) {
    auto toks = tokenize(line);
    for (auto& t : toks)
      if (rng.index(5) == 0) t = vocab[rng.index(vocab.size())];
    out.push_back(detokenize(toks));
  }
  return out;
}

inline std::vector<Direction> synthetic_directions() {
  return {Direction("en", "fr"), Direction("en", "ja"), Direction("en", "ar"), Direction("en", "de")};
}

/// Writes train/valid/test corpora and a manifest under `root`; returns the
/// manifest path.
inline fs::path write_synthetic_dataset(const fs::path& root, std::size_t lines_per_direction,
                                        const std::vector<Direction>& directions = synthetic_directions(),
                                        std::uint64_t seed = 7) {
  fs::create_directories(root);
  MultilingualDataset ds;
  ds.name = "synthetic";
  std::uint64_t s = seed;
  for (Split split : {Split::Train, Split::Valid, Split::Test}) {
    const std::size_t n = split == Split::Train ? lines_per_direction : std::max<std::size_t>(lines_per_direction / 4, 8);
    for (const auto& d : directions) {
      ParallelCorpus c{d, split, synthetic_lines(n, ++s), {}};
      c.tgt_lines = synthetic_targets(c.src_lines, ++s);
      ds.add(std::move(c));
    }
  }
  ds.write(root);
  Manifest m{"synthetic", directions, {Split::Train, Split::Valid, Split::Test}, root};
  const fs::path path = root / "manifest.json";
  m.save(path);
  return path;
}

/// GloVe-style text file with a random vector for every synthetic token.
inline fs::path write_synthetic_embeddings(const fs::path& path, std::size_t dim = 8, std::uint64_t seed = 11) {
  Rng rng(seed);
  std::string out;
  for (const auto& w : synthetic_vocab()) {
    out += w;
    for (std::size_t j = 0; j < dim; ++j) out += " " + std::to_string(rng.uniform() * 2.0 - 1.0);
    out += "\n";
  }
  io::write_file_atomic(path, out);
  return path;
}

/// Rows of a random store; every tenth row duplicates an earlier vector
/// (scaled) so exact cosine ties occur.
inline std::vector<std::pair<std::string, std::vector<double>>> random_store_rows(std::size_t n, std::size_t dim,
                                                                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  // No reallocation: duplicates are copied from references into `rows`.
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= 10 && i % 10 == 0) {
      rows.emplace_back("w" + std::to_string(i), rows[rng.index(i)].second);
      continue;
    }
    // Small integers keep dot products exact in float, making ties exact.
    std::vector<double> v(dim);
    for (auto& x : v) x = static_cast<double>(static_cast<int>(rng.index(11)) - 5);
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[0] = 1.0;
    rows.emplace_back("w" + std::to_string(i), std::move(v));
  }
  return rows;
}

/// Protocol configuration over a synthetic dataset driven by the identity
/// stub hooks in `hooks_dir`.
inline ExperimentConfig stub_config(const fs::path& root, const fs::path& hooks_dir, std::size_t lines = 200) {
  ExperimentConfig c;
  c.manifest = write_synthetic_dataset(root / "data", lines);
  c.embeddings["en"] = write_synthetic_embeddings(root / "en.vec");
  c.attacked = Direction("en", "fr");
  c.hooks.train = "sh " + process::shell_quote((hooks_dir / "identity_train.sh").string()) +
                  " {train_dir} {model_dir} {setting}";
  c.hooks.translate = "sh " + process::shell_quote((hooks_dir / "identity_translate.sh").string()) +
                      " {model_dir} {src_file} {out_file} {direction}";
  c.output_dir = root / "run";
  c.seed = 1;
  c.jobs = 2;
  return c;
}

}  // namespace rtransfer::testing
