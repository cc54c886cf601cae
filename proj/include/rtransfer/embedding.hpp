#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rtransfer/error.hpp"
#include "rtransfer/rng.hpp"
#include "rtransfer/unicode.hpp"

namespace rtransfer {

enum class EmbeddingFormat { GloVe, FastText };

inline std::string_view to_string(EmbeddingFormat f) {
  return f == EmbeddingFormat::GloVe ? "glove" : "fasttext";
}

struct LoadOptions {
  std::size_t limit = 200000;
  // Retry lookups with the lowercased token (uncased GloVe vocabularies).
  bool lowercase_fallback = false;
};

struct LoadReport {
  std::size_t duplicates = 0;
  std::size_t zero_vectors = 0;
  std::size_t malformed = 0;
};

struct Neighbor {
  std::string token;
  double cosine;

  bool operator==(const Neighbor&) const = default;
};

/// Word vectors, unit-normalized at load, with exact cosine top-k queries.
/// Immutable once constructed; all queries are const and thread-safe.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  /// Builds a store from raw rows. Rows are normalized; zero rows and
  /// duplicate tokens are dropped and counted in `report()`.
  EmbeddingStore(const std::vector<std::pair<std::string, std::vector<double>>>& rows,
                 bool lowercase_fallback = false)
      : lowercase_fallback_(lowercase_fallback) {
    if (rows.empty()) throw Error(ErrorKind::EmptyFile, "no embedding rows");
    dim_ = rows.front().second.size();
    if (dim_ == 0) throw Error(ErrorKind::DimensionMismatch, "zero-dimensional vectors");
    for (const auto& [token, vec] : rows) {
      if (vec.size() != dim_)
        throw Error(ErrorKind::DimensionMismatch,
                    "token '" + token + "' has " + std::to_string(vec.size()) + " values, expected " +
                        std::to_string(dim_));
      add_row(token, vec);
    }
    if (words_.empty()) throw Error(ErrorKind::EmptyFile, "no usable embedding rows");
  }

  std::size_t size() const noexcept { return words_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const LoadReport& report() const noexcept { return report_; }
  EmbeddingFormat format() const noexcept { return format_; }
  const std::string& source() const noexcept { return source_; }
  bool lowercase_fallback() const noexcept { return lowercase_fallback_; }

  const std::string& word(std::size_t row) const { return words_.at(row); }
  const std::vector<std::string>& words() const noexcept { return words_; }

  std::span<const float> row(std::size_t i) const {
    return {matrix_.data() + i * dim_, dim_};
  }

  /// Row index of `token`, honoring the lowercase fallback flag.
  std::optional<std::size_t> find(std::string_view token) const {
    if (auto it = index_.find(std::string(token)); it != index_.end()) return it->second;
    if (lowercase_fallback_) {
      if (auto it = index_.find(unicode::to_lower(token)); it != index_.end()) return it->second;
    }
    return std::nullopt;
  }

  bool contains(std::string_view token) const { return find(token).has_value(); }

  double dot(std::size_t a, std::size_t b) const {
    const auto ra = row(a);
    const auto rb = row(b);
    double s = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) s += static_cast<double>(ra[j]) * static_cast<double>(rb[j]);
    return s;
  }

  /// The k most similar other tokens, by (cosine desc, row index asc).
  std::vector<Neighbor> topk_similar(std::string_view token, std::size_t k) const {
    const auto query = find(token);
    if (!query) throw Error(ErrorKind::OutOfVocabulary, "'" + std::string(token) + "' not in vocabulary");
    if (k == 0 || k >= words_.size())
      throw Error(ErrorKind::InvalidArgument, "k must satisfy 1 <= k < |vocab| (k=" + std::to_string(k) +
                                                  ", |vocab|=" + std::to_string(words_.size()) + ")");
    return topk_rows(*query, k);
  }

  /// One token drawn uniformly from topk_similar(token, k).
  std::string sample_neighbor(std::string_view token, std::size_t k, Rng& rng) const {
    const auto neighbors = topk_similar(token, k);
    return neighbors[rng.index(neighbors.size())].token;
  }

 private:
  friend EmbeddingStore load_embeddings(const std::filesystem::path&, const LoadOptions&);

  struct Ranked {
    double cosine;
    std::size_t row;
  };
  // "a precedes b" in result order.
  static bool better(const Ranked& a, const Ranked& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.row < b.row;
  }

  std::vector<Neighbor> topk_rows(std::size_t query, std::size_t k) const {
    // Bounded heap whose top is the worst retained candidate.
    auto worse_on_top = [](const Ranked& a, const Ranked& b) { return better(a, b); };
    std::priority_queue<Ranked, std::vector<Ranked>, decltype(worse_on_top)> heap(worse_on_top);
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (i == query) continue;
      const Ranked cand{dot(query, i), i};
      if (heap.size() < k) {
        heap.push(cand);
      } else if (better(cand, heap.top())) {
        heap.pop();
        heap.push(cand);
      }
    }
    std::vector<Neighbor> out(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
      out[i] = {words_[heap.top().row], heap.top().cosine};
      heap.pop();
    }
    return out;
  }

  void add_row(const std::string& token, const std::vector<double>& vec) {
    double norm2 = 0.0;
    for (double v : vec) norm2 += v * v;
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
      ++report_.zero_vectors;
      return;
    }
    if (index_.count(token)) {
      ++report_.duplicates;
      return;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    index_.emplace(token, words_.size());
    words_.push_back(token);
    for (double v : vec) matrix_.push_back(static_cast<float>(v * inv));
  }

  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> matrix_;
  LoadReport report_;
  EmbeddingFormat format_ = EmbeddingFormat::GloVe;
  std::string source_;
  bool lowercase_fallback_ = false;
};

namespace detail {

inline std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace detail

/// Loads GloVe text vectors or a fastText .vec file. The fastText header
/// ("count dim") is recognized when the first line is exactly two integers.
inline EmbeddingStore load_embeddings(const std::filesystem::path& path, const LoadOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());

  EmbeddingStore store;
  store.source_ = path.string();
  store.lowercase_fallback_ = options.lowercase_fallback;

  std::string line;
  std::size_t line_no = 0;
  std::size_t nonblank = 0;
  std::vector<double> vec;
  while (store.words_.size() < options.limit && std::getline(in, line)) {
    ++line_no;
    const auto fields = detail::split_spaces(line);
    if (fields.empty()) continue;
    ++nonblank;
    if (nonblank == 1 && fields.size() == 2) {
      std::size_t count = 0, dim = 0;
      if (detail::parse_number(fields[0], count) && detail::parse_number(fields[1], dim)) {
        if (dim == 0) throw Error(ErrorKind::DimensionMismatch, "header declares dim 0");
        store.format_ = EmbeddingFormat::FastText;
        store.dim_ = dim;
        continue;
      }
    }
    if (fields.size() < 2) {
      ++store.report_.malformed;
      continue;
    }
    vec.clear();
    bool numeric = true;
    for (std::size_t f = 1; f < fields.size(); ++f) {
      double v;
      if (!detail::parse_number(fields[f], v)) {
        numeric = false;
        break;
      }
      vec.push_back(v);
    }
    if (!numeric) {
      ++store.report_.malformed;
      continue;
    }
    if (store.dim_ == 0) store.dim_ = vec.size();
    if (vec.size() != store.dim_)
      throw Error(ErrorKind::DimensionMismatch, path.string() + ":" + std::to_string(line_no) + ": " +
                                                    std::to_string(vec.size()) + " values, expected " +
                                                    std::to_string(store.dim_));
    store.add_row(std::string(fields[0]), vec);
  }
  if (store.words_.empty()) throw Error(ErrorKind::EmptyFile, path.string() + " holds no vectors");
  return store;
}

}  // namespace rtransfer
