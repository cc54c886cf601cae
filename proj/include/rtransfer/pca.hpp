#pragma once

// Two-component PCA of dumped sentence representations and the
// noisy-to-seed dispersion statistic.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rtransfer/error.hpp"
#include "rtransfer/io.hpp"

namespace rtransfer {

struct VectorLabel {
  std::string language;
  // "seed" for the clean sentence, otherwise the noise variant
  // (char_ins, char_del, char_sub, char_swap, word_swap, ...).
  std::string variant;

  auto operator<=>(const VectorLabel&) const = default;
};

struct VectorRecord {
  VectorLabel label;
  std::vector<double> vector;
};

inline constexpr std::string_view kSeedVariant = "seed";

/// Reads a vector dump:
///   #dim<TAB>d
///   lang<TAB>variant<TAB>v1<TAB>...<TAB>vd
/// Errors name the 1-based line number.
inline std::vector<VectorRecord> read_vectors(const std::filesystem::path& path) {
  const auto lines = io::split_lines(io::read_file(path));
  auto split_tabs = [](const std::string& s) {
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const auto tab = s.find('\t', start);
      f.push_back(s.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    return f;
  };
  const auto where = [&](std::size_t i) { return path.string() + ":" + std::to_string(i + 1) + ": "; };

  std::size_t i = 0;
  while (i < lines.size() && lines[i].empty()) ++i;
  if (i == lines.size()) throw Error(ErrorKind::EmptyFile, path.string() + " is empty");
  const auto header = split_tabs(lines[i]);
  std::size_t dim = 0;
  if (header.size() != 2 || header[0] != "#dim" ||
      std::from_chars(header[1].data(), header[1].data() + header[1].size(), dim).ec != std::errc() || dim == 0)
    throw Error(ErrorKind::ParseError, where(i) + "expected header '#dim<TAB><d>'");

  std::vector<VectorRecord> records;
  std::set<VectorLabel> seen;
  for (++i; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_tabs(lines[i]);
    if (f.size() != dim + 2)
      throw Error(ErrorKind::DimensionMismatch,
                  where(i) + std::to_string(f.size() < 2 ? 0 : f.size() - 2) + " values, header declares " +
                      std::to_string(dim));
    VectorRecord r{{f[0], f[1]}, std::vector<double>(dim)};
    if (r.label.language.empty() || r.label.variant.empty()) throw Error(ErrorKind::ParseError, where(i) + "empty label");
    for (std::size_t j = 0; j < dim; ++j) {
      const auto& s = f[j + 2];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), r.vector[j]);
      if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(r.vector[j]))
        throw Error(ErrorKind::ParseError, where(i) + "non-numeric field '" + s + "'");
    }
    if (!seen.insert(r.label).second)
      throw Error(ErrorKind::ParseError, where(i) + "duplicate label " + r.label.language + "/" + r.label.variant);
    records.push_back(std::move(r));
  }
  return records;
}

namespace detail {
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}
}  // namespace detail

inline void write_vectors(const std::vector<VectorRecord>& records, const std::filesystem::path& path) {
  if (records.empty()) throw Error(ErrorKind::InvalidArgument, "no records to write");
  std::string out = "#dim\t" + std::to_string(records.front().vector.size()) + "\n";
  for (const auto& r : records) {
    out += r.label.language + "\t" + r.label.variant;
    for (double v : r.vector) out += "\t" + detail::format_double(v);
    out += "\n";
  }
  io::write_file_atomic(path, out);
}

struct ProjectedPoint {
  VectorLabel label;
  double x;
  double y;
};

struct PcaResult {
  Eigen::VectorXd mean;
  // 2 x dim, orthonormal rows.
  Eigen::MatrixXd components;
  // Sample-covariance eigenvalues of the two components, descending.
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  // Trace of the sample covariance (sum of all eigenvalues).
  double total_variance = 0.0;
  std::vector<ProjectedPoint> points;

  Eigen::Vector2d project(const std::vector<double>& v) const {
    const Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
    return components * (x - mean);
  }

  Eigen::VectorXd reconstruct(const Eigen::Vector2d& p) const { return mean + components.transpose() * p; }
};

namespace detail {
inline Eigen::MatrixXd stack(const std::vector<VectorRecord>& records) {
  const auto dim = records.front().vector.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].vector.size() != dim)
      throw Error(ErrorKind::DimensionMismatch, "record " + std::to_string(i) + " has dim " +
                                                    std::to_string(records[i].vector.size()) + ", expected " +
                                                    std::to_string(dim));
    for (std::size_t j = 0; j < dim; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = records[i].vector[j];
  }
  return x;
}
}  // namespace detail

/// Top-2 principal components via SVD of the centered data matrix.
/// Sign convention: the first nonzero coordinate of each component is
/// positive.
inline PcaResult fit_pca(const std::vector<VectorRecord>& records) {
  if (records.size() < 3) throw Error(ErrorKind::InvalidArgument, "PCA needs at least 3 records");
  if (records.front().vector.size() < 2) throw Error(ErrorKind::InvalidArgument, "PCA needs dim >= 2");
  Eigen::MatrixXd x = detail::stack(records);
  const auto n = x.rows();

  PcaResult r;
  r.mean = x.colwise().mean().transpose();
  x.rowwise() -= r.mean.transpose();

  const double scale = x.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw Error(ErrorKind::DegenerateData, "all records are identical");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double denom = static_cast<double>(n - 1);
  // Singular values below this are rounding noise of an exact zero.
  const double tiny = sv(0) * 1e-12 * static_cast<double>(std::max(n, x.cols()));

  r.components.resize(2, x.cols());
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd v = svd.matrixV().col(c);
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (std::abs(v(j)) > 1e-12) {
        if (v(j) < 0) v = -v;
        break;
      }
    }
    r.components.row(c) = v.transpose();
  }
  const double s1 = sv(0);
  const double s2 = sv.size() > 1 && sv(1) > tiny ? sv(1) : 0.0;
  r.lambda1 = s1 * s1 / denom;
  r.lambda2 = s2 * s2 / denom;
  r.total_variance = x.squaredNorm() / denom;

  const Eigen::MatrixXd projected = x * r.components.transpose();
  r.points.reserve(records.size());
  for (Eigen::Index i = 0; i < n; ++i)
    r.points.push_back({records[static_cast<std::size_t>(i)].label, projected(i, 0), projected(i, 1)});
  return r;
}

/// Projection file: "label<TAB>variant<TAB>x<TAB>y", one point per line,
/// after a "#pca" header carrying the eigenvalues.
inline void write_projection(const PcaResult& pca, const std::filesystem::path& path) {
  std::string out = "#pca\tlambda1=" + detail::format_double(pca.lambda1) +
                    "\tlambda2=" + detail::format_double(pca.lambda2) + "\n";
  for (const auto& p : pca.points)
    out += p.label.language + "\t" + p.label.variant + "\t" + detail::format_double(p.x) + "\t" +
           detail::format_double(p.y) + "\n";
  io::write_file_atomic(path, out);
}

inline std::vector<ProjectedPoint> read_projection(const std::filesystem::path& path) {
  std::vector<ProjectedPoint> pts;
  const auto lines = io::split_lines(io::read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i][0] == '#') continue;
    std::istringstream in(lines[i]);
    ProjectedPoint p;
    std::string xs, ys;
    if (!std::getline(in, p.label.language, '\t') || !std::getline(in, p.label.variant, '\t') ||
        !std::getline(in, xs, '\t') || !std::getline(in, ys, '\t'))
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(i + 1) + ": expected 4 fields");
    auto px = std::from_chars(xs.data(), xs.data() + xs.size(), p.x);
    auto py = std::from_chars(ys.data(), ys.data() + ys.size(), p.y);
    if (px.ec != std::errc() || py.ec != std::errc())
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(i + 1) + ": non-numeric coordinate");
    pts.push_back(std::move(p));
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Dispersion

struct LanguageDispersion {
  std::string language;
  std::size_t variants = 0;
  double mean_distance = 0.0;     // full dimension
  double mean_distance_2d = 0.0;  // in the PCA plane
};

struct DispersionStats {
  std::vector<LanguageDispersion> languages;
  // Unweighted means over languages.
  double aggregate = 0.0;
  double aggregate_2d = 0.0;
};

/// Mean Euclidean distance of each language's noisy vectors to that
/// language's seed vector. Seed rows found in `records` are used too; a
/// language with noisy rows and no seed is an error. The 2-D figure uses a
/// PCA fitted over seeds and noisy rows together.
inline DispersionStats dispersion(const std::vector<VectorRecord>& records, const std::vector<VectorRecord>& seeds) {
  std::map<std::string, const VectorRecord*> seed_of;
  for (const auto* list : {&seeds, &records})
    for (const auto& r : *list)
      if (r.label.variant == kSeedVariant) seed_of.emplace(r.label.language, &r);

  std::vector<VectorRecord> all;
  std::map<std::string, std::vector<const VectorRecord*>> noisy;
  for (const auto& r : records) {
    if (r.label.variant == kSeedVariant) continue;
    if (!seed_of.count(r.label.language))
      throw Error(ErrorKind::MissingSeed, "no seed vector for language '" + r.label.language + "'");
    noisy[r.label.language].push_back(&r);
  }
  if (noisy.empty()) throw Error(ErrorKind::InvalidArgument, "no noisy records");

  for (const auto& [lang, rs] : noisy) {
    all.push_back(*seed_of.at(lang));
    for (const auto* r : rs) all.push_back(*r);
  }
  std::optional<PcaResult> plane;
  if (all.size() >= 3) {
    try {
      plane = fit_pca(all);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateData) throw;
    }
  }

  DispersionStats stats;
  for (const auto& [lang, rs] : noisy) {
    const auto& seed = seed_of.at(lang)->vector;
    LanguageDispersion ld{lang, rs.size(), 0.0, 0.0};
    for (const auto* r : rs) {
      if (r->vector.size() != seed.size())
        throw Error(ErrorKind::DimensionMismatch, "seed and noisy vectors differ in dim for '" + lang + "'");
      double d2 = 0.0;
      for (std::size_t j = 0; j < seed.size(); ++j) d2 += (r->vector[j] - seed[j]) * (r->vector[j] - seed[j]);
      ld.mean_distance += std::sqrt(d2);
      if (plane) ld.mean_distance_2d += (plane->project(r->vector) - plane->project(seed)).norm();
    }
    ld.mean_distance /= static_cast<double>(rs.size());
    ld.mean_distance_2d /= static_cast<double>(rs.size());
    stats.aggregate += ld.mean_distance;
    stats.aggregate_2d += ld.mean_distance_2d;
    stats.languages.push_back(ld);
  }
  stats.aggregate /= static_cast<double>(stats.languages.size());
  stats.aggregate_2d /= static_cast<double>(stats.languages.size());
  return stats;
}

/// aggregate(a) / aggregate(b); > 1 means `a` is the more dispersed model.
inline std::optional<double> dispersion_ratio(const DispersionStats& a, const DispersionStats& b) {
  if (!(b.aggregate > 0.0)) return std::nullopt;
  return a.aggregate / b.aggregate;
}

}  // namespace rtransfer
