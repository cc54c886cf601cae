#pragma once

// Two-phase robustness transfer protocol.
//
// Training phase: one training corpus per setting; attacked settings
// perturb only the source side of the attacked direction. Testing phase:
// one test corpus per setting; attacked settings perturb the source side of
// every direction. Each trained model translates each test corpus through
// the translate hook and every (training, test, direction) cell is scored
// with corpus BLEU against the clean references.
//
// Output directory layout:
//   effective_config.json  state.json  report.md  grid.csv  deltas.tsv
//   data/train/<setting>/  data/test/<setting>/  models/<setting>/
//   hyp/<train>/<test>/<src-tgt>.hyp  logs/

#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtransfer/attack.hpp"
#include "rtransfer/corpus.hpp"
#include "rtransfer/embedding.hpp"
#include "rtransfer/error.hpp"
#include "rtransfer/io.hpp"
#include "rtransfer/metrics.hpp"
#include "rtransfer/process.hpp"
#include "rtransfer/report.hpp"

namespace rtransfer {

inline constexpr int kConfigSchemaVersion = 1;

struct HookTemplates {
  // Placeholders: {train_dir} {model_dir}; optional {setting} {directions}.
  std::string train;
  // Placeholders: {model_dir} {src_file} {out_file} {direction}; optional
  // {src_lang} {tgt_lang} {setting} {test_setting}.
  std::string translate;
};

struct ExperimentConfig {
  std::filesystem::path manifest;
  Direction attacked;
  double proportion = 0.1;
  std::size_t top_k = 10;
  std::string alphabet;
  std::map<std::string, std::filesystem::path> embeddings;
  std::size_t embedding_limit = 200000;
  bool lowercase_fallback = false;
  std::vector<Setting> settings{kAllSettings.begin(), kAllSettings.end()};
  HookTemplates hooks;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool attack_valid = false;

  AttackConfig attack_config(AttackLevel level) const {
    AttackConfig c = AttackConfig::for_level(level);
    c.proportion = proportion;
    c.top_k = top_k;
    c.alphabet = alphabet;
    c.seed = seed;
    return c;
  }

  void validate() const {
    auto require = [](const std::string& tmpl, std::initializer_list<const char*> names, const char* which) {
      for (const char* n : names)
        if (tmpl.find(std::string("{") + n + "}") == std::string::npos)
          throw Error(ErrorKind::InvalidArgument,
                      std::string(which) + " hook template lacks the {" + n + "} placeholder");
    };
    require(hooks.train, {"train_dir", "model_dir"}, "train");
    require(hooks.translate, {"model_dir", "src_file", "out_file", "direction"}, "translate");
    if (std::find(settings.begin(), settings.end(), Setting::Clean) == settings.end())
      throw Error(ErrorKind::InvalidArgument, "settings must include 'clean' (the delta baseline)");
    auto sorted = settings;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw Error(ErrorKind::InvalidArgument, "settings listed twice");
    if (output_dir.empty()) throw Error(ErrorKind::InvalidArgument, "output_dir is required");
    attack_config(AttackLevel::Char).validate();
  }

  bool needs_embeddings() const {
    return std::any_of(settings.begin(), settings.end(),
                       [](Setting s) { return s == Setting::WordAttack || s == Setting::MultiAttack; });
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = kConfigSchemaVersion;
    j["dataset"] = manifest.string();
    j["attacked_direction"] = attacked.id();
    j["attack"] = {{"proportion", proportion}, {"top_k", top_k}, {"alphabet", alphabet}};
    j["embeddings"] = nlohmann::json::object();
    for (const auto& [lang, path] : embeddings) j["embeddings"][lang] = path.string();
    j["embedding_limit"] = embedding_limit;
    j["lowercase_fallback"] = lowercase_fallback;
    j["settings"] = nlohmann::json::array();
    for (Setting s : settings) j["settings"].push_back(std::string(to_string(s)));
    j["hooks"] = {{"train", hooks.train}, {"translate", hooks.translate}};
    j["output_dir"] = output_dir.string();
    j["seed"] = seed;
    j["jobs"] = jobs;
    j["attack_valid"] = attack_valid;
    return j;
  }

  /// Relative paths resolve against `base_dir` (the config file's directory).
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    static const std::set<std::string> known = {"schema_version", "dataset",        "attacked_direction",
                                                "attack",         "embeddings",     "embedding_limit",
                                                "lowercase_fallback", "settings",   "hooks",
                                                "output_dir",     "seed",           "jobs",
                                                "attack_valid"};
    for (const auto& [k, _] : j.items())
      if (!known.count(k)) throw Error(ErrorKind::ParseError, "unknown config key '" + k + "'");
    auto resolve = [&](const std::string& p) {
      std::filesystem::path path(p);
      return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };
    ExperimentConfig c;
    try {
      c.manifest = resolve(j.at("dataset").get<std::string>());
      c.attacked = Direction::parse(j.at("attacked_direction").get<std::string>());
      if (j.contains("attack")) {
        const auto& a = j.at("attack");
        for (const auto& [k, _] : a.items())
          if (k != "proportion" && k != "top_k" && k != "alphabet")
            throw Error(ErrorKind::ParseError, "unknown attack key '" + k + "'");
        c.proportion = a.value("proportion", c.proportion);
        c.top_k = a.value("top_k", c.top_k);
        c.alphabet = a.value("alphabet", c.alphabet);
      }
      if (j.contains("embeddings"))
        for (const auto& [lang, path] : j.at("embeddings").items()) c.embeddings[lang] = resolve(path.get<std::string>());
      c.embedding_limit = j.value("embedding_limit", c.embedding_limit);
      c.lowercase_fallback = j.value("lowercase_fallback", c.lowercase_fallback);
      if (j.contains("settings")) {
        c.settings.clear();
        for (const auto& s : j.at("settings")) c.settings.push_back(parse_setting(s.get<std::string>()));
      }
      c.hooks.train = j.at("hooks").at("train").get<std::string>();
      c.hooks.translate = j.at("hooks").at("translate").get<std::string>();
      c.output_dir = resolve(j.at("output_dir").get<std::string>());
      c.seed = j.value("seed", c.seed);
      c.jobs = j.value("jobs", c.jobs);
      c.attack_valid = j.value("attack_valid", c.attack_valid);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ParseError, std::string("config: ") + e.what());
    }
    c.validate();
    return c;
  }

  static ExperimentConfig load(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(io::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
    }
    return from_json(j, path.parent_path());
  }

  /// Identity of everything that determines the outputs; resume state from
  /// a run with a different fingerprint is discarded.
  std::string fingerprint() const {
    auto j = to_json();
    j.erase("output_dir");
    j.erase("jobs");
    return io::sha256_hex(j.dump());
  }
};

namespace detail {

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string cell_id(const GridKey& k) {
  return std::string(to_string(k.train)) + "/" + std::string(to_string(k.test)) + "/" + k.direction.id();
}

inline nlohmann::json bleu_to_json(const BleuResult& b) {
  return {{"score", b.score},         {"matches", b.matches}, {"totals", b.totals},
          {"bp", b.brevity_penalty}, {"hyp_len", b.hyp_len}, {"ref_len", b.ref_len}};
}

inline BleuResult bleu_from_json(const nlohmann::json& j) {
  BleuResult b;
  b.score = j.at("score").get<double>();
  b.matches = j.at("matches").get<std::array<std::size_t, kBleuOrder>>();
  b.totals = j.at("totals").get<std::array<std::size_t, kBleuOrder>>();
  b.brevity_penalty = j.at("bp").get<double>();
  b.hyp_len = j.at("hyp_len").get<std::size_t>();
  b.ref_len = j.at("ref_len").get<std::size_t>();
  return b;
}

}  // namespace detail

/// Resume bookkeeping persisted as state.json (atomic write-rename on every
/// update).
class RunState {
 public:
  RunState(std::filesystem::path path, std::string fingerprint)
      : path_(std::move(path)), fingerprint_(std::move(fingerprint)) {
    std::error_code ec;
    if (std::filesystem::exists(path_, ec)) {
      try {
        auto j = nlohmann::json::parse(io::read_file(path_));
        if (j.value("fingerprint", std::string()) == fingerprint_) state_ = std::move(j);
      } catch (const nlohmann::json::exception&) {
        // Unreadable state: start over.
      }
    }
    state_["fingerprint"] = fingerprint_;
    for (const char* section : {"built", "trained", "cells"})
      if (!state_.contains(section)) state_[section] = nlohmann::json::object();
    if (!state_.contains("started")) state_["started"] = detail::utc_timestamp();
  }

  std::optional<std::string> built(const std::string& key) const {
    std::lock_guard lock(mu_);
    if (!state_["built"].contains(key)) return std::nullopt;
    return state_["built"][key].get<std::string>();
  }

  void set_built(const std::string& key, const std::string& tree_hash) {
    std::lock_guard lock(mu_);
    state_["built"][key] = tree_hash;
    save_locked();
  }

  bool trained(Setting s) const {
    std::lock_guard lock(mu_);
    return state_["trained"].contains(std::string(to_string(s)));
  }

  /// Marks `s` trained and drops its scored cells, which belong to the
  /// previous model.
  void set_trained(Setting s) {
    std::lock_guard lock(mu_);
    state_["trained"][std::string(to_string(s))] = detail::utc_timestamp();
    auto& cells = state_["cells"];
    const std::string prefix = std::string(to_string(s)) + "/";
    for (auto it = cells.begin(); it != cells.end();) {
      if (it.key().rfind(prefix, 0) == 0) it = cells.erase(it);
      else ++it;
    }
    save_locked();
  }

  void clear_trained(Setting s) {
    std::lock_guard lock(mu_);
    state_["trained"].erase(std::string(to_string(s)));
    save_locked();
  }

  std::optional<ReportCell> cell(const GridKey& k) const {
    std::lock_guard lock(mu_);
    const auto id = detail::cell_id(k);
    if (!state_["cells"].contains(id)) return std::nullopt;
    const auto& j = state_["cells"][id];
    ReportCell c;
    c.detail = detail::bleu_from_json(j.at("bleu"));
    c.bleu = c.detail.score;
    c.hyp_sha256 = j.at("hyp_sha256").get<std::string>();
    c.ref_sha256 = j.at("ref_sha256").get<std::string>();
    return c;
  }

  void set_cell(const GridKey& k, const ReportCell& c) {
    std::lock_guard lock(mu_);
    state_["cells"][detail::cell_id(k)] = {
        {"bleu", detail::bleu_to_json(c.detail)}, {"hyp_sha256", c.hyp_sha256}, {"ref_sha256", c.ref_sha256}};
    save_locked();
  }

  void set_finished() {
    std::lock_guard lock(mu_);
    state_["finished"] = detail::utc_timestamp();
    save_locked();
  }

  std::string started() const {
    std::lock_guard lock(mu_);
    return state_["started"].get<std::string>();
  }

 private:
  void save_locked() { io::write_file_atomic(path_, state_.dump(2) + "\n"); }

  std::filesystem::path path_;
  std::string fingerprint_;
  nlohmann::json state_ = nlohmann::json::object();
  mutable std::mutex mu_;
};

/// What a protocol run did, beyond its report.
struct RunSummary {
  TransferReport report;
  std::size_t trainings_run = 0;
  std::size_t cells_computed = 0;
  std::size_t cells_reused = 0;
  std::map<Setting, AttackStats> train_attack_stats;
  std::map<Setting, AttackStats> test_attack_stats;
};

using LogFn = std::function<void(const std::string&)>;

class Protocol {
 public:
  explicit Protocol(ExperimentConfig config, LogFn log = {})
      : config_(std::move(config)), log_(std::move(log)) {
    config_.validate();
    manifest_ = Manifest::load(config_.manifest);
    if (std::find(manifest_.directions.begin(), manifest_.directions.end(), config_.attacked) ==
        manifest_.directions.end())
      throw Error(ErrorKind::UnknownDirection, config_.attacked.id() + " is not listed in the manifest");
    if (!manifest_.has_split(Split::Train)) throw Error(ErrorKind::MissingSplit, "manifest has no train split");
    if (!manifest_.has_split(Split::Test)) throw Error(ErrorKind::MissingSplit, "manifest has no test split");
  }

  const ExperimentConfig& config() const noexcept { return config_; }
  const Manifest& manifest() const noexcept { return manifest_; }

  std::filesystem::path out(const std::filesystem::path& rel) const { return config_.output_dir / rel; }
  std::filesystem::path train_dir(Setting s) const { return out("data/train") / std::string(to_string(s)); }
  std::filesystem::path test_dir(Setting s) const { return out("data/test") / std::string(to_string(s)); }
  std::filesystem::path model_dir(Setting s) const { return out("models") / std::string(to_string(s)); }
  std::filesystem::path hyp_file(const GridKey& k) const {
    return out("hyp") / std::string(to_string(k.train)) / std::string(to_string(k.test)) / (k.direction.id() + ".hyp");
  }

  /// Hash over the manifest's source files that make up a training set.
  std::string source_train_hash() const {
    std::string acc;
    for (Split split : training_splits())
      for (const auto& d : manifest_.directions)
        for (Side side : {Side::Src, Side::Tgt}) {
          acc += corpus_file_name(split, d, side) + '\0' + io::sha256_file(manifest_.file(split, d, side)) + '\n';
        }
    return io::sha256_hex(acc);
  }

  /// Same digest as `source_train_hash`, computed over a built directory.
  std::string built_train_hash(Setting s) const {
    std::string acc;
    for (Split split : training_splits())
      for (const auto& d : manifest_.directions)
        for (Side side : {Side::Src, Side::Tgt}) {
          acc += corpus_file_name(split, d, side) + '\0' +
                 io::sha256_file(train_dir(s) / corpus_file_name(split, d, side)) + '\n';
        }
    return io::sha256_hex(acc);
  }

  /// Training corpora per setting. Everything except the attacked
  /// direction's source side is a byte copy of the dataset.
  std::map<Setting, std::filesystem::path> build_training_sets(RunState* state = nullptr,
                                                               std::map<Setting, AttackStats>* stats = nullptr) {
    std::map<Setting, std::filesystem::path> dirs;
    for (Setting s : config_.settings) {
      const auto dir = train_dir(s);
      const std::string key = "train/" + std::string(to_string(s));
      dirs[s] = dir;
      if (state && state->built(key) && directory_matches(dir, *state->built(key))) continue;
      log("building training set: " + std::string(to_string(s)));
      std::filesystem::remove_all(dir);
      std::filesystem::create_directories(dir);
      AttackStats st;
      for (Split split : training_splits()) {
        for (const auto& d : manifest_.directions) {
          // Validation sets stay clean unless attack_valid is set.
          const bool attack_here =
              level_of(s) && d == config_.attacked && (split == Split::Train || config_.attack_valid);
          copy_file(manifest_.file(split, d, Side::Tgt), dir / corpus_file_name(split, d, Side::Tgt));
          if (!attack_here) {
            copy_file(manifest_.file(split, d, Side::Src), dir / corpus_file_name(split, d, Side::Src));
            continue;
          }
          const auto corpus = read_corpus(manifest_.file(split, d, Side::Src), manifest_.file(split, d, Side::Tgt), d, split);
          const auto res = resources(*level_of(s));
          const auto attacked = attack_lines(corpus.src_lines, d, res, &st);
          io::write_file_atomic(dir / corpus_file_name(split, d, Side::Src), io::join_lines(attacked));
        }
      }
      if (stats) (*stats)[s] = st;
      if (state) state->set_built(key, io::sha256_tree(dir));
    }
    return dirs;
  }

  /// Test corpora per setting; attacked settings perturb every direction's
  /// source side, references are byte copies.
  std::map<Setting, std::filesystem::path> build_test_sets(RunState* state = nullptr,
                                                           std::map<Setting, AttackStats>* stats = nullptr) {
    std::map<Setting, std::filesystem::path> dirs;
    for (Setting s : config_.settings) {
      const auto dir = test_dir(s);
      const std::string key = "test/" + std::string(to_string(s));
      dirs[s] = dir;
      if (state && state->built(key) && directory_matches(dir, *state->built(key))) continue;
      log("building test set: " + std::string(to_string(s)));
      std::filesystem::remove_all(dir);
      std::filesystem::create_directories(dir);
      AttackStats st;
      for (const auto& d : manifest_.directions) {
        copy_file(manifest_.file(Split::Test, d, Side::Tgt), dir / corpus_file_name(Split::Test, d, Side::Tgt));
        if (!level_of(s)) {
          copy_file(manifest_.file(Split::Test, d, Side::Src), dir / corpus_file_name(Split::Test, d, Side::Src));
          continue;
        }
        const auto corpus = read_corpus(manifest_.file(Split::Test, d, Side::Src),
                                        manifest_.file(Split::Test, d, Side::Tgt), d, Split::Test);
        const auto res = resources(*level_of(s));
        const auto attacked = attack_lines(corpus.src_lines, d, res, &st);
        io::write_file_atomic(dir / corpus_file_name(Split::Test, d, Side::Src), io::join_lines(attacked));
      }
      if (stats) (*stats)[s] = st;
      if (state) state->set_built(key, io::sha256_tree(dir));
    }
    return dirs;
  }

  /// Runs (or resumes) the whole protocol and writes the reports.
  RunSummary run() {
    std::filesystem::create_directories(config_.output_dir);
    io::write_file_atomic(out("effective_config.json"), config_.to_json().dump(2) + "\n");
    RunState state(out("state.json"), config_.fingerprint());
    RunSummary summary;

    build_training_sets(&state, &summary.train_attack_stats);
    build_test_sets(&state, &summary.test_attack_stats);

    std::string directions_csv;
    for (const auto& d : manifest_.directions) directions_csv += (directions_csv.empty() ? "" : ",") + d.id();

    for (Setting s : config_.settings) {
      if (state.trained(s) && std::filesystem::exists(model_dir(s))) continue;
      log("training: " + std::string(to_string(s)));
      std::filesystem::create_directories(model_dir(s));
      const std::string cmd = process::expand_template(
          config_.hooks.train, {{"train_dir", train_dir(s).string()},
                                {"model_dir", model_dir(s).string()},
                                {"setting", std::string(to_string(s))},
                                {"directions", directions_csv}});
      run_hook(cmd, out("logs") / ("train." + std::string(to_string(s)) + ".log"));
      state.set_trained(s);
      ++summary.trainings_run;
    }

    std::vector<GridKey> keys;
    for (Setting tr : config_.settings)
      for (Setting te : config_.settings)
        for (const auto& d : manifest_.directions) keys.push_back({tr, te, d});

    std::mutex mu;
    std::map<GridKey, ReportCell> grid;
    parallel_for(keys.size(), std::max<std::size_t>(config_.jobs, 1), [&](std::size_t i) {
      const GridKey& k = keys[i];
      const auto hyp = hyp_file(k);
      const auto ref = test_dir(k.test) / corpus_file_name(Split::Test, k.direction, Side::Tgt);
      if (auto cached = state.cell(k)) {
        std::error_code ec;
        if (std::filesystem::exists(hyp, ec) && io::sha256_file(hyp) == cached->hyp_sha256 &&
            io::sha256_file(ref) == cached->ref_sha256) {
          std::lock_guard lock(mu);
          grid[k] = *cached;
          ++summary.cells_reused;
          return;
        }
      }
      const auto src = test_dir(k.test) / corpus_file_name(Split::Test, k.direction, Side::Src);
      std::filesystem::create_directories(hyp.parent_path());
      std::filesystem::remove(hyp);
      const std::string cmd = process::expand_template(
          config_.hooks.translate, {{"model_dir", model_dir(k.train).string()},
                                    {"src_file", src.string()},
                                    {"out_file", hyp.string()},
                                    {"direction", k.direction.id()},
                                    {"src_lang", k.direction.src},
                                    {"tgt_lang", k.direction.tgt},
                                    {"setting", std::string(to_string(k.train))},
                                    {"test_setting", std::string(to_string(k.test))}});
      run_hook(cmd, out("logs") / ("translate." + std::string(to_string(k.train)) + "." +
                                   std::string(to_string(k.test)) + "." + k.direction.id() + ".log"));
      if (!std::filesystem::exists(hyp))
        throw Error(ErrorKind::MissingOutput, "translate hook produced no " + hyp.string());
      const std::string hyp_data = io::read_file(hyp);
      const std::string ref_data = io::read_file(ref);
      ReportCell cell;
      cell.detail = corpus_bleu(io::split_lines(hyp_data), io::split_lines(ref_data));
      cell.bleu = cell.detail.score;
      cell.hyp_sha256 = io::sha256_hex(hyp_data);
      cell.ref_sha256 = io::sha256_hex(ref_data);
      state.set_cell(k, cell);
      std::lock_guard lock(mu);
      grid[k] = cell;
      ++summary.cells_computed;
    });

    TransferReport& report = summary.report;
    report.settings = config_.settings;
    report.directions = manifest_.directions;
    report.attacked = config_.attacked;
    report.grid = std::move(grid);
    report.compute_deltas();
    state.set_finished();
    report.metadata = {{"dataset", manifest_.name},
                       {"attacked direction", config_.attacked.id()},
                       {"seed", std::to_string(config_.seed)},
                       {"proportion", format_fixed(config_.proportion, 3)},
                       {"started", state.started()},
                       {"finished", detail::utc_timestamp()}};
    io::write_file_atomic(out("report.md"), render_report(report, ReportFormat::Markdown));
    io::write_file_atomic(out("grid.csv"), render_report(report, ReportFormat::Csv));
    io::write_file_atomic(out("deltas.tsv"), render_report(report, ReportFormat::DeltasTsv));
    return summary;
  }

 private:
  std::vector<Split> training_splits() const {
    std::vector<Split> splits{Split::Train};
    if (manifest_.has_split(Split::Valid)) splits.push_back(Split::Valid);
    return splits;
  }

  AttackResources resources(AttackLevel level) {
    AttackResources res;
    res.config = config_.attack_config(level);
    res.jobs = std::max<std::size_t>(config_.jobs, 1);
    if (level != AttackLevel::Char) {
      for (const auto& d : manifest_.directions) res.embeddings[d.src] = &embeddings_for(d.src);
    }
    return res;
  }

  const EmbeddingStore& embeddings_for(const std::string& lang) {
    if (auto it = stores_.find(lang); it != stores_.end()) return *it->second;
    auto path = config_.embeddings.find(lang);
    if (path == config_.embeddings.end())
      throw Error(ErrorKind::InvalidArgument, "word-level settings need an embeddings entry for '" + lang + "'");
    log("loading embeddings for " + lang + ": " + path->second.string());
    auto store = std::make_unique<EmbeddingStore>(
        load_embeddings(path->second, LoadOptions{config_.embedding_limit, config_.lowercase_fallback}));
    return *stores_.emplace(lang, std::move(store)).first->second;
  }

  static void copy_file(const std::filesystem::path& from, const std::filesystem::path& to) {
    std::filesystem::create_directories(to.parent_path());
    std::filesystem::copy_file(from, to, std::filesystem::copy_options::overwrite_existing);
  }

  static bool directory_matches(const std::filesystem::path& dir, const std::string& hash) {
    std::error_code ec;
    return std::filesystem::is_directory(dir, ec) && io::sha256_tree(dir) == hash;
  }

  void run_hook(const std::string& cmd, const std::filesystem::path& log_path) {
    log("$ " + cmd);
    const auto r = process::run_shell(cmd, log_path);
    if (r.exit_code != 0)
      throw Error(ErrorKind::HookFailure, "exit " + std::to_string(r.exit_code) + ": " + cmd + "\n" + r.output_tail);
  }

  void log(const std::string& msg) const {
    if (log_) log_(msg);
  }

  ExperimentConfig config_;
  LogFn log_;
  Manifest manifest_;
  std::map<std::string, std::unique_ptr<EmbeddingStore>> stores_;
};

inline RunSummary run_protocol(const ExperimentConfig& config, LogFn log = {}) {
  return Protocol(config, std::move(log)).run();
}

}  // namespace rtransfer
