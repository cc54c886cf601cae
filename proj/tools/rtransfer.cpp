// rtransfer: command-line entry point.
//
// Exit codes: 0 success, 1 domain error, 2 usage error.
// stdout carries machine-parseable results; diagnostics go to stderr.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rtransfer/rtransfer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rtransfer;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int verbosity = 1;

void log_info(const std::string& msg) {
  if (verbosity > 0) std::cerr << msg << "\n";
}

void log_config(const std::string& command, const json& config) {
  log_info("[" + command + "] effective config: " + config.dump());
}

OpWeights parse_weights(const std::string& text, AttackLevel level) {
  if (text.empty()) return default_weights(level);
  OpWeights w{};
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--weights entries look like CharInsert=0.25");
    const auto op = parse_noise_op(item.substr(0, eq));
    if (!op) throw UsageError("unknown operation '" + item.substr(0, eq) + "'");
    try {
      w[op_index(*op)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("bad weight in '" + item + "'");
    }
  }
  return w;
}

// ---------------------------------------------------------------------------

struct AttackArgs {
  std::string in, out, level = "char", embeddings, alphabet, direction, weights, events;
  double proportion = 0.1;
  std::uint64_t seed = 0;
  std::size_t k = 10, limit = 200000, jobs = 0;
  bool lowercase = false;
};

int run_attack(const AttackArgs& a) {
  const auto level = parse_attack_level(a.level);
  if (!level) throw UsageError("--level must be char, word or multi");
  AttackConfig config = AttackConfig::for_level(*level);
  config.proportion = a.proportion;
  config.top_k = a.k;
  config.alphabet = a.alphabet;
  config.seed = a.seed;
  config.weights = parse_weights(a.weights, *level);
  try {
    config.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (config.uses_word_ops() && a.embeddings.empty())
    throw UsageError("--level " + a.level + " needs --embeddings");
  std::optional<Direction> direction;
  if (!a.direction.empty()) {
    try {
      direction = Direction::parse(a.direction);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }

  json effective = {{"in", a.in},         {"out", a.out},     {"level", a.level},
                    {"proportion", a.proportion}, {"seed", a.seed}, {"top_k", a.k},
                    {"alphabet", a.alphabet.empty() ? "corpus-local" : a.alphabet},
                    {"direction", a.direction},   {"embeddings", a.embeddings},
                    {"embedding_limit", a.limit}, {"lowercase_fallback", a.lowercase},
                    {"jobs", a.jobs}};
  json weights = json::object();
  for (NoiseOp op : kAllOps) weights[std::string(to_string(op))] = config.weights[op_index(op)];
  effective["weights"] = weights;
  log_config("attack", effective);

  const auto lines = read_lines(a.in);
  std::optional<EmbeddingStore> store;
  if (config.uses_word_ops()) {
    store = load_embeddings(a.embeddings, LoadOptions{a.limit, a.lowercase});
    log_info("loaded " + std::to_string(store->size()) + " vectors (dim " + std::to_string(store->dim()) + ", " +
             std::to_string(store->report().duplicates) + " duplicates, " +
             std::to_string(store->report().zero_vectors) + " zero vectors, " +
             std::to_string(store->report().malformed) + " malformed lines skipped)");
  }

  const Alphabet alphabet = alphabet_for(config, lines);
  if (alphabet.empty()) throw Error(ErrorKind::InvalidArgument, "empty character pool");
  const AttackContext ctx{config, alphabet, store ? &*store : nullptr};
  // Without --direction every line's stream is keyed by the empty id.
  const std::string id = direction ? direction->id() : std::string();

  std::vector<AttackResult> results(lines.size());
  std::vector<std::string> out(lines.size());
  parallel_for(lines.size(), a.jobs, [&](std::size_t i) {
    results[i] = attack_sentence(tokenize(lines[i]), ctx, id, i);
    out[i] = results[i].tokens.empty() ? lines[i] : detokenize(results[i].tokens);
  });
  AttackStats stats;
  for (const auto& r : results)
    if (!r.events.empty()) stats.add(r);
  stats.sentences = lines.size();

  io::write_file_atomic(a.out, io::join_lines(out));
  io::write_file_atomic(a.out + ".config.json", effective.dump(2) + "\n");
  if (!a.events.empty()) {
    std::string tsv = "line\tposition\tdrawn\tapplied\tbefore\tafter\n";
    for (std::size_t i = 0; i < results.size(); ++i)
      for (const auto& e : results[i].events)
        tsv += std::to_string(i) + "\t" + std::to_string(e.position) + "\t" + std::string(to_string(e.drawn)) + "\t" +
               std::string(to_string(e.applied)) + "\t" + e.before + "\t" + e.after + "\n";
    io::write_file_atomic(a.events, tsv);
  }
  std::cout << "sentences=" << stats.sentences << " events=" << stats.events << " fallbacks=" << stats.fallbacks
            << " ops=" << stats.histogram() << "\n";
  return 0;
}

int run_neighbors(const std::string& path, const std::string& token, std::size_t k, std::size_t limit,
                  bool lowercase) {
  log_config("neighbors", {{"path", path}, {"token", token}, {"k", k}, {"limit", limit}, {"lowercase_fallback", lowercase}});
  const auto store = load_embeddings(path, LoadOptions{limit, lowercase});
  const auto result = store.topk_similar(token, std::min(k, store.size() - 1));
  std::cout << "rank\ttoken\tcosine\n";
  for (std::size_t i = 0; i < result.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", result[i].cosine);
    std::cout << i + 1 << "\t" << result[i].token << "\t" << buf << "\n";
  }
  return 0;
}

int run_bleu(const std::string& hyp, const std::string& ref, bool smooth) {
  log_config("bleu", {{"hyp", hyp}, {"ref", ref}, {"smooth", smooth ? "add-one" : "none"}, {"max_order", kBleuOrder}});
  const auto h = io::split_lines(io::read_file(hyp));
  const auto r = io::split_lines(io::read_file(ref));
  std::cout << format_bleu_line(corpus_bleu(h, r, smooth)) << "\n";
  return 0;
}

int run_pca(const std::string& vectors, const std::string& out) {
  log_config("pca", {{"vectors", vectors}, {"out", out}});
  const auto records = read_vectors(vectors);
  const auto pca = fit_pca(records);
  write_projection(pca, out);
  char buf[160];
  std::snprintf(buf, sizeof buf, "records=%zu dim=%zu lambda1=%.6g lambda2=%.6g explained=%.4f", records.size(),
                records.front().vector.size(), pca.lambda1, pca.lambda2,
                pca.total_variance > 0 ? (pca.lambda1 + pca.lambda2) / pca.total_variance : 0.0);
  std::cout << buf << "\n";
  return 0;
}

void print_dispersion(const std::string& prefix, const DispersionStats& s) {
  char buf[256];
  for (const auto& l : s.languages) {
    std::snprintf(buf, sizeof buf, "%slang=%s n=%zu dist=%.6f dist2d=%.6f", prefix.c_str(), l.language.c_str(),
                  l.variants, l.mean_distance, l.mean_distance_2d);
    std::cout << buf << "\n";
  }
  std::snprintf(buf, sizeof buf, "%saggregate dist=%.6f dist2d=%.6f", prefix.c_str(), s.aggregate, s.aggregate_2d);
  std::cout << buf << "\n";
}

int run_dispersion(const std::string& vectors, const std::string& seeds, const std::string& compare) {
  log_config("dispersion", {{"vectors", vectors}, {"seeds", seeds}, {"compare", compare}});
  const auto records = read_vectors(vectors);
  const auto seed_records = seeds.empty() ? std::vector<VectorRecord>{} : read_vectors(seeds);
  const auto stats = dispersion(records, seed_records);
  print_dispersion("", stats);
  if (!compare.empty()) {
    const auto other = dispersion(read_vectors(compare), {});
    print_dispersion("compare ", other);
    if (auto ratio = dispersion_ratio(stats, other)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "ratio=%.6f", *ratio);
      std::cout << buf << "\n";
    } else {
      std::cout << "ratio=NA\n";
    }
  }
  return 0;
}

int run_protocol_cmd(const std::string& config_path, std::optional<std::size_t> jobs) {
  auto config = ExperimentConfig::load(config_path);
  if (jobs) config.jobs = *jobs;
  log_config("protocol run", config.to_json());
  const auto summary = run_protocol(config, [](const std::string& m) { log_info(m); });
  const auto& r = summary.report;
  std::cout << "cells=" << r.grid.size() << " computed=" << summary.cells_computed
            << " reused=" << summary.cells_reused << " trainings=" << summary.trainings_run
            << " report=" << (config.output_dir / "report.md").string() << "\n";
  return r.complete() ? 0 : 1;
}

int run_cases(const std::string& clean, const std::string& noisy, const std::string& ref,
              const std::vector<std::string>& hyps, const std::vector<std::size_t>& wanted) {
  log_config("cases", {{"clean", clean}, {"noisy", noisy}, {"ref", ref}, {"hyp", hyps}, {"lines", wanted}});
  const auto clean_lines = read_lines(clean);
  const auto noisy_lines = read_lines(noisy);
  if (clean_lines.size() != noisy_lines.size())
    throw Error(ErrorKind::LineCountMismatch, "clean and noisy files differ in line count");
  std::vector<std::string> ref_lines;
  if (!ref.empty()) ref_lines = read_lines(ref);
  std::vector<std::pair<std::string, std::vector<std::string>>> hyp_lines;
  for (const auto& h : hyps) {
    const auto eq = h.find('=');
    if (eq == std::string::npos) throw UsageError("--hyp takes label=file");
    hyp_lines.emplace_back(h.substr(0, eq), read_lines(h.substr(eq + 1)));
  }
  for (std::size_t n : wanted) {
    if (n == 0 || n > clean_lines.size())
      throw Error(ErrorKind::InvalidArgument, "line " + std::to_string(n) + " out of range");
    const std::size_t i = n - 1;
    std::cout << "== line " << n << "\n";
    std::cout << "clean\t" << clean_lines[i] << "\n";
    std::cout << "noisy\t" << noisy_lines[i] << "\n";
    if (i < ref_lines.size()) std::cout << "reference\t" << ref_lines[i] << "\n";
    for (const auto& [label, lines] : hyp_lines)
      if (i < lines.size()) std::cout << "hyp[" << label << "]\t" << lines[i] << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corpus attacks and robustness-transfer evaluation for multilingual MT"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress diagnostics on stderr");
  app.set_version_flag("--version", std::string("rtransfer ") + kVersion + " (config schema " +
                                        std::to_string(kConfigSchemaVersion) + ")");

  AttackArgs attack;
  auto* attack_cmd = app.add_subcommand("attack", "Add black-box noise to a pre-tokenized file");
  attack_cmd->add_option("--in", attack.in, "Input file (one sentence per line)")->required();
  attack_cmd->add_option("--out", attack.out, "Output file")->required();
  attack_cmd->add_option("--level", attack.level, "char | word | multi")->capture_default_str();
  attack_cmd->add_option("--proportion,-p", attack.proportion, "Fraction of tokens attacked")->capture_default_str();
  attack_cmd->add_option("--seed", attack.seed, "Global seed")->capture_default_str();
  attack_cmd->add_option("--embeddings", attack.embeddings, "GloVe/fastText text vectors (word, multi)");
  attack_cmd->add_option("--k", attack.k, "Neighbours sampled for word insert/replace")->capture_default_str();
  attack_cmd->add_option("--embedding-limit", attack.limit, "Maximum vectors loaded")->capture_default_str();
  attack_cmd->add_flag("--lowercase-fallback", attack.lowercase, "Retry lookups lowercased");
  attack_cmd->add_option("--alphabet", attack.alphabet, "Explicit character pool (default: corpus-local)");
  attack_cmd->add_option("--direction", attack.direction, "Direction id mixed into the seed, e.g. en-fr");
  attack_cmd->add_option("--weights", attack.weights, "Operation weights, e.g. CharInsert=0.5,CharDelete=0.5");
  attack_cmd->add_option("--events", attack.events, "Write a per-event TSV log here");
  attack_cmd->add_option("--jobs,-j", attack.jobs, "Worker threads (0 = all cores)")->capture_default_str();

  std::string nb_path, nb_token;
  std::size_t nb_k = 10, nb_limit = 200000;
  bool nb_lower = false;
  auto* nb_cmd = app.add_subcommand("neighbors", "Print the top-k cosine neighbours of a token");
  nb_cmd->add_option("path", nb_path, "Embedding file")->required();
  nb_cmd->add_option("token", nb_token, "Query token")->required();
  nb_cmd->add_option("--k", nb_k, "Number of neighbours")->capture_default_str();
  nb_cmd->add_option("--limit", nb_limit, "Maximum vectors loaded")->capture_default_str();
  nb_cmd->add_flag("--lowercase-fallback", nb_lower, "Retry lookups lowercased");

  std::string bleu_hyp, bleu_ref;
  bool bleu_smooth = false;
  auto* bleu_cmd = app.add_subcommand("bleu", "Corpus BLEU-4 of a hypothesis file");
  bleu_cmd->add_option("--hyp", bleu_hyp, "Hypotheses")->required();
  bleu_cmd->add_option("--ref", bleu_ref, "References")->required();
  bleu_cmd->add_flag("--smooth", bleu_smooth, "Add-one smoothing for orders 2-4");

  std::string pca_vectors, pca_out;
  auto* pca_cmd = app.add_subcommand("pca", "Project a vector dump onto its first two principal components");
  pca_cmd->add_option("--vectors", pca_vectors, "Vector dump (TSV)")->required();
  pca_cmd->add_option("--out", pca_out, "Projection output (TSV)")->required();

  std::string disp_vectors, disp_seeds, disp_compare;
  auto* disp_cmd = app.add_subcommand("dispersion", "Mean distance of noisy representations to their seed");
  disp_cmd->add_option("--vectors", disp_vectors, "Vector dump of the model under study")->required();
  disp_cmd->add_option("--seeds", disp_seeds, "Seed vectors for --vectors (if not in the dump)");
  disp_cmd->add_option("--compare", disp_compare, "Second model's dump, seed rows included");

  std::string proto_config;
  std::size_t proto_jobs = 0;
  auto* proto_cmd = app.add_subcommand("protocol", "Robustness transfer protocol");
  proto_cmd->require_subcommand(1);
  auto* proto_run = proto_cmd->add_subcommand("run", "Build, train, translate, score and report (resumable)");
  proto_run->add_option("--config", proto_config, "Experiment config (JSON)")->required();
  auto* jobs_opt = proto_run->add_option("--jobs,-j", proto_jobs, "Concurrent translation cells");

  std::string cases_clean, cases_noisy, cases_ref;
  std::vector<std::string> cases_hyp;
  std::vector<std::size_t> cases_lines;
  auto* cases_cmd = app.add_subcommand("cases", "Side-by-side dump of selected lines");
  cases_cmd->add_option("--clean", cases_clean, "Clean source")->required();
  cases_cmd->add_option("--noisy", cases_noisy, "Attacked source")->required();
  cases_cmd->add_option("--ref", cases_ref, "Reference translations");
  cases_cmd->add_option("--hyp", cases_hyp, "label=file, repeatable");
  cases_cmd->add_option("--lines", cases_lines, "1-based line numbers")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  verbosity = quiet ? 0 : 1;

  try {
    if (*attack_cmd) return run_attack(attack);
    if (*nb_cmd) return run_neighbors(nb_path, nb_token, nb_k, nb_limit, nb_lower);
    if (*bleu_cmd) return run_bleu(bleu_hyp, bleu_ref, bleu_smooth);
    if (*pca_cmd) return run_pca(pca_vectors, pca_out);
    if (*disp_cmd) return run_dispersion(disp_vectors, disp_seeds, disp_compare);
    if (*proto_run)
      return run_protocol_cmd(proto_config, *jobs_opt ? std::optional<std::size_t>(proto_jobs) : std::nullopt);
    if (*cases_cmd) return run_cases(cases_clean, cases_noisy, cases_ref, cases_hyp, cases_lines);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
