// dchi: d_chi-privacy text perturbation toolbox.
//
// Subcommands: privatize (corpus perturbation), calibrate (deniability
// sweeps), knn-stats (embedding geometry), audit (empirical privacy
// verification), cache (binary embedding cache management).
//
// Exit codes: 0 success, 1 audit failed, 2 I/O error, 3 data error,
// 4 bad flags.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dchi/calibration.hpp"
#include "dchi/embedding.hpp"
#include "dchi/errors.hpp"
#include "dchi/format.hpp"
#include "dchi/geometry.hpp"
#include "dchi/mechanism.hpp"
#include "dchi/parallel.hpp"
#include "dchi/rng.hpp"
#include "dchi/verifier.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAuditFailed = 1;
constexpr int kExitIo = 2;
constexpr int kExitData = 3;
constexpr int kExitFlags = 4;

// Filesystem-level failures; everything else under dchi::Error is a data
// problem in an otherwise readable file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EmbeddingFlags {
  std::string path;
  bool lowercase = false;
  bool header = false;
  std::size_t max_words = 0;  // 0 = unlimited
};

void add_embedding_flags(CLI::App* cmd, EmbeddingFlags& flags) {
  cmd->add_option("-e,--embedding", flags.path,
                  "Embedding file (text or dchi cache); relative names also "
                  "resolve against $DCHI_EMBEDDING_DIR")
      ->required();
  cmd->add_flag("--lowercase", flags.lowercase,
                "ASCII-lowercase tokens while loading text embeddings");
  cmd->add_flag("--header", flags.header,
                "Text file starts with a 'count dim' header line (fastText)");
  cmd->add_option("--max-words", flags.max_words,
                  "Load at most this many words from a text file (0 = all)");
}

fs::path resolve_embedding_path(const std::string& given) {
  fs::path p(given);
  if (fs::exists(p)) return p;
  if (const char* dir = std::getenv("DCHI_EMBEDDING_DIR")) {
    fs::path alt = fs::path(dir) / p;
    if (fs::exists(alt)) return alt;
  }
  throw IoError("embedding file not found: " + given);
}

dchi::EmbeddingModel load_embedding(const EmbeddingFlags& flags) {
  dchi::LoadOptions opts;
  opts.lowercase = flags.lowercase;
  opts.expect_header = flags.header;
  if (flags.max_words > 0) opts.max_words = flags.max_words;
  return dchi::load_model(resolve_embedding_path(flags.path), opts);
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  if (in.bad()) throw IoError("failed while reading input");
  return lines;
}

std::vector<std::string> read_input_lines(const std::string& path) {
  if (path.empty() || path == "-") return read_lines(std::cin);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file: " + path);
  return read_lines(in);
}

// All file output goes through a temp file plus rename, so a failed command
// never leaves a partial artifact behind.
void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file: " + tmp.string());
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("failed writing output file: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename output into place: " + path.string());
  }
}

void emit(const std::string& dest, const std::string& content) {
  if (dest.empty() || dest == "-") {
    std::cout << content;
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing to stdout");
    return;
  }
  write_file_atomic(dest, content);
}

dchi::OovPolicy parse_oov(const std::string& name) {
  if (name == "passthrough") return dchi::OovPolicy::kPassthrough;
  if (name == "drop") return dchi::OovPolicy::kDrop;
  return dchi::OovPolicy::kError;
}

// ---------------------------------------------------------------------------
// privatize

struct PrivatizeOptions {
  EmbeddingFlags embedding;
  double epsilon = 0.0;
  std::string input = "-";
  std::string output = "-";
  std::string trace;
  std::string oov = "passthrough";
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

int run_privatize(const PrivatizeOptions& opts) {
  const dchi::EmbeddingModel model = load_embedding(opts.embedding);
  const std::vector<std::string> lines = read_input_lines(opts.input);

  dchi::MechanismConfig cfg;
  cfg.epsilon = opts.epsilon;
  cfg.oov_policy = parse_oov(opts.oov);
  cfg.record_trace = !opts.trace.empty();
  cfg.validate();

  std::vector<std::string> outputs(lines.size());
  std::vector<std::vector<dchi::PerturbationRecord>> traces(
      cfg.record_trace ? lines.size() : 0);
  // (line index, token) of OOV failures under the error policy; the
  // smallest line wins so the report is schedule-independent.
  std::vector<std::optional<std::string>> oov_failures(lines.size());

  dchi::parallel_chunks(
      lines.size(), opts.workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          const auto tokens = dchi::tokenize(lines[i]);
          try {
            // Line i owns stream id i; positions fork substreams inside.
            auto result = dchi::perturb_string(
                model, cfg, dchi::RandomStream(opts.seed, i), tokens);
            outputs[i] = dchi::detokenize(result.tokens);
            if (cfg.record_trace) traces[i] = std::move(result.records);
          } catch (const dchi::OovError& e) {
            oov_failures[i] = e.token();
          }
        }
      });

  for (std::size_t i = 0; i < oov_failures.size(); ++i) {
    if (oov_failures[i]) {
      throw dchi::Error("line " + std::to_string(i + 1) +
                        ": out-of-vocabulary token '" + *oov_failures[i] +
                        "'");
    }
  }

  std::string body;
  for (const std::string& line : outputs) {
    body += line;
    body += '\n';
  }
  emit(opts.output, body);

  if (cfg.record_trace) {
    std::ostringstream trace;
    trace << "line,position,input,output,noise_norm,changed\n";
    for (std::size_t i = 0; i < traces.size(); ++i) {
      for (const dchi::PerturbationRecord& r : traces[i]) {
        trace << (i + 1) << ',' << r.position << ','
              << dchi::csv_escape(r.input_word) << ','
              << dchi::csv_escape(r.output_word) << ','
              << dchi::format_double(r.noise_norm) << ','
              << (r.changed ? 1 : 0) << '\n';
      }
    }
    write_file_atomic(opts.trace, trace.str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateOptions {
  EmbeddingFlags embedding;
  std::vector<double> epsilons;
  std::vector<std::string> words;
  std::size_t sample_size = 50;
  std::uint32_t runs = 1000;
  double eta = 0.01;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string format = "csv";
  std::string output = "-";
};

int run_calibrate(const CalibrateOptions& opts) {
  const dchi::EmbeddingModel model = load_embedding(opts.embedding);

  std::vector<std::string> words = opts.words;
  if (words.empty()) {
    const auto ids =
        dchi::sample_word_ids(model, opts.sample_size, opts.seed);
    words.reserve(ids.size());
    for (dchi::WordId id : ids) words.push_back(model.word_of(id));
  }

  dchi::SweepOptions sweep_opts;
  sweep_opts.runs = opts.runs;
  sweep_opts.eta = opts.eta;
  sweep_opts.workers = opts.workers;
  const dchi::SweepResult sweep =
      dchi::sweep(model, opts.epsilons, words, opts.seed, sweep_opts);
  for (const std::string& w : sweep.skipped_words) {
    std::cerr << "warning: skipping out-of-vocabulary word '" << w << "'\n";
  }

  const dchi::WorstCaseSummary summary = dchi::worst_case_summary(sweep);
  dchi::write_summary_text(std::cerr, summary);

  std::ostringstream out;
  if (opts.format == "csv") {
    dchi::write_sweep_csv(out, sweep);
  } else if (opts.format == "json") {
    out << dchi::sweep_to_json(sweep, summary).dump(2) << '\n';
  } else {
    dchi::write_summary_text(out, summary);
  }
  emit(opts.output, out.str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// knn-stats

struct KnnOptions {
  EmbeddingFlags embedding;
  std::vector<std::size_t> ks;
  std::vector<double> percentiles;
  std::size_t sample_size = 1000;
  std::size_t histogram_k = 0;  // 0 = table mode
  std::size_t bins = 50;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string format = "csv";
  std::string output = "-";
};

int run_knn(const KnnOptions& opts) {
  const dchi::EmbeddingModel model = load_embedding(opts.embedding);
  if (model.size() < 2) {
    throw dchi::Error("k-NN analysis needs at least two words");
  }

  std::vector<std::size_t> ks = opts.ks;
  if (ks.empty()) {
    // Default grid, silently clipped to the largest feasible k.
    for (std::size_t k : dchi::kDefaultKs) {
      if (k <= model.size() - 1) ks.push_back(k);
    }
  }
  std::vector<double> percentiles = opts.percentiles;
  if (percentiles.empty()) {
    percentiles.assign(std::begin(dchi::kDefaultPercentiles),
                       std::end(dchi::kDefaultPercentiles));
  }

  const std::size_t count =
      opts.sample_size == 0 ? model.size() : opts.sample_size;
  const std::vector<dchi::WordId> sample =
      dchi::sample_word_ids(model, count, opts.seed);

  dchi::GeometryOptions geo;
  geo.workers = opts.workers;

  std::ostringstream out;
  if (opts.histogram_k > 0) {
    const dchi::stats::Histogram hist = dchi::knn_distance_histogram(
        model, opts.histogram_k, opts.bins, sample, geo);
    if (opts.format == "json") {
      nlohmann::json j = {{"k", opts.histogram_k},
                          {"sample_size", sample.size()},
                          {"edges", hist.edges},
                          {"counts", hist.counts}};
      out << j.dump(2) << '\n';
    } else {
      out << "bin_lo,bin_hi,count\n";
      for (std::size_t b = 0; b < hist.counts.size(); ++b) {
        out << dchi::format_double(hist.edges[b]) << ','
            << dchi::format_double(hist.edges[b + 1]) << ','
            << hist.counts[b] << '\n';
      }
    }
  } else {
    const dchi::KnnDistanceTable table =
        dchi::knn_distance_table(model, ks, percentiles, sample, geo);
    if (opts.format == "json") {
      nlohmann::json j = {{"ks", table.ks},
                          {"percentiles", table.percentiles},
                          {"sample_size", table.sample_size}};
      nlohmann::json rows = nlohmann::json::array();
      for (std::size_t k = 0; k < table.ks.size(); ++k) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t p = 0; p < table.percentiles.size(); ++p) {
          row.push_back(table.at(k, p));
        }
        rows.push_back(std::move(row));
      }
      j["cells"] = std::move(rows);
      out << j.dump(2) << '\n';
    } else {
      dchi::write_knn_table_csv(out, table);
    }
  }
  emit(opts.output, out.str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// audit

struct AuditOptions {
  EmbeddingFlags embedding;
  double epsilon = 0.0;
  std::uint64_t samples = 1'000'000;
  std::uint32_t min_count = 100;
  double sigmas = 3.0;
  double tv_threshold = 0.01;
  std::vector<std::string> composition;  // exactly 2 words when set
  std::string mutant = "none";
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string output = "-";
};

int run_audit(const AuditOptions& opts) {
  const dchi::EmbeddingModel model = load_embedding(opts.embedding);
  if (model.size() > 100) {
    throw dchi::Error(
        "vocabulary too large to audit exhaustively (limit: 100 words); "
        "auditing is meant for small purpose-built models");
  }

  dchi::AuditConfig cfg;
  cfg.samples = opts.samples;
  cfg.min_count = opts.min_count;
  cfg.confidence_sigmas = opts.sigmas;
  cfg.tv_threshold = opts.tv_threshold;

  const auto mutant = dchi::parse_mutant(opts.mutant);
  if (!mutant) throw std::invalid_argument("unknown mutant: " + opts.mutant);

  std::optional<std::pair<std::string, std::string>> comp;
  if (!opts.composition.empty()) {
    comp = {opts.composition.at(0), opts.composition.at(1)};
  }

  const dchi::FullAuditReport report = dchi::run_full_audit(
      model, opts.epsilon, cfg, opts.seed, comp, *mutant, opts.workers);

  emit(opts.output, dchi::report_to_json(report).dump(2) + "\n");
  std::cerr << "audit verdict: " << (report.passed ? "pass" : "fail") << " ("
            << report.pairs.size() << " ordered pairs, "
            << cfg.samples << " samples per input)\n";
  return report.passed ? kExitOk : kExitAuditFailed;
}

// ---------------------------------------------------------------------------
// cache

struct CacheOptions {
  EmbeddingFlags embedding;
  std::string output;
  bool info = false;
};

int run_cache(const CacheOptions& opts) {
  const fs::path path = resolve_embedding_path(opts.embedding.path);
  if (opts.info) {
    const dchi::EmbeddingModel model = load_embedding(opts.embedding);
    nlohmann::json j = {{"name", model.name()},
                        {"words", model.size()},
                        {"dim", model.dim()},
                        {"cache", dchi::is_cache_file(path)}};
    std::cout << j.dump(2) << '\n';
    return kExitOk;
  }
  if (opts.output.empty()) {
    throw std::invalid_argument("cache: --output is required unless --info");
  }
  const dchi::EmbeddingModel model = load_embedding(opts.embedding);
  // save_cache writes to the final path itself; route through the atomic
  // writer contract by saving to temp and renaming.
  fs::path tmp = fs::path(opts.output);
  tmp += ".tmp";
  dchi::save_cache(model, tmp);
  std::error_code ec;
  fs::rename(tmp, opts.output, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename cache into place: " + opts.output);
  }
  std::cerr << "cached " << model.size() << " words x " << model.dim()
            << " dims to " << opts.output << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);

  CLI::App app{
      "d_chi-privacy text perturbation: perturb words in embedding space "
      "with metric-DP noise and project back to the vocabulary"};
  app.require_subcommand(1);

  PrivatizeOptions priv;
  CLI::App* priv_cmd = app.add_subcommand(
      "privatize", "Perturb a line-oriented corpus word by word");
  add_embedding_flags(priv_cmd, priv.embedding);
  priv_cmd->add_option("--epsilon", priv.epsilon, "Privacy parameter (> 0)")
      ->required()
      ->check(CLI::PositiveNumber);
  priv_cmd->add_option("-i,--input", priv.input,
                       "Input file, one record per line ('-' = stdin)");
  priv_cmd->add_option("-o,--output", priv.output,
                       "Output file ('-' = stdout)");
  priv_cmd->add_option("--trace", priv.trace,
                       "Write a per-word perturbation trace CSV here");
  priv_cmd->add_option("--oov", priv.oov, "Out-of-vocabulary token policy")
      ->check(CLI::IsMember({"passthrough", "drop", "error"}));
  priv_cmd->add_option("--seed", priv.seed, "RNG seed (default 0)");
  priv_cmd->add_option("--workers", priv.workers, "Worker threads")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1024}));

  CalibrateOptions cal;
  CLI::App* cal_cmd = app.add_subcommand(
      "calibrate",
      "Sweep epsilon and estimate plausible-deniability statistics");
  add_embedding_flags(cal_cmd, cal.embedding);
  cal_cmd
      ->add_option("--epsilons,--epsilon-grid", cal.epsilons,
                   "Comma-separated epsilon grid")
      ->required()
      ->delimiter(',');
  cal_cmd
      ->add_option("--words", cal.words,
                   "Words to calibrate (default: random sample)")
      ->delimiter(',');
  cal_cmd->add_option("--sample-size", cal.sample_size,
                      "Random word sample size when --words is not given");
  cal_cmd->add_option("--runs", cal.runs, "Mechanism runs per (word, epsilon)")
      ->check(CLI::PositiveNumber);
  cal_cmd->add_option("--eta", cal.eta,
                      "Mass tolerance for the eta-support statistic");
  cal_cmd->add_option("--seed", cal.seed, "RNG seed (default 0)");
  cal_cmd->add_option("--workers", cal.workers, "Worker threads")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
  cal_cmd->add_option("--format", cal.format, "Output format")
      ->check(CLI::IsMember({"csv", "json", "text"}));
  cal_cmd->add_option("-o,--output", cal.output, "Output file ('-' = stdout)");

  KnnOptions knn;
  CLI::App* knn_cmd = app.add_subcommand(
      "knn-stats", "Nearest-neighbor distance percentiles of the embedding");
  add_embedding_flags(knn_cmd, knn.embedding);
  knn_cmd->add_option("--ks", knn.ks, "k values (default 1,5,...,1000 clipped)")
      ->delimiter(',');
  knn_cmd
      ->add_option("--percentiles", knn.percentiles,
                   "Percentile levels in (0,100); default 5,20,50,80,95")
      ->delimiter(',');
  knn_cmd->add_option("--sample-size", knn.sample_size,
                      "Word sample size (0 = whole vocabulary)");
  knn_cmd->add_option("--histogram-k", knn.histogram_k,
                      "Emit a distance histogram for this k instead of the "
                      "percentile table");
  knn_cmd->add_option("--bins", knn.bins, "Histogram bin count")
      ->check(CLI::PositiveNumber);
  knn_cmd->add_option("--seed", knn.seed, "RNG seed (default 0)");
  knn_cmd->add_option("--workers", knn.workers, "Worker threads")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
  knn_cmd->add_option("--format", knn.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  knn_cmd->add_option("-o,--output", knn.output, "Output file ('-' = stdout)");

  AuditOptions audit;
  CLI::App* audit_cmd = app.add_subcommand(
      "audit", "Empirically verify the privacy bound on a small model");
  add_embedding_flags(audit_cmd, audit.embedding);
  audit_cmd->add_option("--epsilon", audit.epsilon, "Privacy parameter (> 0)")
      ->required()
      ->check(CLI::PositiveNumber);
  audit_cmd->add_option("--samples", audit.samples,
                        "Mechanism draws per input word (>= 10000)");
  audit_cmd->add_option("--min-count", audit.min_count,
                        "Output admission threshold (>= 20)");
  audit_cmd->add_option("--sigmas", audit.sigmas,
                        "Confidence band width in standard errors");
  audit_cmd->add_option("--tv-threshold", audit.tv_threshold,
                        "Composition total-variation pass bound");
  audit_cmd
      ->add_option("--composition", audit.composition,
                   "Two words for the composition check (default: first two)")
      ->expected(2);
  audit_cmd
      ->add_option("--mutant", audit.mutant,
                   "Run a deliberately broken mechanism variant")
      ->check(CLI::IsMember({"none", "half-noise", "shared-noise"}));
  audit_cmd->add_option("--seed", audit.seed, "RNG seed (default 0)");
  audit_cmd->add_option("--workers", audit.workers, "Worker threads")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
  audit_cmd->add_option("-o,--output", audit.output,
                        "JSON report file ('-' = stdout)");

  CacheOptions cache;
  CLI::App* cache_cmd = app.add_subcommand(
      "cache", "Build or inspect a binary embedding cache");
  add_embedding_flags(cache_cmd, cache.embedding);
  cache_cmd->add_option("-o,--output", cache.output, "Cache file to write");
  cache_cmd->add_flag("--info", cache.info,
                      "Print model metadata instead of writing a cache");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFlags;
  }

  try {
    if (priv_cmd->parsed()) return run_privatize(priv);
    if (cal_cmd->parsed()) return run_calibrate(cal);
    if (knn_cmd->parsed()) return run_knn(knn);
    if (audit_cmd->parsed()) return run_audit(audit);
    if (cache_cmd->parsed()) return run_cache(cache);
    std::cerr << "error: no subcommand\n";
    return kExitFlags;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const dchi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFlags;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
}
