#include "hsgns_cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "hsgns/corpus.hpp"
#include "hsgns/errors.hpp"
#include "hsgns/evaluation.hpp"
#include "hsgns/model_io.hpp"
#include "hsgns/trainer.hpp"
#include "json.hpp"

namespace hsgns::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string shortest(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  double back = 0.0;
  for (int p = 1; p <= 17; ++p) {
    std::ostringstream t;
    t << std::setprecision(p) << x;
    std::istringstream(t.str()) >> back;
    if (back == x) return t.str();
  }
  return s.str();
}

std::string optional_fixed(const std::optional<double>& x, int digits) {
  return x ? fixed(*x, digits) : std::string("n/a");
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string input;
  std::string output;
  std::string mode = "hyperbolic";
  std::string format = "binary";
  TrainConfig config;
  bool tied = false;
  bool untied = false;
  bool fixed_window = false;
  CLI::Option* theta_option = nullptr;
};

std::string resolved_train_flags(const TrainArgs& a, const TrainConfig& c) {
  std::ostringstream s;
  s << "train --input " << a.input << " --output " << a.output << " --format " << a.format
    << " --mode " << to_string(c.mode) << " --dim " << c.dim << " --window " << c.window
    << (c.dynamic_window ? "" : " --fixed-window") << " --negatives " << c.negatives
    << " --theta " << shortest(c.theta) << " --lr " << shortest(c.lr) << " --epochs "
    << c.epochs << " --min-count " << c.min_count << " --subsample " << shortest(c.subsample)
    << " --clip " << shortest(c.clip) << " --threads " << c.threads << " --seed " << c.seed
    << (c.tied ? " --tied" : " --untied");
  return s.str();
}

int cmd_train(TrainArgs& a, std::ostream& out, std::ostream& err) {
  TrainConfig c = a.config;
  const auto mode = parse_geometry(a.mode);
  if (!mode) throw UsageError("--mode must be hyperbolic or euclidean");
  c.mode = *mode;
  const auto format = parse_model_format(a.format);
  if (!format) throw UsageError("--format must be text or binary");
  // The hyperbolic model ties its layers; the Euclidean baseline keeps the
  // usual separate input and output matrices unless asked otherwise.
  c.tied = a.tied ? true : a.untied ? false : c.mode == Geometry::hyperbolic;
  c.dynamic_window = !a.fixed_window;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (c.mode == Geometry::euclidean && a.theta_option->count() > 0) {
    err << "warning: --theta is ignored in euclidean mode\n";
  }
  const std::string echo = resolved_train_flags(a, c);
  err << "resolved: " << echo << "\n";

  const auto loaded = load_corpus(a.input, c.vocabulary_options());
  err << "corpus: " << loaded.lines_read << " lines, " << loaded.corpus.tokens()
      << " tokens in vocabulary, |V| = " << loaded.vocab.size();
  if (loaded.invalid_bytes > 0) err << ", " << loaded.invalid_bytes << " invalid UTF-8 bytes skipped";
  err << "\n";

  Trainer trainer(loaded.vocab, loaded.corpus, c, &err);
  const TrainStats stats = trainer.train();

  const std::size_t violations = count_constraint_violations(trainer.parameters().alpha(), 1e-5) +
                                 (c.tied ? 0 : count_constraint_violations(trainer.parameters().beta(), 1e-5));

  nlohmann::ordered_json meta;
  meta["command"] = echo;
  meta["mode"] = std::string(to_string(c.mode));
  meta["dim"] = c.dim;
  meta["window"] = c.window;
  meta["dynamic_window"] = c.dynamic_window;
  meta["negatives"] = c.negatives;
  meta["theta"] = c.effective_theta();
  meta["lr"] = c.lr;
  meta["epochs"] = c.epochs;
  meta["min_count"] = c.min_count;
  meta["subsample"] = c.subsample;
  meta["clip"] = c.clip;
  meta["tied"] = c.tied;
  meta["threads"] = c.threads;
  meta["seed"] = c.seed;
  meta["negative_power"] = c.negative_power;
  meta["init_sigma"] = c.init_sigma;
  meta["vocab_size"] = loaded.vocab.size();
  meta["corpus_tokens"] = loaded.corpus.tokens();

  const EmbeddingModel model = trainer.model(meta.dump());
  save_model(model, a.output, *format);
  loaded.vocab.save(a.output + ".vocab");

  // Timing fields vary between runs, so they live only in the sidecar.
  meta["stats"] = {{"tokens_processed", stats.tokens_processed},
                   {"events_applied", stats.events_applied},
                   {"events_skipped", stats.events_skipped},
                   {"seconds", stats.seconds},
                   {"tokens_per_second", stats.tokens_per_second},
                   {"mean_loss", stats.mean_loss},
                   {"skip_rate", stats.skip_rate},
                   {"constraint_violations", violations}};
  {
    std::ofstream side(a.output + ".json");
    side << meta.dump(2) << "\n";
    if (!side) throw DataError("cannot write " + a.output + ".json");
  }

  out << "tokens/sec: " << fixed(stats.tokens_per_second, 0) << "\n"
      << "final mean loss: " << fixed(stats.mean_loss, 6) << "\n"
      << "lock skip rate: " << fixed(100.0 * stats.skip_rate, 4) << "%\n"
      << "events applied: " << stats.events_applied << "\n"
      << "constraint violations: " << violations << "\n"
      << "model: " << a.output << " (" << to_string(*format) << ")\n";
  return violations == 0 ? kOk : kNumerical;
}

// ---------------------------------------------------------------------------
// evaluation commands

struct EvalArgs {
  std::string input;
  std::vector<std::string> datasets;
  std::string tsv;
  std::string variant;
};

int cmd_eval_sim(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  err << "resolved: eval-sim --input " << a.input;
  for (const auto& d : a.datasets) err << " --dataset " << d;
  if (!a.tsv.empty()) err << " --tsv " << a.tsv;
  err << "\n";

  const auto model = load_model(a.input);
  std::vector<SimilarityDataset> sets;
  for (const auto& d : a.datasets) sets.push_back(load_similarity_dataset(d));
  const auto report = eval_similarity(model, sets);

  std::size_t width = 16;
  for (const auto& r : report.datasets) width = std::max(width, r.name.size() + 2);
  out << std::left << std::setw(static_cast<int>(width)) << "dataset" << std::right
      << std::setw(8) << "pairs" << std::setw(8) << "scored" << std::setw(10) << "coverage"
      << std::setw(10) << "spearman" << "\n";
  std::size_t scored = 0, total = 0;
  for (const auto& r : report.datasets) {
    out << std::left << std::setw(static_cast<int>(width)) << r.name << std::right
        << std::setw(8) << r.pairs_total << std::setw(8) << r.pairs_scored << std::setw(10)
        << fixed(r.coverage, 4) << std::setw(10) << optional_fixed(r.spearman, 4) << "\n";
    scored += r.pairs_scored;
    total += r.pairs_total;
  }
  const double coverage = total ? static_cast<double>(scored) / static_cast<double>(total) : 0.0;
  out << std::left << std::setw(static_cast<int>(width)) << "weighted-average" << std::right
      << std::setw(8) << total << std::setw(8) << scored << std::setw(10) << fixed(coverage, 4)
      << std::setw(10) << optional_fixed(report.weighted_average, 4) << "\n";

  if (!a.tsv.empty()) {
    std::ofstream t(a.tsv);
    if (!t) throw DataError("cannot write " + a.tsv);
    t << "dataset\tpairs_scored\tcoverage\tspearman\n";
    for (const auto& r : report.datasets) {
      t << r.name << '\t' << r.pairs_scored << '\t' << shortest(r.coverage) << '\t'
        << (r.spearman ? shortest(*r.spearman) : "nan") << '\n';
    }
    t << "weighted-average\t" << scored << '\t' << shortest(coverage) << '\t'
      << (report.weighted_average ? shortest(*report.weighted_average) : "nan") << '\n';
  }
  return kOk;
}

int cmd_eval_analogy(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const auto model = load_model(a.input);
  std::string name = a.variant;
  if (name.empty()) name = model.geometry() == Geometry::hyperbolic ? "z" : "euclidean";
  const auto variant = parse_analogy_variant(name);
  if (!variant) throw UsageError("--variant must be z, zprime or euclidean");
  if (model.geometry() == Geometry::hyperbolic && *variant == AnalogyVariant::euclidean) {
    throw UsageError("--variant euclidean needs a Euclidean model; use z or zprime");
  }
  err << "resolved: eval-analogy --input " << a.input << " --dataset " << a.datasets.front()
      << " --variant " << name;
  if (!a.tsv.empty()) err << " --tsv " << a.tsv;
  err << "\n";

  const auto dataset = load_analogy_dataset(a.datasets.front());
  const auto report = eval_analogy(model, dataset, *variant);

  std::size_t width = 16;
  for (const auto& c : report.categories) width = std::max(width, c.name.size() + 2);
  out << std::left << std::setw(static_cast<int>(width)) << "category" << std::right
      << std::setw(8) << "items" << std::setw(8) << "scored" << std::setw(9) << "correct"
      << std::setw(10) << "accuracy" << "\n";
  const auto row = [&](const std::string& n, std::size_t total, std::size_t scored,
                       std::size_t correct, const std::optional<double>& acc) {
    out << std::left << std::setw(static_cast<int>(width)) << n << std::right << std::setw(8)
        << total << std::setw(8) << scored << std::setw(9) << correct << std::setw(10)
        << optional_fixed(acc, 4) << "\n";
  };
  for (const auto& c : report.categories) row(c.name, c.total, c.scored, c.correct, c.accuracy);
  row("overall", report.total, report.scored, report.correct, report.accuracy);
  out << "variant: " << to_string(report.variant) << ", coverage: " << fixed(report.coverage, 4)
      << "\n";

  if (!a.tsv.empty()) {
    std::ofstream t(a.tsv);
    if (!t) throw DataError("cannot write " + a.tsv);
    t << "category\titems\tscored\tcorrect\taccuracy\n";
    for (const auto& c : report.categories) {
      t << c.name << '\t' << c.total << '\t' << c.scored << '\t' << c.correct << '\t'
        << (c.accuracy ? shortest(*c.accuracy) : "nan") << '\n';
    }
    t << "overall\t" << report.total << '\t' << report.scored << '\t' << report.correct << '\t'
      << (report.accuracy ? shortest(*report.accuracy) : "nan") << '\n';
  }
  return kOk;
}

struct NnArgs {
  std::string input;
  std::string word;
  std::size_t k = 10;
  bool include_self = false;
};

int cmd_nn(const NnArgs& a, std::ostream& out, std::ostream& err) {
  err << "resolved: nn --input " << a.input << " --word " << a.word << " --k " << a.k
      << (a.include_self ? " --include-self" : "") << "\n";
  const auto model = load_model(a.input);
  auto id = model.find(a.word);
  if (!id) id = model.find(lowercase(a.word));
  if (!id) {
    std::string msg = "word '" + a.word + "' is not in the vocabulary";
    const auto close = suggest_words(model, lowercase(a.word));
    if (!close.empty()) {
      msg += "; closest entries:";
      for (const auto& w : close) msg += " " + w;
    }
    throw DataError(msg);
  }
  std::vector<WordId> exclude;
  if (!a.include_self) exclude.push_back(*id);
  const auto result = nearest_neighbors(model, model.vector(static_cast<std::size_t>(*id)), a.k,
                                        exclude);
  const char* label = model.geometry() == Geometry::hyperbolic ? "distance" : "cosine";
  out << "rank\tword\t" << label << "\n";
  for (std::size_t i = 0; i < result.size(); ++i) {
    out << i + 1 << '\t' << model.word(static_cast<std::size_t>(result[i].id)) << '\t'
        << fixed(result[i].value, 6) << "\n";
  }
  return kOk;
}

struct ProbeArgs {
  double theta = 3.0;
  double dmax = 5.0;
  std::size_t points = 51;
};

int cmd_probe(const ProbeArgs& a, std::ostream& out, std::ostream& err) {
  if (!std::isfinite(a.theta)) throw UsageError("--theta must be finite");
  if (!(a.dmax >= 0.0) || !std::isfinite(a.dmax)) throw UsageError("--dmax must be non-negative");
  if (a.points < 1) throw UsageError("--points must be at least 1");
  err << "resolved: probe-objective --theta " << shortest(a.theta) << " --dmax "
      << shortest(a.dmax) << " --points " << a.points << "\n";
  out << "distance\tprobability\n";
  for (const auto& [d, p] : probe_objective(a.theta, a.dmax, a.points)) {
    out << shortest(d) << '\t' << shortest(p) << '\n';
  }
  return kOk;
}

}  // namespace

// ---------------------------------------------------------------------------

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::vector<std::string> suggest_words(const EmbeddingModel& model, std::string_view word,
                                       std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> scored;  // (distance, index)
  scored.reserve(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    scored.emplace_back(edit_distance(word, model.word(i)), i);
  }
  const auto keep = std::min(n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < keep; ++i) out.push_back(model.word(scored[i].second));
  return out;
}

std::vector<std::pair<double, double>> probe_objective(double theta, double dmax,
                                                       std::size_t points) {
  std::vector<std::pair<double, double>> out;
  out.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double d = points == 1 ? 0.0
                                 : dmax * static_cast<double>(i) / static_cast<double>(points - 1);
    out.emplace_back(d, sigmoid(theta - std::cosh(d)));
  }
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Skip-gram word embeddings on the hyperboloid, with a Euclidean baseline",
               "hsgns"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train embeddings on a text corpus");
  train->add_option("--input", ta.input, "Corpus: UTF-8 text, one document per line, optionally gzip")
      ->required();
  train->add_option("--output", ta.output,
                    "Model path; the vocabulary and a JSON config go next to it")
      ->required();
  train->add_option("--format", ta.format, "Model file format: text or binary")
      ->capture_default_str();
  train->add_option("--mode", ta.mode, "hyperbolic or euclidean")->capture_default_str();
  train->add_option("--dim", ta.config.dim, "Embedding dimension d")->capture_default_str();
  train->add_option("--window", ta.config.window, "Maximum context window")
      ->capture_default_str();
  train->add_flag("--fixed-window", ta.fixed_window,
                  "Use the full window at every position instead of sampling 1..window");
  train->add_option("--negatives", ta.config.negatives, "Negative samples per context word")
      ->capture_default_str();
  ta.theta_option = train->add_option("--theta", ta.config.theta, "Sigmoid shift (hyperbolic)")
                        ->capture_default_str();
  train->add_option("--lr", ta.config.lr, "Initial learning rate")->capture_default_str();
  train->add_option("--epochs", ta.config.epochs, "Passes over the corpus")->capture_default_str();
  train->add_option("--min-count", ta.config.min_count, "Drop words rarer than this")
      ->capture_default_str();
  train->add_option("--subsample", ta.config.subsample, "Subsampling threshold t")
      ->capture_default_str();
  train->add_option("--clip", ta.config.clip, "Maximum geodesic step length")
      ->capture_default_str();
  train->add_option("--threads", ta.config.threads, "Worker threads")->capture_default_str();
  train->add_option("--seed", ta.config.seed, "Random seed")->capture_default_str();
  auto* tied = train->add_flag("--tied", ta.tied,
                               "Share one matrix between centre and context (hyperbolic default)");
  auto* untied = train->add_flag("--untied", ta.untied,
                                 "Separate centre and context matrices (euclidean default)");
  tied->excludes(untied);

  EvalArgs sa;
  auto* sim = app.add_subcommand("eval-sim", "Spearman correlation on word-similarity datasets");
  sim->add_option("--input", sa.input, "Model file")->required();
  sim->add_option("--dataset", sa.datasets, "word1<TAB>word2<TAB>score file (repeatable)")
      ->required();
  sim->add_option("--tsv", sa.tsv, "Also write the table as TSV here");

  EvalArgs aa;
  auto* ana = app.add_subcommand("eval-analogy", "Accuracy on a Google-format analogy file");
  ana->add_option("--input", aa.input, "Model file")->required();
  ana->add_option("--dataset", aa.datasets, "Analogy file")->required()->expected(1);
  ana->add_option("--variant", aa.variant,
                  "z, zprime or euclidean (default: z for hyperbolic, euclidean otherwise)");
  ana->add_option("--tsv", aa.tsv, "Also write the table as TSV here");

  NnArgs na;
  auto* nn = app.add_subcommand("nn", "Nearest neighbours of a word");
  nn->add_option("--input", na.input, "Model file")->required();
  nn->add_option("--word", na.word, "Query word")->required();
  nn->add_option("--k", na.k, "Number of neighbours")->capture_default_str();
  nn->add_flag("--include-self", na.include_self, "Keep the query word in the results");

  ProbeArgs pa;
  auto* probe = app.add_subcommand(
      "probe-objective", "Tabulate sigma(theta - cosh d), the positive probability at distance d");
  probe->add_option("--theta", pa.theta, "Sigmoid shift")->capture_default_str();
  probe->add_option("--dmax", pa.dmax, "Largest distance")->capture_default_str();
  probe->add_option("--points", pa.points, "Grid size")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (train->parsed()) return cmd_train(ta, out, err);
    if (sim->parsed()) return cmd_eval_sim(sa, out, err);
    if (ana->parsed()) return cmd_eval_analogy(aa, out, err);
    if (nn->parsed()) return cmd_nn(na, out, err);
    if (probe->parsed()) return cmd_probe(pa, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace hsgns::cli
