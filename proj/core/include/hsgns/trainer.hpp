#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hsgns/corpus.hpp"
#include "hsgns/embedding.hpp"
#include "hsgns/geometry.hpp"

namespace hsgns {

struct TrainConfig {
  Geometry mode = Geometry::hyperbolic;
  int dim = 20;
  int window = 10;
  bool dynamic_window = true;
  int negatives = 10;
  double theta = 3.0;
  double lr = 0.05;
  int epochs = 3;
  std::int64_t min_count = 15;
  double subsample = 1e-5;
  double clip = 1.0;
  bool tied = true;
  int threads = 1;
  std::uint64_t seed = 1;
  double negative_power = 0.75;
  double init_sigma = 0.01;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
  VocabularyOptions vocabulary_options() const;
  EventOptions event_options() const;
  /// The shift actually used by the objective: theta in hyperbolic mode, 0
  /// for the Euclidean baseline.
  double effective_theta() const noexcept { return mode == Geometry::hyperbolic ? theta : 0.0; }
};

/// Centre (alpha) and context (beta) layers. In tied mode both names refer
/// to one matrix.
class Parameters {
 public:
  Parameters(Geometry geometry, std::size_t vocab_size, int dim, bool tied);

  /// Hyperbolic rows near the base point with N(0, sigma^2) space-like
  /// coordinates; Euclidean alpha uniform in (-1/d, 1/d) and an untied beta
  /// at zero.
  void initialize(std::uint64_t seed, double sigma);

  Geometry geometry() const noexcept { return alpha_.geometry(); }
  bool tied() const noexcept { return !beta_.has_value(); }
  std::size_t vocab_size() const noexcept { return alpha_.rows(); }

  EmbeddingMatrix& alpha() noexcept { return alpha_; }
  const EmbeddingMatrix& alpha() const noexcept { return alpha_; }
  EmbeddingMatrix& beta() noexcept { return beta_ ? *beta_ : alpha_; }
  const EmbeddingMatrix& beta() const noexcept { return beta_ ? *beta_ : alpha_; }

 private:
  EmbeddingMatrix alpha_;
  std::optional<EmbeddingMatrix> beta_;
};

// ---------------------------------------------------------------------------
// Objective

double sigmoid(double x) noexcept;

/// sigma((-1)^(1-label) (score + theta)).
double positive_probability(double score, double theta, int label) noexcept;

/// Similarity score of a centre and a context row: the Minkowski product in
/// hyperbolic mode, the Euclidean dot product otherwise.
double score(Geometry g, std::span<const double> a, std::span<const double> b) noexcept;

/// sum_i log sigma((-1)^(1-y_i) (score(alpha_u, beta_{w_i}) + theta)), with
/// y_0 = 1 for the positive word and 0 for the negatives.
double event_log_likelihood(const TrainingEvent& event, const EmbeddingMatrix& alpha,
                            const EmbeddingMatrix& beta, double theta);

/// Gradient of the event log-likelihood with respect to alpha_u. In
/// hyperbolic mode this is the ambient Minkowski gradient (Euclidean partials
/// with the last coordinate flipped); project it with project_to_tangent to
/// obtain the Riemannian gradient. In Euclidean mode, the ordinary gradient.
geometry::MinkowskiVector gradient_centre(const TrainingEvent& event, const EmbeddingMatrix& alpha,
                                          const EmbeddingMatrix& beta, double theta);

/// Gradient of the event log-likelihood with respect to beta_w. Repeated
/// occurrences of w among the event's words add up. Throws
/// std::invalid_argument when w does not occur in the event.
geometry::MinkowskiVector gradient_context(const TrainingEvent& event, WordId w,
                                           const EmbeddingMatrix& alpha,
                                           const EmbeddingMatrix& beta, double theta);

/// Moves `row` along the geodesic in the direction of the projected gradient
/// (ascent): the step length lr*|g| is capped at `clip`, and the result is
/// renormalized onto the hyperboloid.
geometry::HyperboloidPoint riemannian_sgd_step(const geometry::HyperboloidPoint& row,
                                               const geometry::MinkowskiVector& ambient_grad,
                                               double lr, double clip);

/// In-place form: `grad` is scratch space and is overwritten with the
/// projected gradient. Returns the geodesic length of the step taken.
double riemannian_sgd_step(std::span<double> row, std::span<double> grad, double lr, double clip);

/// One simultaneous gradient-ascent step of the Euclidean objective on the
/// rows touched by `event`.
void euclidean_sgns_step(const TrainingEvent& event, EmbeddingMatrix& alpha, EmbeddingMatrix& beta,
                         double lr);

/// lr0 (1 - progress), floored at lr0 * 1e-4.
double learning_rate(double progress, double lr0) noexcept;

// ---------------------------------------------------------------------------
// Training

class ProgressCounter {
 public:
  explicit ProgressCounter(std::int64_t total) : total_(total) {}
  void advance(std::int64_t tokens) noexcept {
    processed_.fetch_add(tokens, std::memory_order_relaxed);
  }
  std::int64_t processed() const noexcept {
    return std::min(processed_.load(std::memory_order_relaxed), total_);
  }
  std::int64_t total() const noexcept { return total_; }
  double progress() const noexcept {
    return total_ > 0 ? static_cast<double>(processed()) / static_cast<double>(total_) : 1.0;
  }

 private:
  std::atomic<std::int64_t> processed_{0};
  std::int64_t total_;
};

/// One exclusive try-lock per embedding row. Acquisition of a set is
/// all-or-nothing.
class RowLocks {
 public:
  explicit RowLocks(std::size_t n);

  /// `keys` must be sorted and free of duplicates. On failure nothing is held.
  bool try_lock_all(std::span<const std::uint32_t> keys) noexcept;
  void unlock_all(std::span<const std::uint32_t> keys) noexcept;
  bool is_locked(std::uint32_t key) const noexcept;
  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::unique_ptr<std::atomic<bool>[]> flags_;
};

struct TrainStats {
  std::int64_t tokens_processed = 0;
  std::int64_t events_applied = 0;
  std::int64_t events_skipped = 0;
  double seconds = 0.0;
  double tokens_per_second = 0.0;
  /// Mean of -log L over applied events.
  double mean_loss = 0.0;
  double skip_rate = 0.0;
  double final_lr = 0.0;
};

class Trainer {
 public:
  /// Progress lines (tokens/sec, lr, running loss, skip rate) go to `log`
  /// when it is non-null.
  Trainer(const Vocabulary& vocab, const Corpus& corpus, TrainConfig config,
          std::ostream* log = nullptr);
  ~Trainer();
  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  /// Runs all epochs with config.threads workers over disjoint corpus shards.
  /// Throws NumericalError naming the word whose row diverged.
  TrainStats train();

  /// Applies one event under the row locks, as a worker would. Returns false
  /// if a lock was unavailable and the event was skipped. When
  /// `log_likelihood` is non-null it receives the pre-update value.
  bool apply_event(const TrainingEvent& event, double lr, double* log_likelihood = nullptr);

  const Parameters& parameters() const noexcept { return params_; }
  Parameters& parameters() noexcept { return params_; }
  const TrainConfig& config() const noexcept { return config_; }
  RowLocks& locks() noexcept { return locks_; }

  /// The centre layer packaged with the vocabulary, ready for evaluation or
  /// saving.
  EmbeddingModel model(std::string config_echo = {}) const;

  /// Invoked (from the training thread) every time a row update completes
  /// while its lock is still held. Test instrumentation; null by default.
  std::function<void(const EmbeddingMatrix&, std::size_t row)> on_row_updated;

 private:
  struct Scratch;
  struct WorkerStats;

  bool apply_event_impl(WordId centre, WordId positive, std::span<const WordId> negatives,
                        double lr, Scratch& scratch, double* log_likelihood);
  void worker(std::size_t id, std::size_t first_line, std::size_t last_line);

  const Vocabulary& vocab_;
  const Corpus& corpus_;
  TrainConfig config_;
  std::ostream* log_;
  Parameters params_;
  RowLocks locks_;
  std::unique_ptr<ProgressCounter> progress_;
  std::vector<std::unique_ptr<WorkerStats>> stats_;
  std::unique_ptr<Scratch> direct_scratch_;
  std::atomic<bool> abort_{false};
};

}  // namespace hsgns
