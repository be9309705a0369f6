#include "hsgns/trainer.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "hsgns/errors.hpp"

namespace hsgns {

namespace gi = geometry::inplace;

namespace {

// log sigma(x) without overflow for large |x|.
double log_sigmoid(double x) noexcept {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double euclid_dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_index(WordId w, const EmbeddingMatrix& m, const char* role) {
  if (w < 0 || static_cast<std::size_t>(w) >= m.rows()) {
    throw std::invalid_argument(std::string(role) + " index " + std::to_string(w) +
                                " is out of range");
  }
}

void check_event(const TrainingEvent& e, const EmbeddingMatrix& alpha,
                 const EmbeddingMatrix& beta) {
  if (alpha.geometry() != beta.geometry() || alpha.width() != beta.width()) {
    throw std::invalid_argument("alpha and beta layers disagree in geometry or width");
  }
  check_index(e.centre, alpha, "centre");
  check_index(e.positive, beta, "positive");
  for (WordId w : e.negatives) check_index(w, beta, "negative");
}

template <class Fn>
void for_each_word(const TrainingEvent& e, Fn&& fn) {
  fn(e.positive, 1);
  for (WordId w : e.negatives) fn(w, 0);
}

// Turns Euclidean partials into the returned gradient: the Minkowski
// gradient in hyperbolic mode, unchanged otherwise.
geometry::MinkowskiVector finish_gradient(Geometry g, std::vector<double> partials) {
  geometry::MinkowskiVector v(std::move(partials));
  return g == Geometry::hyperbolic ? geometry::euclidean_to_minkowski_gradient(std::move(v)) : v;
}

// Euclidean partial of <a, x>_M (or a.x) with respect to x.
void add_partial(Geometry g, double coeff, std::span<const double> a, std::vector<double>& out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += coeff * a[i];
  if (g == Geometry::hyperbolic) out.back() -= 2.0 * coeff * a.back();
}

}  // namespace

// ---------------------------------------------------------------------------
// Per-event kernel shared by the trainer and euclidean_sgns_step.

struct Trainer::Scratch {
  std::vector<std::uint32_t> keys;       // sorted distinct lock keys
  std::vector<std::size_t> word_slot;    // slot of each event word, positive first
  std::size_t centre_slot = 0;
  std::vector<double> grads;             // one gradient row per slot
  std::vector<WordId> kept;              // subsampled line
  std::vector<WordId> negatives;         // event generation scratch
  std::uint32_t failed_key = 0;
};

namespace {

struct Layout {
  std::size_t vocab;
  bool tied;

  std::uint32_t alpha_key(WordId w) const noexcept { return static_cast<std::uint32_t>(w); }
  std::uint32_t beta_key(WordId w) const noexcept {
    return static_cast<std::uint32_t>(tied ? static_cast<std::size_t>(w) : vocab + static_cast<std::size_t>(w));
  }
};

template <class Scratch>
void prepare_keys(const Layout& layout, WordId centre, WordId positive,
                  std::span<const WordId> negatives, Scratch& s) {
  s.keys.clear();
  s.keys.push_back(layout.alpha_key(centre));
  s.keys.push_back(layout.beta_key(positive));
  for (WordId w : negatives) s.keys.push_back(layout.beta_key(w));
  std::sort(s.keys.begin(), s.keys.end());
  s.keys.erase(std::unique(s.keys.begin(), s.keys.end()), s.keys.end());

  const auto slot_of = [&](std::uint32_t key) {
    return static_cast<std::size_t>(std::lower_bound(s.keys.begin(), s.keys.end(), key) -
                                    s.keys.begin());
  };
  s.centre_slot = slot_of(layout.alpha_key(centre));
  s.word_slot.clear();
  s.word_slot.push_back(slot_of(layout.beta_key(positive)));
  for (WordId w : negatives) s.word_slot.push_back(slot_of(layout.beta_key(w)));
}

// Fills s.grads with the per-slot ascent directions computed from the current
// (pre-update) rows. Hyperbolic slots hold Minkowski gradients: the Euclidean
// partial of <a, x>_M is Ja, and flipping the last coordinate gives back a.
// Returns the event log-likelihood.
template <class Scratch>
double accumulate(Geometry g, const EmbeddingMatrix& alpha, const EmbeddingMatrix& beta,
                  double theta, WordId centre, WordId positive,
                  std::span<const WordId> negatives, Scratch& s) {
  const std::size_t width = alpha.width();
  s.grads.assign(s.keys.size() * width, 0.0);
  const auto a = alpha.row(static_cast<std::size_t>(centre));
  double* gc = s.grads.data() + s.centre_slot * width;
  double ll = 0.0;
  const std::size_t m = negatives.size() + 1;
  for (std::size_t i = 0; i < m; ++i) {
    const WordId w = i == 0 ? positive : negatives[i - 1];
    const double y = i == 0 ? 1.0 : 0.0;
    const auto b = beta.row(static_cast<std::size_t>(w));
    const double x = score(g, a, b) + theta;
    ll += log_sigmoid(i == 0 ? x : -x);
    const double c = y - sigmoid(x);
    double* gw = s.grads.data() + s.word_slot[i] * width;
    for (std::size_t j = 0; j < width; ++j) {
      gc[j] += c * b[j];
      gw[j] += c * a[j];
    }
  }
  return ll;
}

template <class Scratch, class OnRow>
void apply_slots(Geometry g, const Layout& layout, EmbeddingMatrix& alpha, EmbeddingMatrix& beta,
                 double lr, double clip, Scratch& s, OnRow&& on_row) {
  const std::size_t width = alpha.width();
  for (std::size_t k = 0; k < s.keys.size(); ++k) {
    const std::uint32_t key = s.keys[k];
    const bool is_beta = !layout.tied && key >= layout.vocab;
    EmbeddingMatrix& m = is_beta ? beta : alpha;
    const std::size_t row_index = is_beta ? key - layout.vocab : key;
    auto row = m.row(row_index);
    std::span<double> grad(s.grads.data() + k * width, width);
    s.failed_key = key;
    if (g == Geometry::hyperbolic) {
      riemannian_sgd_step(row, grad, lr, clip);
    } else {
      for (std::size_t j = 0; j < width; ++j) row[j] += lr * grad[j];
    }
    on_row(static_cast<const EmbeddingMatrix&>(m), row_index);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// TrainConfig

void TrainConfig::validate() const {
  const auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (dim < 1) fail("dim must be at least 1");
  if (window < 1) fail("window must be at least 1");
  if (negatives < 0) fail("negatives must be non-negative");
  if (!std::isfinite(theta)) fail("theta must be finite");
  if (!(lr > 0.0) || !std::isfinite(lr)) fail("lr must be positive");
  if (epochs < 1) fail("epochs must be at least 1");
  if (min_count < 1) fail("min-count must be at least 1");
  if (!(subsample > 0.0)) fail("subsample must be positive");
  if (!(clip > 0.0)) fail("clip must be positive");
  if (threads < 1) fail("threads must be at least 1");
  if (!(negative_power >= 0.0 && negative_power <= 1.0)) fail("negative power must lie in [0, 1]");
  if (!(init_sigma >= 0.0)) fail("init sigma must be non-negative");
}

VocabularyOptions TrainConfig::vocabulary_options() const {
  return {min_count, subsample, negative_power};
}

EventOptions TrainConfig::event_options() const { return {window, negatives, dynamic_window}; }

// ---------------------------------------------------------------------------
// Parameters

Parameters::Parameters(Geometry geometry, std::size_t vocab_size, int dim, bool tied)
    : alpha_(geometry, tied ? Layer::tied : Layer::alpha, vocab_size,
             static_cast<std::size_t>(dim) + (geometry == Geometry::hyperbolic ? 1 : 0)) {
  if (dim < 1) throw std::invalid_argument("dim must be at least 1");
  if (!tied) beta_.emplace(geometry, Layer::beta, vocab_size, alpha_.width());
}

void Parameters::initialize(std::uint64_t seed, double sigma) {
  std::mt19937_64 rng(seed);
  if (geometry() == Geometry::hyperbolic) {
    for (std::size_t i = 0; i < alpha_.rows(); ++i) gi::sample_near_base(alpha_.row(i), sigma, rng);
    if (beta_) {
      for (std::size_t i = 0; i < beta_->rows(); ++i) gi::sample_near_base(beta_->row(i), sigma, rng);
    }
    return;
  }
  const double bound = 1.0 / static_cast<double>(alpha_.dim());
  std::uniform_real_distribution<double> unit(-bound, bound);
  for (double& x : alpha_.data()) x = unit(rng);
  if (beta_) std::fill(beta_->data().begin(), beta_->data().end(), 0.0);
}

// ---------------------------------------------------------------------------
// Objective

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double positive_probability(double score, double theta, int label) noexcept {
  const double x = score + theta;
  return sigmoid(label == 1 ? x : -x);
}

double score(Geometry g, std::span<const double> a, std::span<const double> b) noexcept {
  return g == Geometry::hyperbolic ? gi::dot(a, b) : euclid_dot(a, b);
}

double event_log_likelihood(const TrainingEvent& event, const EmbeddingMatrix& alpha,
                            const EmbeddingMatrix& beta, double theta) {
  check_event(event, alpha, beta);
  const auto a = alpha.row(static_cast<std::size_t>(event.centre));
  double ll = 0.0;
  for_each_word(event, [&](WordId w, int y) {
    const double x = score(alpha.geometry(), a, beta.row(static_cast<std::size_t>(w))) + theta;
    ll += log_sigmoid(y == 1 ? x : -x);
  });
  return ll;
}

geometry::MinkowskiVector gradient_centre(const TrainingEvent& event, const EmbeddingMatrix& alpha,
                                          const EmbeddingMatrix& beta, double theta) {
  check_event(event, alpha, beta);
  const Geometry g = alpha.geometry();
  const auto a = alpha.row(static_cast<std::size_t>(event.centre));
  std::vector<double> partials(alpha.width(), 0.0);
  for_each_word(event, [&](WordId w, int y) {
    const auto b = beta.row(static_cast<std::size_t>(w));
    add_partial(g, y - sigmoid(score(g, a, b) + theta), b, partials);
  });
  return finish_gradient(g, std::move(partials));
}

geometry::MinkowskiVector gradient_context(const TrainingEvent& event, WordId w,
                                           const EmbeddingMatrix& alpha,
                                           const EmbeddingMatrix& beta, double theta) {
  check_event(event, alpha, beta);
  const Geometry g = alpha.geometry();
  const auto a = alpha.row(static_cast<std::size_t>(event.centre));
  std::vector<double> partials(alpha.width(), 0.0);
  bool found = false;
  for_each_word(event, [&](WordId v, int y) {
    if (v != w) return;
    found = true;
    add_partial(g, y - sigmoid(score(g, a, beta.row(static_cast<std::size_t>(w))) + theta), a,
                partials);
  });
  if (!found) {
    throw std::invalid_argument("word " + std::to_string(w) + " does not occur in the event");
  }
  return finish_gradient(g, std::move(partials));
}

geometry::HyperboloidPoint riemannian_sgd_step(const geometry::HyperboloidPoint& row,
                                               const geometry::MinkowskiVector& ambient_grad,
                                               double lr, double clip) {
  if (row.size() != ambient_grad.size()) {
    throw std::invalid_argument("riemannian_sgd_step: dimension mismatch");
  }
  std::vector<double> x(row.coords().begin(), row.coords().end());
  std::vector<double> g(ambient_grad.coords().begin(), ambient_grad.coords().end());
  riemannian_sgd_step(x, g, lr, clip);
  return geometry::HyperboloidPoint(
      geometry::MinkowskiVector(std::move(x), geometry::detail::unchecked),
      geometry::detail::unchecked);
}

double riemannian_sgd_step(std::span<double> row, std::span<double> grad, double lr, double clip) {
  gi::project_to_tangent(row, grad);
  const double norm2 = gi::dot(grad, grad);
  if (!std::isfinite(norm2)) throw NumericalError("gradient is not finite");
  const double norm = std::sqrt(std::max(0.0, norm2));
  const double step = lr * norm;
  if (!std::isfinite(step)) throw NumericalError("gradient step is not finite");
  if (step < geometry::kExpCutoff) return 0.0;
  const double length = std::min(step, clip);
  const double scale = length / norm;
  for (double& x : grad) x *= scale;
  gi::exp_map(row, grad, length);
  return length;
}

void euclidean_sgns_step(const TrainingEvent& event, EmbeddingMatrix& alpha, EmbeddingMatrix& beta,
                         double lr) {
  check_event(event, alpha, beta);
  if (alpha.geometry() != Geometry::euclidean) {
    throw std::invalid_argument("euclidean_sgns_step needs Euclidean layers");
  }
  const Layout layout{alpha.rows(), &alpha == &beta};
  struct {
    std::vector<std::uint32_t> keys;
    std::vector<std::size_t> word_slot;
    std::size_t centre_slot = 0;
    std::vector<double> grads;
    std::uint32_t failed_key = 0;
  } s;
  prepare_keys(layout, event.centre, event.positive, event.negatives, s);
  accumulate(Geometry::euclidean, alpha, beta, 0.0, event.centre, event.positive, event.negatives,
             s);
  apply_slots(Geometry::euclidean, layout, alpha, beta, lr, 0.0, s,
              [](const EmbeddingMatrix&, std::size_t) {});
}

double learning_rate(double progress, double lr0) noexcept {
  const double p = std::clamp(progress, 0.0, 1.0);
  return lr0 * std::max(1.0 - p, 1e-4);
}

// ---------------------------------------------------------------------------
// RowLocks

RowLocks::RowLocks(std::size_t n) : n_(n), flags_(std::make_unique<std::atomic<bool>[]>(n)) {
  for (std::size_t i = 0; i < n; ++i) flags_[i].store(false, std::memory_order_relaxed);
}

bool RowLocks::try_lock_all(std::span<const std::uint32_t> keys) noexcept {
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (flags_[keys[i]].exchange(true, std::memory_order_acquire)) {
      for (std::size_t j = 0; j < i; ++j) flags_[keys[j]].store(false, std::memory_order_release);
      return false;
    }
  }
  return true;
}

void RowLocks::unlock_all(std::span<const std::uint32_t> keys) noexcept {
  for (std::uint32_t k : keys) flags_[k].store(false, std::memory_order_release);
}

bool RowLocks::is_locked(std::uint32_t key) const noexcept {
  return flags_[key].load(std::memory_order_acquire);
}

// ---------------------------------------------------------------------------
// Trainer

struct alignas(64) Trainer::WorkerStats {
  std::atomic<std::int64_t> applied{0};
  std::atomic<std::int64_t> skipped{0};
  std::atomic<double> loss{0.0};
  std::atomic<double> lr{0.0};
};

Trainer::Trainer(const Vocabulary& vocab, const Corpus& corpus, TrainConfig config,
                 std::ostream* log)
    : vocab_(vocab),
      corpus_(corpus),
      config_(config),
      log_(log),
      params_((config.validate(), config.mode), vocab.size(), config.dim, config.tied),
      locks_(config.tied ? vocab.size() : 2 * vocab.size()),
      direct_scratch_(std::make_unique<Scratch>()) {
  params_.initialize(config_.seed, config_.init_sigma);
}

Trainer::~Trainer() = default;

bool Trainer::apply_event(const TrainingEvent& event, double lr, double* log_likelihood) {
  check_event(event, params_.alpha(), params_.beta());
  return apply_event_impl(event.centre, event.positive, event.negatives, lr, *direct_scratch_,
                          log_likelihood);
}

bool Trainer::apply_event_impl(WordId centre, WordId positive, std::span<const WordId> negatives,
                               double lr, Scratch& s, double* log_likelihood) {
  const Layout layout{vocab_.size(), params_.tied()};
  prepare_keys(layout, centre, positive, negatives, s);
  if (!locks_.try_lock_all(s.keys)) return false;

  const Geometry g = config_.mode;
  const double ll = accumulate(g, params_.alpha(), params_.beta(), config_.effective_theta(),
                               centre, positive, negatives, s);
  if (log_likelihood) *log_likelihood = ll;
  try {
    apply_slots(g, layout, params_.alpha(), params_.beta(), lr, config_.clip, s,
                [&](const EmbeddingMatrix& m, std::size_t row) {
                  if (on_row_updated) on_row_updated(m, row);
                });
  } catch (const NumericalError& e) {
    locks_.unlock_all(s.keys);
    const bool is_beta = !layout.tied && s.failed_key >= layout.vocab;
    const auto row = static_cast<WordId>(is_beta ? s.failed_key - layout.vocab : s.failed_key);
    throw NumericalError(std::string(is_beta ? "context" : "centre") + " embedding of word '" +
                         vocab_.word(row) + "' diverged: " + e.what());
  }
  locks_.unlock_all(s.keys);
  return true;
}

void Trainer::worker(std::size_t id, std::size_t first_line, std::size_t last_line) {
  WorkerStats& st = *stats_[id];
  Scratch s;
  std::mt19937_64 rng(config_.seed * 0x9E3779B97F4A7C15ULL + id + 1);
  const EventOptions options = config_.event_options();
  const NegativeSampler& sampler = vocab_.negatives();
  constexpr std::size_t kRefresh = 256;

  std::int64_t applied = 0;
  std::int64_t skipped = 0;
  double loss = 0.0;
  double lr = config_.lr;
  const auto publish = [&] {
    st.applied.store(applied, std::memory_order_relaxed);
    st.skipped.store(skipped, std::memory_order_relaxed);
    st.loss.store(loss, std::memory_order_relaxed);
    st.lr.store(lr, std::memory_order_relaxed);
  };

  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    for (std::size_t line = first_line; line < last_line; ++line) {
      if (abort_.load(std::memory_order_relaxed)) return;
      const auto raw = corpus_.line(line);
      s.kept.clear();
      subsample_line(raw, vocab_, rng, s.kept);
      const auto raw_size = static_cast<std::int64_t>(raw.size());
      const auto kept_size = static_cast<std::int64_t>(s.kept.size());
      std::int64_t advanced = 0;
      lr = learning_rate(progress_->progress(), config_.lr);

      for_each_event(
          std::span<const WordId>(s.kept), options, sampler, rng, s.negatives,
          [&](WordId c, WordId p, std::span<const WordId> negs) {
            double ll = 0.0;
            if (apply_event_impl(c, p, negs, lr, s, &ll)) {
              ++applied;
              loss -= ll;
            } else {
              ++skipped;
            }
          },
          [&](std::size_t i) {
            if (i == 0 || i % kRefresh != 0) return;
            // Credit raw tokens in proportion to the centre positions done.
            const std::int64_t target = raw_size * static_cast<std::int64_t>(i) / kept_size;
            progress_->advance(target - advanced);
            advanced = target;
            lr = learning_rate(progress_->progress(), config_.lr);
            publish();
          });
      progress_->advance(raw_size - advanced);
      publish();
    }
  }
}

TrainStats Trainer::train() {
  const auto threads = static_cast<std::size_t>(config_.threads);
  progress_ = std::make_unique<ProgressCounter>(static_cast<std::int64_t>(corpus_.tokens()) *
                                                config_.epochs);
  stats_.clear();
  for (std::size_t i = 0; i < threads; ++i) stats_.push_back(std::make_unique<WorkerStats>());
  abort_.store(false);

  const auto shards = corpus_.shards(threads);
  std::mutex mu;
  std::condition_variable cv;
  std::size_t finished = 0;
  std::exception_ptr error;

  const auto start = std::chrono::steady_clock::now();
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t i = 0; i < threads; ++i) {
    pool.emplace_back([&, i] {
      try {
        worker(i, shards[i].first, shards[i].second);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        abort_.store(true);
      }
      std::lock_guard lock(mu);
      ++finished;
      cv.notify_all();
    });
  }

  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  const auto totals = [&] {
    TrainStats t;
    double loss = 0.0;
    for (const auto& st : stats_) {
      t.events_applied += st->applied.load(std::memory_order_relaxed);
      t.events_skipped += st->skipped.load(std::memory_order_relaxed);
      loss += st->loss.load(std::memory_order_relaxed);
    }
    t.tokens_processed = progress_->processed();
    t.seconds = elapsed();
    t.tokens_per_second = t.seconds > 0.0 ? static_cast<double>(t.tokens_processed) / t.seconds : 0.0;
    t.mean_loss = t.events_applied > 0 ? loss / static_cast<double>(t.events_applied) : 0.0;
    const auto events = t.events_applied + t.events_skipped;
    t.skip_rate = events > 0 ? static_cast<double>(t.events_skipped) / static_cast<double>(events) : 0.0;
    t.final_lr = stats_.front()->lr.load(std::memory_order_relaxed);
    return t;
  };
  const auto report = [&](const TrainStats& t, bool last) {
    if (!log_) return;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "\rProgress: %5.1f%%  tokens/sec: %9.0f  lr: %.6f  loss: %.5f  skipped: %.3f%%",
                  100.0 * progress_->progress(), t.tokens_per_second, t.final_lr, t.mean_loss,
                  100.0 * t.skip_rate);
    *log_ << buf << (last ? "\n" : "") << std::flush;
  };

  {
    std::unique_lock lock(mu);
    while (finished < threads) {
      cv.wait_for(lock, std::chrono::seconds(1), [&] { return finished == threads; });
      if (finished < threads) {
        lock.unlock();
        report(totals(), false);
        lock.lock();
      }
    }
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  TrainStats result = totals();
  report(result, true);
  return result;
}

EmbeddingModel Trainer::model(std::string config_echo) const {
  std::vector<std::string> words;
  words.reserve(vocab_.size());
  for (const auto& e : vocab_.entries()) words.push_back(e.word);
  return EmbeddingModel(std::move(words), params_.alpha(), config_.effective_theta(),
                        params_.tied(), std::move(config_echo));
}

}  // namespace hsgns
