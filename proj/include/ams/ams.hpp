#pragma once

// Adaptive Multilevel Splitting with exact conditional resampling.
//
// n particles are drawn from L(X | X > x). At each iteration the k lowest
// are killed and redrawn from L(X | X > Z), Z being the k-th order statistic
// of the current sample. The run stops as soon as that order statistic
// reaches the target a, and returns C (1 - k/n)^J with C the fraction of
// particles at or above a.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ams/errors.hpp"
#include "ams/models.hpp"
#include "ams/rng.hpp"

namespace ams {

struct AmsConfig {
  int n = 100;
  int k = 1;
  double x = 0.0;
  double a = 1.0;
  /// Safety cap on J. Zero selects default_max_iterations().
  std::int64_t max_iterations = 0;

  void validate() const {
    if (n < 2) throw input_error("n must be >= 2");
    if (k < 1 || k > n - 1) throw input_error("k must satisfy 1 <= k <= n-1");
    if (!(a > 0.0)) throw input_error("a must be > 0");
    if (!(x >= 0.0 && x <= a)) throw input_error("x must satisfy 0 <= x <= a");
    if (max_iterations < 0) throw input_error("max_iterations must be > 0 (or 0 for default)");
  }
};

/// 100 ceil(n L + 10 sqrt(n L) + n) with L = Lambda(a) - Lambda(x). The
/// Poisson/drift scale of J is n L / k, so the cap is never hit by a
/// correct run.
inline std::int64_t default_max_iterations(int n, double lambda_span) {
  const double nl = n * std::max(lambda_span, 0.0);
  return 100 * static_cast<std::int64_t>(std::ceil(nl + 10.0 * std::sqrt(nl) + n));
}

struct Particle {
  double level;
  int index;

  friend bool operator<(const Particle& l, const Particle& r) {
    return l.level < r.level || (l.level == r.level && l.index < r.index);
  }
  friend bool operator==(const Particle&, const Particle&) = default;
};

struct AmsState {
  std::vector<Particle> particles;  // sorted by (level, index)
  double current_level = 0.0;       // Z^j
  std::int64_t iteration = 0;       // j
  UniformStream rng{0, 0};
};

struct AmsResult {
  int n = 0;
  int k = 0;
  std::int64_t j_count = 0;
  int survivors = 0;  // particles >= a at termination
  double estimate = 0.0;
  std::vector<double> level_trace;  // Z^0 .. Z^{J+1}
  std::int64_t samples_drawn = 0;

  double corrector() const { return static_cast<double>(survivors) / n; }
};

struct TransformedView {
  std::vector<double> y_particles;
  double s_level = 0.0;
};

/// C (1 - k/n)^J, with the power taken in log space.
inline double estimate(std::int64_t j_count, double corrector, int n, int k) {
  return corrector * std::exp(static_cast<double>(j_count) *
                              std::log1p(-static_cast<double>(k) / n));
}

/// Step-by-step AMS driver. run_ams() loops it to termination; tests use it
/// to observe intermediate states.
template <RandomModel M>
class AmsSampler {
public:
  AmsSampler(const M& model, const AmsConfig& config, UniformStream stream,
             bool record_trace = true)
      : model_(model), config_(config), record_trace_(record_trace) {
    config_.validate();
    if (!(model_.survival(config_.x) > 0.0)) {
      throw degenerate_conditioning("AMS: start level has cdf(x) = 1");
    }
    const double span = lambda_at_least(model_, config_.a) - model_.lambda(config_.x);
    if (config_.max_iterations == 0) {
      if (!std::isfinite(span)) throw input_error("AMS: target has zero probability from x");
      max_iterations_ = default_max_iterations(config_.n, span);
    } else {
      max_iterations_ = config_.max_iterations;
    }

    state_.rng = stream;
    state_.current_level = config_.x;
    state_.particles.reserve(config_.n);
    for (int i = 0; i < config_.n; ++i) {
      state_.particles.push_back({model_.draw_above(config_.x, state_.rng), i});
    }
    std::sort(state_.particles.begin(), state_.particles.end());
    if (record_trace_) {
      trace_.push_back(config_.x);
      trace_.push_back(next_level());
    }
    killed_.resize(config_.k);
  }

  const AmsState& state() const { return state_; }
  const AmsConfig& config() const { return config_; }
  std::int64_t max_iterations() const { return max_iterations_; }

  /// k-th order statistic of the current sample, i.e. Z^{j+1}.
  double next_level() const { return state_.particles[config_.k - 1].level; }

  bool done() const { return next_level() >= config_.a; }

  /// One kill/resample round, regardless of the stopping rule.
  void step() {
    if (state_.iteration >= max_iterations_) throw runaway_error(max_iterations_);
    const int k = config_.k;
    const double z = next_level();
    std::copy_n(state_.particles.begin(), k, killed_.begin());
    state_.particles.erase(state_.particles.begin(), state_.particles.begin() + k);
    for (int l = 0; l < k; ++l) {
      const Particle fresh{model_.draw_above(z, state_.rng), killed_[l].index};
      state_.particles.insert(
          std::upper_bound(state_.particles.begin(), state_.particles.end(), fresh), fresh);
    }
    state_.current_level = z;
    ++state_.iteration;
    if (record_trace_) trace_.push_back(next_level());
  }

  void run() {
    while (!done()) step();
  }

  AmsResult result() const {
    AmsResult r;
    r.n = config_.n;
    r.k = config_.k;
    r.j_count = state_.iteration;
    const auto below = std::lower_bound(
        state_.particles.begin(), state_.particles.end(), config_.a,
        [](const Particle& p, double level) { return p.level < level; });
    r.survivors = static_cast<int>(state_.particles.end() - below);
    r.estimate = estimate(r.j_count, r.corrector(), r.n, r.k);
    r.level_trace = trace_;
    r.samples_drawn = config_.n + static_cast<std::int64_t>(config_.k) * r.j_count;
    return r;
  }

private:
  const M& model_;
  AmsConfig config_;
  bool record_trace_;
  std::int64_t max_iterations_ = 0;
  AmsState state_;
  std::vector<double> trace_;
  std::vector<Particle> killed_;
};

/// One full AMS run on substream `stream` of `seed`.
template <RandomModel M>
AmsResult run_ams(const M& model, const AmsConfig& config, std::uint64_t seed,
                  std::uint64_t stream = 0, bool record_trace = true) {
  AmsSampler<M> sampler(model, config, UniformStream(seed, stream), record_trace);
  sampler.run();
  return sampler.result();
}

/// Fraction of m_samples unconditional draws with X >= a.
template <RandomModel M>
double run_direct_mc(const M& model, double a, std::int64_t m_samples, std::uint64_t seed,
                     std::uint64_t stream = 0) {
  if (m_samples < 1) throw input_error("run_direct_mc: m_samples must be >= 1");
  UniformStream s(seed, stream);
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < m_samples; ++i) {
    if (model.quantile(s.next()) >= a) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(m_samples);
}

/// Y_i = Lambda(X_i), S = Lambda(Z), in the particle order of the state.
template <RandomModel M>
TransformedView transformed_view(const AmsState& state, const M& model) {
  TransformedView v;
  auto checked = [&](double level) {
    const double y = model.lambda(level);
    if (std::isinf(y)) throw infinite_value_error("transformed_view: level beyond essential sup");
    return y;
  };
  v.y_particles.reserve(state.particles.size());
  for (const auto& p : state.particles) v.y_particles.push_back(checked(p.level));
  v.s_level = checked(state.current_level);
  return v;
}

}  // namespace ams
