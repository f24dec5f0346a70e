#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "pseudolab/errors.hpp"

namespace pseudolab {

/// Per-class FIFO of recent high-confidence scores. A push keeps only the top
/// round(sum of scores) values of the batch (at least one when any score is
/// positive), which balances the positive/negative populations fed to EM.
class ScoreBank {
 public:
  explicit ScoreBank(std::size_t capacity = 200) : capacity_(capacity) {}

  void push(int class_id, std::span<const double> scores);

  std::vector<double> contents(int class_id) const;
  std::size_t size(int class_id) const;
  std::size_t capacity() const { return capacity_; }
  std::vector<int> classes() const;
  void clear() { queues_.clear(); }

 private:
  std::size_t capacity_;
  std::map<int, std::deque<double>> queues_;
};

struct EmConfig {
  int max_iters = 100;
  double tol = 1e-6;
  double var_floor = 1e-4;
  std::uint64_t seed = 0;  // reserved; median-split init needs no randomness
};

/// Two-component univariate mixture, components ordered so mu_n <= mu_p.
struct GmmFit {
  double w_n = 0.5, w_p = 0.5;
  double mu_n = 0.0, mu_p = 0.0;
  double var_n = 0.0, var_p = 0.0;
  int iterations = 0;
  double log_likelihood = 0.0;
  std::vector<double> ll_trace;  // per-iteration log-likelihood
};

/// EM fit with deterministic median-split initialization. Throws
/// DegenerateError when fewer than two distinct samples are given.
GmmFit em_fit(std::span<const double> samples, const EmConfig& config = {});

/// P(positive | s) under the fit; evaluated in log space so well-separated
/// components never underflow to 0/0.
double posterior_positive(const GmmFit& fit, double s);

enum class ThresholdRule { Argmax, Crossing };

struct ThresholdDecision {
  double tau = 0.0;
  enum class Source { Gmm, Fallback } source = Source::Fallback;
};

/// Picks the bank sample maximizing the positive posterior (ties resolved to
/// the smallest such score). The Crossing rule instead takes the smallest
/// sample whose posterior reaches 0.5, falling back to the argmax pick when no
/// sample does. A missing/degenerate fit or a component weight below 0.01
/// yields (fallback_tau, Fallback).
ThresholdDecision adaptive_threshold(const std::optional<GmmFit>& fit,
                                     std::span<const double> samples, double fallback_tau,
                                     ThresholdRule rule = ThresholdRule::Argmax);

/// em_fit + adaptive_threshold, mapping a degenerate fit to the fallback.
ThresholdDecision threshold_from_scores(std::span<const double> samples, const EmConfig& config,
                                        double fallback_tau,
                                        ThresholdRule rule = ThresholdRule::Argmax);

}  // namespace pseudolab
