#include "pseudolab/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pseudolab {

void ScoreBank::push(int class_id, std::span<const double> scores) {
  for (double s : scores)
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("ScoreBank: scores must lie in [0,1]");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double sum = 0.0;
  bool any_positive = false;
  for (double s : sorted) {
    sum += s;
    any_positive = any_positive || s > 0.0;
  }
  std::size_t keep = static_cast<std::size_t>(std::llround(sum));
  if (keep == 0 && any_positive) keep = 1;
  keep = std::min(keep, sorted.size());
  if (keep == 0) return;
  std::deque<double>& q = queues_[class_id];
  q.insert(q.end(), sorted.begin(), sorted.begin() + keep);
  while (q.size() > capacity_) q.pop_front();
}

std::vector<double> ScoreBank::contents(int class_id) const {
  auto it = queues_.find(class_id);
  if (it == queues_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::size_t ScoreBank::size(int class_id) const {
  auto it = queues_.find(class_id);
  return it == queues_.end() ? 0 : it->second.size();
}

std::vector<int> ScoreBank::classes() const {
  std::vector<int> out;
  out.reserve(queues_.size());
  for (const auto& [c, _] : queues_) out.push_back(c);
  return out;
}

namespace {

double log_gauss(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * M_PI * var) - d * d / (2.0 * var);
}

double population_var(std::span<const double> xs, double mean, double floor_) {
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::max(xs.empty() ? floor_ : acc / xs.size(), floor_);
}

}  // namespace

GmmFit em_fit(std::span<const double> samples, const EmConfig& config) {
  const std::size_t n = samples.size();
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  if (n < 2 || xs.front() == xs.back())
    throw DegenerateError("em_fit: need at least two distinct samples");

  // Median-split initialization: lower half seeds the negative component.
  const std::size_t m = n / 2;
  GmmFit fit;
  {
    std::span<const double> lo(xs.data(), m), hi(xs.data() + m, n - m);
    double lo_mean = 0.0, hi_mean = 0.0;
    for (double x : lo) lo_mean += x;
    for (double x : hi) hi_mean += x;
    lo_mean /= m;
    hi_mean /= n - m;
    fit.mu_n = lo_mean;
    fit.mu_p = hi_mean;
    fit.var_n = population_var(lo, lo_mean, config.var_floor);
    fit.var_p = population_var(hi, hi_mean, config.var_floor);
    fit.w_n = static_cast<double>(m) / n;
    fit.w_p = 1.0 - fit.w_n;
  }

  std::vector<double> resp_p(n);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < config.max_iters; ++iter) {
    // E step (log space) and log-likelihood under the current parameters
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ln = std::log(fit.w_n) + log_gauss(xs[i], fit.mu_n, fit.var_n);
      const double lp = std::log(fit.w_p) + log_gauss(xs[i], fit.mu_p, fit.var_p);
      const double mx = std::max(ln, lp);
      const double lse = mx + std::log(std::exp(ln - mx) + std::exp(lp - mx));
      ll += lse;
      resp_p[i] = std::exp(lp - lse);
    }
    fit.iterations = iter + 1;
    fit.log_likelihood = ll;
    fit.ll_trace.push_back(ll);

    // M step
    double nk = 0.0, mean_acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nk += resp_p[i];
      mean_acc += resp_p[i] * xs[i];
    }
    const double nn = static_cast<double>(n) - nk;
    if (nk > 1e-12 && nn > 1e-12) {
      const double mu_p = mean_acc / nk;
      double mu_n = 0.0, var_p = 0.0, var_n = 0.0;
      for (std::size_t i = 0; i < n; ++i) mu_n += (1.0 - resp_p[i]) * xs[i];
      mu_n /= nn;
      for (std::size_t i = 0; i < n; ++i) {
        var_p += resp_p[i] * (xs[i] - mu_p) * (xs[i] - mu_p);
        var_n += (1.0 - resp_p[i]) * (xs[i] - mu_n) * (xs[i] - mu_n);
      }
      fit.mu_p = mu_p;
      fit.mu_n = mu_n;
      fit.var_p = std::max(var_p / nk, config.var_floor);
      fit.var_n = std::max(var_n / nn, config.var_floor);
    }
    fit.w_p = nk / n;
    fit.w_n = 1.0 - fit.w_p;

    if (iter > 0 && ll - prev_ll < config.tol) break;
    prev_ll = ll;
  }

  if (fit.mu_n > fit.mu_p) {
    std::swap(fit.mu_n, fit.mu_p);
    std::swap(fit.var_n, fit.var_p);
    std::swap(fit.w_n, fit.w_p);
  }
  return fit;
}

double posterior_positive(const GmmFit& fit, double s) {
  const double ln = std::log(fit.w_n) + log_gauss(s, fit.mu_n, fit.var_n);
  const double lp = std::log(fit.w_p) + log_gauss(s, fit.mu_p, fit.var_p);
  const double delta = ln - lp;
  if (delta > 700.0) return 0.0;
  if (delta < -700.0) return 1.0;
  return 1.0 / (1.0 + std::exp(delta));
}

ThresholdDecision adaptive_threshold(const std::optional<GmmFit>& fit,
                                     std::span<const double> samples, double fallback_tau,
                                     ThresholdRule rule) {
  if (!fit || samples.empty() || std::min(fit->w_n, fit->w_p) < 0.01)
    return {fallback_tau, ThresholdDecision::Source::Fallback};

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  if (rule == ThresholdRule::Crossing) {
    for (double s : sorted)
      if (posterior_positive(*fit, s) >= 0.5) return {s, ThresholdDecision::Source::Gmm};
    // no sample reaches 0.5: degrade to the argmax pick below
  }

  double best_s = sorted.front();
  double best_post = -1.0;
  for (double s : sorted) {
    const double post = posterior_positive(*fit, s);
    if (post > best_post) {  // ascending scan, so ties keep the smallest score
      best_post = post;
      best_s = s;
    }
  }
  return {best_s, ThresholdDecision::Source::Gmm};
}

ThresholdDecision threshold_from_scores(std::span<const double> samples, const EmConfig& config,
                                        double fallback_tau, ThresholdRule rule) {
  try {
    const GmmFit fit = em_fit(samples, config);
    return adaptive_threshold(fit, samples, fallback_tau, rule);
  } catch (const DegenerateError&) {
    return {fallback_tau, ThresholdDecision::Source::Fallback};
  }
}

}  // namespace pseudolab
