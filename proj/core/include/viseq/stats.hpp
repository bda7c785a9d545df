#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "viseq/game.hpp"

namespace viseq {

// Numerically stable 1/(1+exp(-x)); exact 0/1 in the far tails.
double logistic(double x);
// Inverse of logistic; p must lie strictly inside (0, 1).
double logit(double p);

struct BinomialSpec {
  int n = 30;
  double p = 0.5;
};

// Exact mass/cumulative values computed in log space; cdf(n) == 1 exactly.
double binom_pmf(int k, const BinomialSpec& spec);
double binom_cdf(int k, const BinomialSpec& spec);

// With K ~ Binomial(n, p_hat) counting agents at A, the probability that the
// chosen location's payoff at proportion K/n strictly exceeds the other's;
// ties contribute one half.
double ground_truth_prob(const CongestionGame& game, Location chosen, double p_hat, int n);

struct BootstrapConfig {
  int group_size = 30;
  int replications = 1000;
  double coverage = 0.95;
  std::uint64_t seed = 0;
};

struct BootstrapSummary {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// Percentile interval over resample means; resamples have cfg.group_size
// elements drawn with replacement regardless of the input length.
// Deterministic given cfg.seed.
BootstrapSummary bootstrap_proportion(const std::vector<int>& choices, const BootstrapConfig& cfg);

// The cfg.replications resample means behind bootstrap_proportion, in
// replication order.
std::vector<double> bootstrap_replicates(const std::vector<int>& choices,
                                         const BootstrapConfig& cfg);

// Linear-interpolation sample quantile (the common "type 7" rule).
double quantile(std::vector<double> values, double q);

class DesignMatrix {
 public:
  explicit DesignMatrix(std::vector<std::string> column_names);

  void add_row(const std::vector<double>& row);
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return names_.size(); }
  double at(std::size_t r, std::size_t c) const { return values_[r * names_.size() + c]; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;  // row-major
  std::size_t rows_ = 0;
};

struct RegressionFit {
  std::vector<std::string> names;
  std::vector<double> coefficients;
  std::vector<double> standard_errors;
  std::vector<std::string> dropped;  // zero-variance columns removed before fitting
  bool converged = true;
  int iterations = 0;
  std::size_t n_obs = 0;

  bool has(const std::string& name) const;
  double coefficient(const std::string& name) const;
  double standard_error(const std::string& name) const;
  std::string to_json() const;
};

// Least squares via the normal equations with partial pivoting; standard
// errors from the residual variance.
RegressionFit ols_fit(const DesignMatrix& design, const std::vector<double>& response);

// Maximum-likelihood logistic coefficients via iteratively reweighted least
// squares; stops when the score's max component is <= tol.
RegressionFit logistic_fit(const DesignMatrix& design, const std::vector<int>& response,
                           int max_iter = 100, double tol = 1e-8);

}  // namespace viseq
