#include "viseq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "viseq/errors.hpp"
#include "viseq/rng.hpp"

namespace viseq {

double logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidProportion("logit argument must lie strictly inside (0, 1)");
  }
  return std::log(p) - std::log1p(-p);
}

namespace {

void check_spec(const BinomialSpec& spec) {
  if (spec.n < 1) {
    throw KOutOfRange("binomial trial count must be >= 1");
  }
  if (!(spec.p >= 0.0 && spec.p <= 1.0)) {
    throw InvalidProportion("binomial p must lie in [0, 1]");
  }
}

double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

double binom_pmf(int k, const BinomialSpec& spec) {
  check_spec(spec);
  if (k < 0 || k > spec.n) {
    throw KOutOfRange("binomial k must lie in [0, n]");
  }
  if (spec.p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (spec.p == 1.0) return k == spec.n ? 1.0 : 0.0;
  const double log_mass =
      log_choose(spec.n, k) + k * std::log(spec.p) + (spec.n - k) * std::log1p(-spec.p);
  return std::exp(log_mass);
}

double binom_cdf(int k, const BinomialSpec& spec) {
  check_spec(spec);
  if (k < 0 || k > spec.n) {
    throw KOutOfRange("binomial k must lie in [0, n]");
  }
  if (k == spec.n) return 1.0;
  double total = 0.0;
  for (int j = 0; j <= k; ++j) {
    total += binom_pmf(j, spec);
  }
  return std::min(total, 1.0);
}

double ground_truth_prob(const CongestionGame& game, Location chosen, double p_hat, int n) {
  require_proportion(p_hat, "p_hat");
  if (n < 1) {
    throw KOutOfRange("group size must be >= 1");
  }
  const BinomialSpec spec{n, p_hat};
  double total = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double diff = game.payoff_difference(static_cast<double>(k) / n);
    double win;
    if (diff == 0.0) {
      win = 0.5;
    } else if (chosen == Location::A) {
      win = diff > 0.0 ? 1.0 : 0.0;
    } else {
      win = diff < 0.0 ? 1.0 : 0.0;
    }
    if (win != 0.0) {
      total += win * binom_pmf(k, spec);
    }
  }
  return std::min(total, 1.0);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) {
    throw EmptyInput("quantile of empty sample");
  }
  q = std::clamp(q, 0.0, 1.0);
  std::sort(values.begin(), values.end());
  const double h = (values.size() - 1) * q;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) {
    return values.back();
  }
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::vector<double> bootstrap_replicates(const std::vector<int>& choices,
                                         const BootstrapConfig& cfg) {
  if (choices.empty()) {
    throw EmptyInput("bootstrap over an empty choice list");
  }
  if (cfg.group_size < 1 || cfg.replications < 1) {
    throw std::invalid_argument("bootstrap group_size and replications must be >= 1");
  }
  if (!(cfg.coverage > 0.0 && cfg.coverage < 1.0)) {
    throw std::invalid_argument("bootstrap coverage must lie in (0, 1)");
  }
  for (int c : choices) {
    if (c != 0 && c != 1) {
      throw std::invalid_argument("bootstrap choices must be 0/1");
    }
  }
  RngStream base(cfg.seed);
  std::vector<double> stats(static_cast<std::size_t>(cfg.replications));
  for (int r = 0; r < cfg.replications; ++r) {
    RngStream stream = base.split(static_cast<std::uint64_t>(r));
    int hits = 0;
    for (int i = 0; i < cfg.group_size; ++i) {
      hits += choices[stream.uniform_index(choices.size())];
    }
    stats[static_cast<std::size_t>(r)] = static_cast<double>(hits) / cfg.group_size;
  }
  return stats;
}

BootstrapSummary bootstrap_proportion(const std::vector<int>& choices, const BootstrapConfig& cfg) {
  const std::vector<double> stats = bootstrap_replicates(choices, cfg);
  double sum = 0.0;
  for (int c : choices) sum += c;
  const double alpha = (1.0 - cfg.coverage) / 2.0;
  BootstrapSummary out;
  out.estimate = sum / static_cast<double>(choices.size());
  out.lower = quantile(stats, alpha);
  out.upper = quantile(stats, 1.0 - alpha);
  return out;
}

DesignMatrix::DesignMatrix(std::vector<std::string> column_names) : names_(std::move(column_names)) {
  if (names_.empty()) {
    throw std::invalid_argument("design matrix needs at least one column");
  }
}

void DesignMatrix::add_row(const std::vector<double>& row) {
  if (row.size() != names_.size()) {
    throw std::invalid_argument("design row width does not match column count");
  }
  for (double v : row) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("design entries must be finite");
    }
  }
  values_.insert(values_.end(), row.begin(), row.end());
  ++rows_;
}

bool RegressionFit::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

double RegressionFit::coefficient(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return coefficients[i];
  }
  throw std::out_of_range("no coefficient named '" + name + "'");
}

double RegressionFit::standard_error(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return standard_errors[i];
  }
  throw std::out_of_range("no coefficient named '" + name + "'");
}

std::string RegressionFit::to_json() const {
  nlohmann::json j;
  for (std::size_t i = 0; i < names.size(); ++i) {
    j["coef"][names[i]] = coefficients[i];
    j["se"][names[i]] = standard_errors[i];
  }
  j["dropped"] = dropped;
  j["converged"] = converged;
  j["iterations"] = iterations;
  j["n"] = n_obs;
  return j.dump();
}

namespace {

struct PrunedDesign {
  std::vector<std::string> names;
  std::vector<std::string> dropped;
  std::vector<double> values;  // row-major over kept columns
  std::size_t rows = 0;
  std::size_t cols = 0;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// Removes zero-variance columns beyond the first constant one (the intercept
// role), so partial datasets with a one-level dummy remain fittable.
PrunedDesign prune_constant_columns(const DesignMatrix& design) {
  const std::size_t rows = design.rows();
  const std::size_t cols = design.cols();
  std::vector<bool> keep(cols, true);
  PrunedDesign out;
  bool saw_constant = false;
  for (std::size_t c = 0; c < cols; ++c) {
    double lo = design.at(0, c), hi = lo;
    for (std::size_t r = 1; r < rows; ++r) {
      lo = std::min(lo, design.at(r, c));
      hi = std::max(hi, design.at(r, c));
    }
    if (lo == hi) {
      if (saw_constant) {
        keep[c] = false;
        out.dropped.push_back(design.names()[c]);
      }
      saw_constant = true;
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (keep[c]) out.names.push_back(design.names()[c]);
  }
  out.rows = rows;
  out.cols = out.names.size();
  out.values.reserve(rows * out.cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (keep[c]) out.values.push_back(design.at(r, c));
    }
  }
  return out;
}

// Gauss-Jordan inverse with partial pivoting; matrix is p x p row-major.
std::vector<double> invert(std::vector<double> m, std::size_t p) {
  double scale = 0.0;
  for (double v : m) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) {
    throw RankDeficient("all-zero normal matrix");
  }
  std::vector<double> inv(p * p, 0.0);
  for (std::size_t i = 0; i < p; ++i) inv[i * p + i] = 1.0;
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::abs(m[r * p + col]) > std::abs(m[pivot * p + col])) pivot = r;
    }
    if (std::abs(m[pivot * p + col]) <= scale * 1e-10) {
      throw RankDeficient("design has linearly dependent columns");
    }
    if (pivot != col) {
      for (std::size_t c = 0; c < p; ++c) {
        std::swap(m[pivot * p + c], m[col * p + c]);
        std::swap(inv[pivot * p + c], inv[col * p + c]);
      }
    }
    const double d = m[col * p + col];
    for (std::size_t c = 0; c < p; ++c) {
      m[col * p + c] /= d;
      inv[col * p + c] /= d;
    }
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const double f = m[r * p + col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < p; ++c) {
        m[r * p + c] -= f * m[col * p + c];
        inv[r * p + c] -= f * inv[col * p + c];
      }
    }
  }
  return inv;
}

std::vector<double> mat_vec(const std::vector<double>& m, const std::vector<double>& v,
                            std::size_t p) {
  std::vector<double> out(p, 0.0);
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = 0; c < p; ++c) {
      out[r] += m[r * p + c] * v[c];
    }
  }
  return out;
}

}  // namespace

RegressionFit ols_fit(const DesignMatrix& design, const std::vector<double>& response) {
  if (design.rows() == 0) {
    throw EmptyInput("regression on an empty design");
  }
  if (response.size() != design.rows()) {
    throw std::invalid_argument("response length does not match design rows");
  }
  const PrunedDesign x = prune_constant_columns(design);
  const std::size_t n = x.rows, p = x.cols;
  if (n < p) {
    throw RankDeficient("fewer rows than columns");
  }
  std::vector<double> xtx(p * p, 0.0), xty(p, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < p; ++i) {
      const double xi = x.at(r, i);
      xty[i] += xi * response[r];
      for (std::size_t j = i; j < p; ++j) {
        xtx[i * p + j] += xi * x.at(r, j);
      }
    }
  }
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      xtx[i * p + j] = xtx[j * p + i];
    }
  }
  const std::vector<double> inv = invert(xtx, p);
  const std::vector<double> beta = mat_vec(inv, xty, p);
  double rss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double fitted = 0.0;
    for (std::size_t i = 0; i < p; ++i) fitted += beta[i] * x.at(r, i);
    const double resid = response[r] - fitted;
    rss += resid * resid;
  }
  const double sigma2 = n > p ? rss / static_cast<double>(n - p) : 0.0;
  RegressionFit fit;
  fit.names = x.names;
  fit.dropped = x.dropped;
  fit.coefficients = beta;
  fit.standard_errors.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    fit.standard_errors[i] = std::sqrt(sigma2 * inv[i * p + i]);
  }
  fit.converged = true;
  fit.iterations = 1;
  fit.n_obs = n;
  return fit;
}

RegressionFit logistic_fit(const DesignMatrix& design, const std::vector<int>& response,
                           int max_iter, double tol) {
  if (design.rows() == 0) {
    throw EmptyInput("regression on an empty design");
  }
  if (response.size() != design.rows()) {
    throw std::invalid_argument("response length does not match design rows");
  }
  for (int y : response) {
    if (y != 0 && y != 1) {
      throw std::invalid_argument("logistic responses must be 0/1");
    }
  }
  const PrunedDesign x = prune_constant_columns(design);
  const std::size_t n = x.rows, p = x.cols;
  if (n < p) {
    throw RankDeficient("fewer rows than columns");
  }
  std::vector<double> beta(p, 0.0), mu(n), score(p);
  const auto fill_mu_score = [&] {
    std::fill(score.begin(), score.end(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      double eta = 0.0;
      for (std::size_t i = 0; i < p; ++i) eta += beta[i] * x.at(r, i);
      mu[r] = logistic(eta);
      const double err = response[r] - mu[r];
      for (std::size_t i = 0; i < p; ++i) score[i] += x.at(r, i) * err;
    }
  };
  const auto weighted_normal = [&] {
    std::vector<double> xtwx(p * p, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const double w = std::max(mu[r] * (1.0 - mu[r]), 1e-10);
      for (std::size_t i = 0; i < p; ++i) {
        const double wxi = w * x.at(r, i);
        for (std::size_t j = i; j < p; ++j) {
          xtwx[i * p + j] += wxi * x.at(r, j);
        }
      }
    }
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        xtwx[i * p + j] = xtwx[j * p + i];
      }
    }
    return xtwx;
  };

  // every fitted probability pinned to its response means the likelihood has
  // no finite maximiser, whether the score tolerance was reached or not
  const auto perfectly_classified = [&] {
    for (std::size_t r = 0; r < n; ++r) {
      if (std::abs(response[r] - mu[r]) > 1e-6) return false;
    }
    return true;
  };

  int updates = 0;
  bool converged = false;
  for (int iter = 0; iter < max_iter; ++iter) {
    fill_mu_score();
    double score_max = 0.0;
    for (double s : score) score_max = std::max(score_max, std::abs(s));
    if (score_max <= tol) {
      if (perfectly_classified()) {
        throw Separation("coefficients diverging; responses are separable");
      }
      converged = true;
      break;
    }
    std::vector<double> inv;
    try {
      inv = invert(weighted_normal(), p);
    } catch (const RankDeficient&) {
      double beta_max = 0.0;
      for (double b : beta) beta_max = std::max(beta_max, std::abs(b));
      if (beta_max > 10.0) {
        throw Separation("fitted probabilities collapsed to 0/1");
      }
      throw;
    }
    const std::vector<double> step = mat_vec(inv, score, p);
    for (std::size_t i = 0; i < p; ++i) beta[i] += step[i];
    ++updates;
    for (double b : beta) {
      if (std::abs(b) > 50.0) {
        throw Separation("coefficients diverging; responses are separable");
      }
    }
  }
  if (!converged) {
    fill_mu_score();
    if (perfectly_classified()) {
      throw Separation("coefficients diverging; responses are separable");
    }
    throw NotConverged("logistic fit did not reach tolerance");
  }
  const std::vector<double> inv = invert(weighted_normal(), p);
  RegressionFit fit;
  fit.names = x.names;
  fit.dropped = x.dropped;
  fit.coefficients = beta;
  fit.standard_errors.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    fit.standard_errors[i] = std::sqrt(inv[i * p + i]);
  }
  fit.converged = true;
  fit.iterations = updates;
  fit.n_obs = n;
  return fit;
}

}  // namespace viseq
