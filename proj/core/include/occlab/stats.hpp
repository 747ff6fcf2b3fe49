#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace occlab::stats {

// Streaming mean/variance (Welford).
class Accumulator {
public:
  void add(double x);
  void merge(const Accumulator& o);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  // Unbiased sample variance.
  double variance() const;
  double sd() const;
  // Standard error of the mean.
  double se() const;

private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

double mean(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Asymptotic Kolmogorov survival function P(K > lambda).
double kolmogorov_survival(double lambda);
TestResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Average ranks (ties share the mean rank), 1-based.
std::vector<double> ranks(const std::vector<double>& v);
// Spearman correlation with a two-sided p-value (t approximation).
TestResult spearman(const std::vector<double>& x, const std::vector<double>& y);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  // Half-width of the 95% confidence interval for the slope.
  double slope_ci = 0.0;
};

// Ordinary least squares; optional weights are inverse variances.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& w = {});
LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& y_se = {});

double student_t_quantile(double prob, double dof);

}  // namespace occlab::stats
