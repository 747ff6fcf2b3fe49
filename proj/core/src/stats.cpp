#include "occlab/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace occlab::stats {

void Accumulator::add(double x) {
  ++n_;
  double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

void Accumulator::merge(const Accumulator& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  double n = static_cast<double>(n_ + o.n_);
  double d = o.mean_ - mean_;
  mean_ += d * static_cast<double>(o.n_) / n;
  m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
  n_ += o.n_;
}

double Accumulator::variance() const {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}
double Accumulator::sd() const { return std::sqrt(variance()); }
double Accumulator::se() const {
  return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

double mean(const std::vector<double>& v) {
  Accumulator a;
  for (double x : v) a.add(x);
  return a.mean();
}

double sample_sd(const std::vector<double>& v) {
  Accumulator a;
  for (double x : v) a.add(x);
  return a.sd();
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

namespace {
double ks_p(double dstat, double n_eff) {
  double sq = std::sqrt(n_eff);
  return kolmogorov_survival((sq + 0.12 + 0.11 / sq) * dstat);
}
}  // namespace

TestResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return {d, ks_p(d, n)};
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return {d, ks_p(d, na * nb / (na + nb))};
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

TestResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw std::invalid_argument("spearman needs >= 3 pairs");
  auto rx = ranks(x), ry = ranks(y);
  double mx = mean(rx), my = mean(ry), sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  double rho = (sxx > 0 && syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;
  double n = static_cast<double>(x.size());
  double p;
  if (std::abs(rho) >= 1.0) {
    p = 0.0;
  } else {
    double t = rho * std::sqrt((n - 2) / (1 - rho * rho));
    boost::math::students_t dist(n - 2);
    p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  }
  return {rho, p};
}

double student_t_quantile(double prob, double dof) {
  boost::math::students_t dist(dof);
  return boost::math::quantile(dist, prob);
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& w) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("linear_fit needs >= 2 points");
  std::vector<double> wt = w.empty() ? std::vector<double>(n, 1.0) : w;
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) sw += wt[i], sx += wt[i] * x[i], sy += wt[i] * y[i];
  double mx = sx / sw, my = sy / sw, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += wt[i] * (x[i] - mx) * (x[i] - mx);
    sxy += wt[i] * (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0) throw std::invalid_argument("degenerate abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = y[i] - f.intercept - f.slope * x[i];
      rss += wt[i] * r * r;
    }
    double dof = static_cast<double>(n - 2);
    // With inverse-variance weights the residual scale is known to be ~1;
    // take the larger of model-based and residual-based errors.
    double s2 = rss / dof;
    if (!w.empty()) s2 = std::max(s2, 1.0);
    f.slope_se = std::sqrt(s2 / sxx);
    f.slope_ci = student_t_quantile(0.975, dof) * f.slope_se;
  } else if (!w.empty()) {
    f.slope_se = std::sqrt(1.0 / sxx);
    f.slope_ci = 1.96 * f.slope_se;
  }
  return f;
}

LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& y_se) {
  std::vector<double> lx, ly, w;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw std::invalid_argument("log-log fit needs positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
    if (!y_se.empty()) {
      double rel = y_se[i] / y[i];
      w.push_back(rel > 0 ? 1.0 / (rel * rel) : 1e12);
    }
  }
  return linear_fit(lx, ly, w);
}

}  // namespace occlab::stats
