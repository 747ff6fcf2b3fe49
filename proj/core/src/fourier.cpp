#include "occlab/fourier.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace occlab {

double ball_fourier_radial(double k, std::size_t d) {
  const double nu = 0.5 * static_cast<double>(d);
  k = std::abs(k);
  if (k < 1e-3) {
    // Gamma(nu+1) (2/k)^nu J_nu(k) = sum_m (-k^2/4)^m Gamma(nu+1) / (m! Gamma(m+nu+1)).
    double z = -0.25 * k * k, term = 1.0, s = 1.0;
    for (int m = 1; m < 6; ++m) {
      term *= z / (m * (m + nu));
      s += term;
    }
    return s;
  }
  return std::tgamma(nu + 1.0) * std::pow(2.0 / k, nu) * std::cyl_bessel_j(nu, k);
}

double ball_indicator_fourier(std::span<const double> xi, double ell, std::size_t d) {
  if (!(ell > 0)) throw std::invalid_argument("radius must be > 0");
  if (xi.size() != d) throw std::invalid_argument("dimension mismatch");
  double s = 0;
  for (double v : xi) s += v * v;
  return ball_fourier_radial(2.0 * std::numbers::pi * ell * std::sqrt(s), d);
}

double bessel_decay_constant(std::size_t d) {
  // |J_nu(x)| <= sqrt(2/(pi x)) for nu >= 1/2 gives |transform(k)| <= A k^{-e}
  // with e = nu + 1/2; together with |transform| <= 1 the ratio to
  // (1 + s)^{-e}, k = 2 pi s, peaks where A k^{-e} = 1.
  const double nu = 0.5 * static_cast<double>(d);
  const double e = nu + 0.5;
  const double A = std::tgamma(nu + 1.0) * std::pow(2.0, nu) * std::sqrt(2.0 / std::numbers::pi);
  const double s_star = std::pow(A, 1.0 / e) / (2.0 * std::numbers::pi);
  return std::pow(1.0 + s_star, e);
}

FourierTable::FourierTable(std::size_t d, int M) : d_(d), M_(M) {
  if (M < 1) throw std::invalid_argument("frequency cutoff must be >= 1");
  std::size_t n = 1;
  for (std::size_t k = 0; k < d; ++k) n *= static_cast<std::size_t>(2 * M + 1);
  values_.assign(n, {0.0, 0.0});
}

std::size_t FourierTable::index(std::span<const int> xi) const {
  if (xi.size() != d_) throw std::invalid_argument("dimension mismatch");
  std::size_t idx = 0;
  for (int v : xi) {
    if (v < -M_ || v > M_) throw std::out_of_range("frequency outside the table");
    idx = idx * static_cast<std::size_t>(2 * M_ + 1) + static_cast<std::size_t>(v + M_);
  }
  return idx;
}

std::complex<double> FourierTable::operator()(std::span<const int> xi) const {
  return values_[index(xi)];
}

std::vector<int> FourierTable::frequency(std::size_t idx) const {
  std::vector<int> xi(d_);
  const auto w = static_cast<std::size_t>(2 * M_ + 1);
  for (std::size_t k = d_; k-- > 0;) {
    xi[k] = static_cast<int>(idx % w) - M_;
    idx /= w;
  }
  return xi;
}

FourierTable fourier_coefficients(const WeightedAtoms& mu, int M) {
  if (mu.space() != Space::Torus) throw std::invalid_argument("Fourier coefficients need a torus measure");
  const std::size_t d = mu.dim();
  FourierTable t(d, M);
  const auto w = static_cast<std::size_t>(2 * M + 1);
  // Per-atom, per-axis phases e^{-2 pi i k x}, k = -M..M.
  std::vector<std::complex<double>> ph(d * w), acc;
  for (std::size_t a = 0; a < mu.size(); ++a) {
    auto x = mu.position(a);
    for (std::size_t k = 0; k < d; ++k) {
      std::complex<double> step = std::polar(1.0, -2.0 * std::numbers::pi * x[k]);
      std::complex<double> cur = std::polar(1.0, 2.0 * std::numbers::pi * M * x[k]);
      for (std::size_t j = 0; j < w; ++j) {
        ph[k * w + j] = cur;
        cur *= step;
      }
      // Reset drift from repeated multiplication at the central frequency.
      ph[k * w + static_cast<std::size_t>(M)] = 1.0;
    }
    const double m = mu.mass(a);
    for (std::size_t idx = 0; idx < t.size(); ++idx) {
      std::size_t r = idx;
      std::complex<double> v = m;
      for (std::size_t k = d; k-- > 0;) {
        v *= ph[k * w + r % w];
        r /= w;
      }
      t.at(idx) += v;
    }
  }
  return t;
}

FourierTable smoothed_coefficients(const FourierTable& table, double ell) {
  if (!(ell > 0 && ell < 0.5)) throw std::invalid_argument("needs 0 < ell < 1/2");
  FourierTable out = table;
  std::vector<double> xi(table.dim());
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    auto f = table.frequency(idx);
    for (std::size_t k = 0; k < xi.size(); ++k) xi[k] = f[k];
    double mult = ball_indicator_fourier(xi, ell, table.dim());
    out.at(idx) *= mult * mult;
  }
  return out;
}

namespace {

double shell_count(double k, double d) {
  return std::pow(2 * k + 1, d) - std::pow(2 * k - 1, d);
}

}  // namespace

SobolevBound sobolev_upper_bound(const FourierTable& table, double mass, double q,
                                 const std::function<double(double)>& decay) {
  if (!(q > 0)) throw std::invalid_argument("order q must be > 0");
  const double d = static_cast<double>(table.dim());
  SobolevBound b;
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    auto f = table.frequency(idx);
    double s = 0;
    for (int v : f) s += static_cast<double>(v) * v;
    if (s == 0) continue;
    double w = std::pow(4.0 * std::numbers::pi * std::numbers::pi * s, -q);
    b.partial += std::norm(table.at(idx)) * w;
  }
  // Shells |xi|_inf = k beyond the box; every frequency there has |xi| >= k.
  auto term = [&](double k) {
    double dec = decay ? decay(k) : 1.0;
    return shell_count(k, d) * dec * dec * std::pow(2.0 * std::numbers::pi * k, -2.0 * q);
  };
  const int K = 100000;
  double tail = 0;
  for (int k = table.cutoff() + 1; k <= K; ++k) tail += term(k);
  // Remainder past K from the local power-law exponent of the summand.
  double t1 = term(K), t2 = term(2.0 * K);
  double alpha = std::log(t2 / t1) / std::log(2.0);
  if (!(t1 > 0)) {
    b.tail = mass * mass * tail;
  } else if (alpha < -1.0) {
    b.tail = mass * mass * (tail + t1 * K / (-alpha - 1.0));
  } else {
    b.tail = std::numeric_limits<double>::infinity();
  }
  b.value = std::sqrt(b.partial);
  return b;
}

SobolevBound sobolev_upper_bound(const WeightedAtoms& mu, double q, int M) {
  auto t = fourier_coefficients(mu, M);
  return sobolev_upper_bound(t, mu.total_mass(), q);
}

}  // namespace occlab
