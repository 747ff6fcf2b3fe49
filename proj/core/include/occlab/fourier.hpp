#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "occlab/geometry.hpp"

namespace occlab {

// Normalized transform chi_hat_{D_ell}(xi) / |D_ell| with the convention
// e^{-2 pi i xi.x}. Real because the ball is symmetric; 1 at xi = 0.
double ball_indicator_fourier(std::span<const double> xi, double ell, std::size_t d);
// Same, as a function of the transform argument k = 2 pi ell |xi|.
double ball_fourier_radial(double k, std::size_t d);

// C with |ball_indicator_fourier| <= C (1 + ell|xi|)^{-(d+1)/2} for all xi.
double bessel_decay_constant(std::size_t d);

// Coefficients on the frequency box {-M..M}^d, last axis fastest.
class FourierTable {
public:
  FourierTable(std::size_t d, int M);
  std::size_t dim() const { return d_; }
  int cutoff() const { return M_; }
  std::size_t size() const { return values_.size(); }
  std::complex<double>& at(std::size_t idx) { return values_[idx]; }
  const std::complex<double>& at(std::size_t idx) const { return values_[idx]; }
  std::complex<double> operator()(std::span<const int> xi) const;
  std::size_t index(std::span<const int> xi) const;
  // Frequency of a linear index.
  std::vector<int> frequency(std::size_t idx) const;

private:
  std::size_t d_;
  int M_;
  std::vector<std::complex<double>> values_;
};

FourierTable fourier_coefficients(const WeightedAtoms& mu, int M);
// Multiplies each coefficient by (chi_hat_{D_ell}(xi)/|D_ell|)^2.
FourierTable smoothed_coefficients(const FourierTable& table, double ell);

struct SobolevBound {
  double value = 0.0;
  // Partial sum over the cutoff box, before the square root.
  double partial = 0.0;
  // Bound on the omitted squared terms; infinite when 2q <= d.
  double tail = 0.0;
};

// sqrt(sum_{xi != 0, |xi|_inf <= M} |mu_hat(xi)|^2 / |2 pi xi|^{2q}), tail
// bounded with |mu_hat| <= mass.
SobolevBound sobolev_upper_bound(const WeightedAtoms& mu, double q, int M);
// Same on a precomputed table; decay(|xi|) bounds |coefficient|/mass beyond
// the box (defaults to 1).
SobolevBound sobolev_upper_bound(const FourierTable& table, double mass, double q,
                                 const std::function<double(double)>& decay = {});

}  // namespace occlab
