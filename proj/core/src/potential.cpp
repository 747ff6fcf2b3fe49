#include "occlab/potential.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>

#include "occlab/stats.hpp"

namespace occlab {

double green_constant(int d) {
  if (d < 3) throw std::invalid_argument("Green function needs d >= 3 (transient case)");
  // Substituting u = 1/(2t) turns the time integral of the heat kernel at
  // unit distance into a Gamma function.
  double h = 0.5 * d;
  return std::tgamma(h - 1.0) / (2.0 * std::pow(std::numbers::pi, h));
}

CapacityValue capacity_ball(int d, double r) {
  if (!(r > 0)) throw std::invalid_argument("radius must be > 0");
  CapacityValue c;
  c.value = std::pow(r, d - 2) / green_constant(d);
  return c;
}

std::vector<double> sample_equilibrium_ball(const Domain& ball, Rng& rng) {
  if (!ball.is_ball() || ball.space() != Space::Euclidean)
    throw std::invalid_argument("needs a Euclidean ball");
  const std::size_t d = ball.dim();
  std::vector<double> x(d);
  double s = 0.0;
  do {
    s = 0.0;
    for (double& v : x) {
      v = rng.normal();
      s += v * v;
    }
  } while (s == 0.0);
  s = std::sqrt(s);
  const auto& c = ball.center();
  const double r = ball.as_ball().radius;
  for (std::size_t i = 0; i < d; ++i) x[i] = c[i] + r * x[i] / s;
  return x;
}

Point sample_equilibrium_ball(const Domain& ball, SeedSpec seed) {
  Rng rng(seed);
  return Point(sample_equilibrium_ball(ball, rng));
}

EntranceSampler::EntranceSampler(std::size_t dim, std::vector<double> points)
    : dim_(dim), points_(std::move(points)) {}

std::span<const double> EntranceSampler::draw(Rng& rng) const {
  if (size() == 0) throw std::runtime_error("no entrance points recorded");
  auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(size()));
  return point(std::min(i, size() - 1));
}

SweepingResult estimate_capacity_sweeping(const Domain& K, const Domain& enclosing,
                                          const SweepingOptions& opt, SeedSpec seed) {
  if (!enclosing.is_ball() || enclosing.space() != Space::Euclidean ||
      K.space() != Space::Euclidean)
    throw std::invalid_argument("sweeping needs Euclidean K and an enclosing ball");
  const std::size_t d = K.dim();
  if (d < 3) throw std::invalid_argument("capacity needs d >= 3");
  double off = euclid_distance(K.center().coords(), enclosing.center().coords());
  if (off + K.circumradius() > enclosing.as_ball().radius * (1 + 1e-12))
    throw std::invalid_argument("K is not contained in the enclosing ball");
  const double R = enclosing.as_ball().radius;
  const double cap_ball = capacity_ball(static_cast<int>(d), R).value;

  HitOptions hopt;
  hopt.steps = opt.steps;
  hopt.bridge_correction = opt.bridge_correction;
  hopt.escape_radius = opt.r_max_factor * R;
  // Escape is measured from K's center; shift so the enclosing sphere stays
  // inside the escape ball.
  hopt.escape_radius += off;

  std::size_t hits = 0;
  std::vector<double> pts;
  for (std::size_t rep = 0; rep < opt.replicas; ++rep) {
    Rng rng(seed.child(rep));
    auto x0 = sample_equilibrium_ball(enclosing, rng);
    HitResult h = first_hit(x0, K, hopt, rng);
    if (h.hit) {
      ++hits;
      pts.insert(pts.end(), h.hit_point.begin(), h.hit_point.end());
    }
  }
  SweepingResult out;
  const double n = static_cast<double>(opt.replicas);
  out.hit_fraction = hits / n;
  double se = std::sqrt(std::max(out.hit_fraction * (1 - out.hit_fraction), 0.0) / n);
  out.capacity.method = CapacityValue::Method::SweepingEstimate;
  out.capacity.value = out.hit_fraction * cap_ball;
  out.capacity.ci_halfwidth = 1.96 * se * cap_ball;
  out.capacity.replicas = opt.replicas;
  // A path leaving the escape ball returns to the enclosing ball with
  // probability (R / R_max)^{d-2}.
  out.capacity.truncation_bound =
      cap_ball * std::pow(1.0 / opt.r_max_factor, static_cast<double>(d) - 2.0);
  out.entrance = EntranceSampler(d, std::move(pts));
  return out;
}

HittingPrediction torus_hitting_prediction(double ell, double rho, double sigma, int d) {
  if (d < 3) throw std::invalid_argument("needs d >= 3");
  if (!(ell > 0 && ell < 0.5)) throw std::invalid_argument("needs 0 < ell < 1/2");
  if (!(sigma >= 0 && sigma <= rho)) throw std::invalid_argument("needs 0 <= sigma <= rho");
  const double cap1 = capacity_ball(d, 1.0).value;
  const double ld2 = std::pow(ell, d - 2);
  HittingPrediction p;
  p.prediction = (rho - sigma) * ld2 * cap1;
  p.error_term = (rho - sigma) * rho * ld2 * ld2 * std::abs(std::log(ell)) + std::pow(ell, d);
  // The leading term is meaningful while rho * ell^{d-2} is small and ell
  // is well below the torus scale.
  p.regime_ok = ell <= 0.1 && rho * ld2 * cap1 <= 0.5;
  return p;
}

double sphere_coordinate_cdf(double u, int d) {
  if (u <= -1) return 0.0;
  if (u >= 1) return 1.0;
  if (d == 3) return 0.5 * (u + 1.0);
  // (1 - u^2)^{(d-3)/2} density; (u+1)/2 is Beta((d-1)/2, (d-1)/2).
  double a = 0.5 * (d - 1);
  return boost::math::ibeta(a, a, 0.5 * (u + 1.0));
}

namespace {

// Runs inside the torus ball D_L until the flat distance to its center
// exceeds L or time runs out. Returns the elapsed time (or remaining budget).
bool exit_torus_ball(std::vector<double>& x, const Domain& big, double dt, double budget,
                     bool bridge, Rng& rng, double& elapsed) {
  const std::size_t d = x.size();
  std::vector<double> y(d);
  double t = 0.0, a = big.depth(x);
  while (t < budget) {
    double h = std::min(dt, budget - t);
    double sh = std::sqrt(h);
    for (std::size_t i = 0; i < d; ++i) y[i] = wrap_unit(x[i] + sh * rng.normal());
    double b = big.contains(y) ? big.depth(y) : 0.0;
    bool out = !big.contains(y) || (bridge && rng.uniform() < std::exp(-2.0 * a * b / h));
    t += h;
    x.swap(y);
    a = b;
    if (out) {
      elapsed = t;
      return true;
    }
  }
  elapsed = t;
  return false;
}

}  // namespace

TorusHittingReport validate_torus_hitting(double ell, double rho, double sigma, int d,
                                          const TorusHittingOptions& opt, SeedSpec seed) {
  TorusHittingReport rep;
  rep.prediction = torus_hitting_prediction(ell, rho, sigma, d);
  const Domain ball = Domain::ball(Point(std::vector<double>(d, 0.0)), ell, Space::Torus);
  HitOptions hopt;
  hopt.T_max = rho;
  hopt.steps = opt.steps;
  hopt.bridge_correction = opt.bridge_correction;
  std::size_t count = 0;
  std::vector<double> coord;
  for (std::size_t r = 0; r < opt.replicas; ++r) {
    Rng rng(seed.child(r));
    std::vector<double> x0(d);
    for (double& v : x0) v = rng.uniform() - 0.5;
    HitResult h = first_hit(x0, ball, hopt, rng);
    if (h.hit && h.hit_time > sigma && h.hit_time <= rho && h.hit_time > 0) {
      ++count;
      coord.push_back(std::clamp(wrap_unit(h.hit_point[0]) / ell, -1.0, 1.0));
    }
  }
  const double n = static_cast<double>(opt.replicas);
  rep.empirical = count / n;
  rep.se = std::sqrt(rep.empirical * (1 - rep.empirical) / n);
  rep.ci_halfwidth = 1.96 * rep.se;
  rep.hits = count;
  if (!coord.empty()) {
    auto ks = stats::ks_one_sample(coord, [d](double u) { return sphere_coordinate_cdf(u, d); });
    rep.angular_ks = ks.statistic;
    rep.angular_ks_p = ks.p_value;
  }
  return rep;
}

std::vector<IteratedHitFrequency> iterated_hit_frequencies(double ell, double L, double rho, int d,
                                                           int k_max,
                                                           const TorusHittingOptions& opt,
                                                           SeedSpec seed) {
  if (!(ell > 0 && ell < L && L < 0.5)) throw std::invalid_argument("needs 0 < ell < L < 1/2");
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  const Point origin(std::vector<double>(d, 0.0));
  const Domain small = Domain::ball(origin, ell, Space::Torus);
  const Domain big = Domain::ball(origin, L, Space::Torus);
  std::vector<std::size_t> counts(k_max, 0);
  for (std::size_t r = 0; r < opt.replicas; ++r) {
    Rng rng(seed.child(r));
    std::vector<double> x(d);
    for (double& v : x) v = rng.uniform() - 0.5;
    double t = 0.0;
    for (int k = 0; k < k_max && t < rho; ++k) {
      HitOptions hopt;
      hopt.T_max = rho - t;
      hopt.steps = opt.steps;
      hopt.bridge_correction = opt.bridge_correction;
      HitResult h = first_hit(x, small, hopt, rng);
      if (!h.hit) break;
      // tau_{1} must be > 0: a start inside D_ell does not count as an entrance.
      if (k == 0 && h.hit_time == 0.0 && h.steps == 0) {
        double el = 0.0;
        x = h.final_state;
        if (!exit_torus_ball(x, big, opt.steps.dt, rho - t, opt.bridge_correction, rng, el)) break;
        t += el;
        --k;
        continue;
      }
      t += h.hit_time;
      if (t > rho) break;
      ++counts[k];
      x = h.hit_point;
      double el = 0.0;
      if (!exit_torus_ball(x, big, opt.steps.dt, rho - t, opt.bridge_correction, rng, el)) break;
      t += el;
    }
  }
  std::vector<IteratedHitFrequency> out;
  const double n = static_cast<double>(opt.replicas);
  for (int k = 0; k < k_max; ++k) {
    double f = counts[k] / n;
    out.push_back({k + 1, f, std::sqrt(f * (1 - f) / n)});
  }
  return out;
}

}  // namespace occlab
