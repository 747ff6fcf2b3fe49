#include "occlab/interlacement.hpp"

#include <algorithm>
#include <cmath>

namespace occlab {

EntranceLaw EntranceLaw::ball(const Domain& K) {
  if (!K.is_ball() || K.space() != Space::Euclidean)
    throw std::invalid_argument("closed-form entrance law needs a Euclidean ball");
  return EntranceLaw(K, capacity_ball(static_cast<int>(K.dim()), K.as_ball().radius).value);
}

EntranceLaw EntranceLaw::swept(const Domain& K, const SweepingResult& sweep) {
  if (!(sweep.capacity.value > 0) || sweep.entrance.size() == 0)
    throw std::invalid_argument("capacity estimate unavailable");
  EntranceLaw law(K, sweep.capacity.value);
  law.sampler_ = sweep.entrance;
  return law;
}

std::vector<double> EntranceLaw::draw(Rng& rng) const {
  if (sampler_) {
    auto p = sampler_->draw(rng);
    return {p.begin(), p.end()};
  }
  return sample_equilibrium_ball(K_, rng);
}

InterlacementOptions resolve_options(const Domain& K, InterlacementOptions opt) {
  if (opt.steps.dt <= 0) opt.steps.dt = dt_for_scale(K.circumradius());
  if (opt.r_max <= 0) opt.r_max = 50.0 * K.circumradius();
  if (opt.stride < 1) opt.stride = 1;
  return opt;
}

namespace {

InterlacementSample run_paths(const EntranceLaw& law, double u, std::size_t n,
                              const InterlacementOptions& raw, SeedSpec seed) {
  const Domain& K = law.domain();
  const auto opt = resolve_options(K, raw);
  InterlacementSample s{K, u, n, WeightedAtoms(K.dim(), Space::Euclidean), 0.0, {}};
  OccupationOptions oo;
  oo.steps = opt.steps;
  oo.escape_radius = opt.r_max;
  oo.stride = opt.stride;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(seed.child(i));
    auto x0 = law.draw(rng);
    auto run = accumulate_occupation(x0, K, oo, rng, opt.mass_only ? nullptr : &s.occupation);
    s.mass += run.mass;
  }
  const double d = static_cast<double>(K.dim());
  s.truncation.r_max = opt.r_max;
  s.truncation.neglected_mass_bound = static_cast<double>(n) *
                                      std::pow(K.circumradius() / opt.r_max, d - 2.0) *
                                      K.volume() / law.capacity();
  return s;
}

}  // namespace

InterlacementSample sample_interlacement(const EntranceLaw& law, double u,
                                         const InterlacementOptions& opt, SeedSpec seed) {
  if (!(u > 0)) throw std::invalid_argument("intensity must be > 0");
  Rng count_rng(seed.child(~0ULL));
  auto n = static_cast<std::size_t>(count_rng.poisson(u * law.capacity()));
  return run_paths(law, u, n, opt, seed);
}

InterlacementSample sample_fixed_n(const EntranceLaw& law, std::size_t n,
                                   const InterlacementOptions& opt, SeedSpec seed) {
  auto s = run_paths(law, 0.0, n, opt, seed);
  s.u = n / law.capacity();
  return s;
}

LawComparison check_scaling_law(double u, double rho, int d, std::size_t replicas,
                                const InterlacementOptions& raw, SeedSpec seed) {
  if (!(rho > 0)) throw std::invalid_argument("rho must be > 0");
  const Point origin(std::vector<double>(d, 0.0));
  const Domain K1 = Domain::ball(origin, 1.0);
  const Domain Kr = Domain::ball(origin, rho);
  const auto opt1 = resolve_options(K1, raw);
  // Same discretization in scaled units.
  auto optr = opt1;
  optr.steps.dt *= rho * rho;
  optr.steps.dt_max *= rho * rho;
  optr.r_max *= rho;
  const auto law1 = EntranceLaw::ball(K1), lawr = EntranceLaw::ball(Kr);
  const double ur = u / std::pow(rho, d - 2);
  LawComparison out;
  for (std::size_t r = 0; r < replicas; ++r) {
    auto a = sample_interlacement(law1, u, opt1, seed.child(2 * r));
    out.a.push_back(mass_in(dilate_measure(a.occupation, rho), Kr));
    auto b = sample_interlacement(lawr, ur, optr, seed.child(2 * r + 1));
    out.b.push_back(b.mass / (rho * rho));
  }
  auto ks = stats::ks_two_sample(out.a, out.b);
  out.ks_statistic = ks.statistic;
  out.p_value = ks.p_value;
  out.mean_a = stats::mean(out.a);
  out.mean_b = stats::mean(out.b);
  return out;
}

TranslationCheck check_translation(double u, double r, const std::vector<Point>& centers,
                                   std::size_t replicas, const InterlacementOptions& raw,
                                   SeedSpec seed) {
  if (centers.size() < 2) throw std::invalid_argument("need at least two centers");
  const std::size_t d = centers[0].dim();
  double reach = 0.0;
  for (const auto& c : centers) reach = std::max(reach, c.norm() + r);
  const Domain K = Domain::ball(Point(std::vector<double>(d, 0.0)), reach);
  const auto law = EntranceLaw::ball(K);
  auto opt = raw;
  opt.mass_only = false;
  if (opt.steps.dt <= 0) opt.steps.dt = dt_for_scale(r);
  TranslationCheck out;
  out.centers = centers;
  out.masses.resize(centers.size());
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const Domain A = Domain::ball(centers[k], r);
    for (std::size_t i = 0; i < replicas; ++i) {
      auto s = sample_interlacement(law, u, opt, seed.child(k * replicas + i));
      out.masses[k].push_back(mass_in(s.occupation, A));
    }
  }
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j)
      out.pairwise_p.push_back(stats::ks_two_sample(out.masses[i], out.masses[j]).p_value);
  return out;
}

LawComparison check_restriction(double u, int d, double r_inner, double r_outer,
                                std::size_t replicas, const InterlacementOptions& raw,
                                SeedSpec seed) {
  if (!(r_inner > 0 && r_inner <= r_outer)) throw std::invalid_argument("needs 0 < r_inner <= r_outer");
  const Point origin(std::vector<double>(d, 0.0));
  const Domain inner = Domain::ball(origin, r_inner), outer = Domain::ball(origin, r_outer);
  auto opt = raw;
  opt.mass_only = false;
  if (opt.steps.dt <= 0) opt.steps.dt = dt_for_scale(r_inner);
  // Same absolute escape radius on both sides.
  if (opt.r_max <= 0) opt.r_max = 50.0 * r_outer;
  const auto law_in = EntranceLaw::ball(inner), law_out = EntranceLaw::ball(outer);
  LawComparison out;
  for (std::size_t r = 0; r < replicas; ++r) {
    auto big = sample_interlacement(law_out, u, opt, seed.child(2 * r));
    out.a.push_back(mass_in(big.occupation, inner));
    auto small = sample_interlacement(law_in, u, opt, seed.child(2 * r + 1));
    out.b.push_back(small.mass);
  }
  auto ks = stats::ks_two_sample(out.a, out.b);
  out.ks_statistic = ks.statistic;
  out.p_value = ks.p_value;
  out.mean_a = stats::mean(out.a);
  out.mean_b = stats::mean(out.b);
  return out;
}

MomentReport occupation_moment_report(const std::vector<MomentSeries>& series, double q) {
  if (series.size() < 3) throw std::invalid_argument("need at least 3 diameters");
  if (q < 2) throw std::invalid_argument("q must be >= 2");
  MomentReport rep;
  for (const auto& s : series) {
    if (s.samples.size() < 2) throw std::invalid_argument("each diameter needs >= 2 samples");
    if (s.diameter < 1) throw std::invalid_argument("diameters must be >= 1");
    double m = stats::mean(s.samples), acc = 0.0;
    for (double x : s.samples) acc += std::pow(std::abs(x - m), q);
    double mom = std::pow(acc / static_cast<double>(s.samples.size()), 1.0 / q);
    if (!(mom > 0)) throw std::invalid_argument("degenerate samples (zero spread)");
    rep.diameters.push_back(s.diameter);
    rep.moments.push_back(mom);
  }
  rep.fit = stats::loglog_fit(rep.diameters, rep.moments);
  return rep;
}

PlaneRotation::PlaneRotation(std::span<const double> a, std::span<const double> b) {
  const std::size_t d = a.size();
  if (b.size() != d) throw std::invalid_argument("dimension mismatch");
  double na = 0, nb = 0;
  for (std::size_t i = 0; i < d; ++i) na += a[i] * a[i], nb += b[i] * b[i];
  na = std::sqrt(na), nb = std::sqrt(nb);
  if (std::abs(na - nb) > 1e-12 * std::max(1.0, na))
    throw std::invalid_argument("rotation endpoints must have equal norms");
  v1_.assign(d, 0.0);
  v2_.assign(d, 0.0);
  if (na == 0) return;
  // Reflection through a^perp sends a to -a; reflection through (a+b)^perp
  // then sends -a to b.
  double s2 = 0;
  for (std::size_t i = 0; i < d; ++i) {
    v1_[i] = a[i] / na;
    v2_[i] = a[i] / na + b[i] / nb;
    s2 += v2_[i] * v2_[i];
  }
  if (s2 < 1e-24) {
    // b = -a: rotate by pi in the plane of a and a fixed orthogonal axis.
    std::size_t k = 0;
    for (std::size_t i = 1; i < d; ++i)
      if (std::abs(v1_[i]) < std::abs(v1_[k])) k = i;
    std::vector<double> e(d, 0.0);
    e[k] = 1.0;
    double dot = v1_[k];
    s2 = 0;
    for (std::size_t i = 0; i < d; ++i) {
      v2_[i] = e[i] - dot * v1_[i];
      s2 += v2_[i] * v2_[i];
    }
    if (s2 == 0) throw std::invalid_argument("cannot rotate in dimension 1");
  }
  double n2 = std::sqrt(s2);
  for (double& v : v2_) v /= n2;
}

void PlaneRotation::apply(std::span<const double> x, std::span<double> out) const {
  const std::size_t d = v1_.size();
  std::vector<double> y(x.begin(), x.end());
  for (const auto* v : {&v1_, &v2_}) {
    double dot = 0;
    for (std::size_t i = 0; i < d; ++i) dot += (*v)[i] * y[i];
    for (std::size_t i = 0; i < d; ++i) y[i] -= 2 * dot * (*v)[i];
  }
  std::copy(y.begin(), y.end(), out.begin());
}

double stability_violation(const PathSample& path, const PlaneRotation& rot) {
  if (path.dim != rot.dim()) throw std::invalid_argument("dimension mismatch");
  const std::size_t d = path.dim;
  std::vector<double> y(d);
  auto x0 = path.position(0);
  rot.apply(x0, y);
  const double bound = euclid_distance(x0, y);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < path.size(); ++k) {
    auto x = path.position(k);
    double r2 = 0;
    for (double v : x) r2 += v * v;
    if (r2 > 1.0) continue;
    rot.apply(x, y);
    worst = std::max(worst, euclid_distance(x, y) - bound);
  }
  return worst;
}

}  // namespace occlab
