#include "occlab/brownian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace occlab {

double dt_for_scale(double length_scale) {
  if (!(length_scale > 0)) throw std::invalid_argument("length scale must be > 0");
  double s = length_scale / 10.0;
  return s * s;
}

double StepPolicy::step(double gap) const {
  if (adapt <= 0.0) return dt;
  double h = adapt * gap;
  h *= h;
  return std::clamp(h, dt, std::max(dt, dt_max));
}

namespace {

struct StepPlan {
  std::size_t full = 0;
  double rem = 0.0;
};

StepPlan plan_steps(double T, double dt) {
  if (!(T >= 0)) throw std::invalid_argument("T must be >= 0");
  if (!(dt > 0)) throw std::invalid_argument("dt must be > 0");
  StepPlan p;
  p.full = static_cast<std::size_t>(std::floor(T / dt));
  p.rem = T - static_cast<double>(p.full) * dt;
  // Drop rounding noise; a genuine partial step is kept.
  if (p.rem <= 1e-9 * dt) p.rem = 0.0;
  if (p.rem < 0.0) {
    --p.full;
    p.rem += dt;
  }
  return p;
}

void require_finite_point(const Point& x0) {
  for (double v : x0.coords())
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite start point");
}

template <class Normal>
PathSample walk(const Point& x0, double T, double dt, Space space, Normal&& normal) {
  require_finite_point(x0);
  StepPlan plan = plan_steps(T, dt);
  PathSample path;
  path.dt = dt;
  path.dim = x0.dim();
  path.space = space;
  path.duration = T;
  const std::size_t d = x0.dim();
  const std::size_t n = plan.full + (plan.rem > 0 ? 1 : 0);
  path.last_dt = plan.rem > 0 ? plan.rem : (n ? dt : 0.0);
  path.positions.reserve((n + 1) * d);
  std::vector<double> x(x0.coords().begin(), x0.coords().end());
  if (space == Space::Torus)
    for (double& v : x) v = wrap_unit(v);
  path.positions.insert(path.positions.end(), x.begin(), x.end());
  for (std::size_t k = 0; k < n; ++k) {
    double sh = std::sqrt(k + 1 == n ? path.last_dt : dt);
    for (std::size_t i = 0; i < d; ++i) {
      x[i] += sh * normal();
      if (space == Space::Torus) x[i] = wrap_unit(x[i]);
    }
    path.positions.insert(path.positions.end(), x.begin(), x.end());
  }
  return path;
}

}  // namespace

PathSample sample_bm_path(const Point& x0, double T, double dt, Space space, SeedSpec seed) {
  Rng rng(seed);
  return walk(x0, T, dt, space, [&] { return rng.normal(); });
}

PathSample sample_bm_path(const Point& x0, double T, double dt, Space space,
                          const NormalSource& normal) {
  return walk(x0, T, dt, space, normal);
}

WeightedAtoms occupation_atoms(const PathSample& path, std::size_t stride) {
  if (path.size() == 0) throw std::invalid_argument("empty path");
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  WeightedAtoms out(path.dim, path.space);
  const std::size_t steps = path.steps();
  if (steps == 0) {
    out.add(path.position(0), 0.0);
    return out;
  }
  out.reserve(steps / stride + 1);
  double acc = 0.0;
  for (std::size_t k = 0; k < steps; k += stride) {
    std::size_t end = std::min(steps, k + stride);
    double m = 0.0;
    for (std::size_t j = k; j < end; ++j) m += path.step_length(j);
    if (end == steps) m = path.duration - acc;
    acc += m;
    out.add(path.position(k), std::max(0.0, m));
  }
  return out;
}

double occupation_mass_in(const PathSample& path, const Domain& omega) {
  if (path.space != omega.space()) throw std::invalid_argument("space mismatch");
  double s = 0.0;
  const std::size_t steps = path.steps();
  double acc = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    double m = k + 1 == steps ? path.duration - acc : path.step_length(k);
    acc += path.step_length(k);
    if (omega.contains(path.position(k))) s += m;
  }
  return s;
}

WeightedAtoms sample_occupation_atoms(const Point& x0, double T, double dt, Space space,
                                      std::size_t stride, SeedSpec seed) {
  require_finite_point(x0);
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  StepPlan plan = plan_steps(T, dt);
  const std::size_t d = x0.dim();
  const std::size_t n = plan.full + (plan.rem > 0 ? 1 : 0);
  const double last = plan.rem > 0 ? plan.rem : dt;
  Rng rng(seed);
  WeightedAtoms out(d, space);
  std::vector<double> x(x0.coords().begin(), x0.coords().end());
  if (space == Space::Torus)
    for (double& v : x) v = wrap_unit(v);
  if (n == 0) {
    out.add(x, 0.0);
    return out;
  }
  out.reserve(n / stride + 1);
  std::vector<double> anchor = x;
  double group = 0.0, acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k % stride == 0) anchor = x;
    double h = k + 1 == n ? last : dt;
    group += h;
    if ((k + 1) % stride == 0 || k + 1 == n) {
      double m = k + 1 == n ? T - acc : group;
      acc += group;
      out.add(anchor, std::max(0.0, m));
      group = 0.0;
    }
    double sh = std::sqrt(h);
    for (std::size_t i = 0; i < d; ++i) {
      x[i] += sh * rng.normal();
      if (space == Space::Torus) x[i] = wrap_unit(x[i]);
    }
  }
  return out;
}

HeatKernelValue heat_kernel_torus(const TorusPoint& x, const TorusPoint& y, double t,
                                  int lattice_cutoff) {
  if (!(t > 0)) throw std::invalid_argument("t must be > 0");
  if (lattice_cutoff < 1) throw std::invalid_argument("lattice cutoff must be >= 1");
  if (x.dim() != y.dim()) throw std::invalid_argument("dimension mismatch");
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * t);
  const double K = lattice_cutoff;
  // Images for short times, the cosine series 1 + 2 sum e^{-2 pi^2 k^2 t}
  // cos(2 pi k delta) for long ones; both are symmetric in delta.
  const bool spectral = t > 0.25;
  double tail1;
  if (spectral) {
    const double q = std::exp(-2.0 * std::numbers::pi * std::numbers::pi * t);
    tail1 = 2.0 * std::pow(q, (K + 1) * (K + 1)) / (1.0 - std::pow(q, 2 * K + 3));
  } else {
    // Images with |z| > K, using |x_i - y_i| <= 1/2 after canonicalization.
    const double u0 = K + 0.5;
    tail1 = 2.0 * (norm * std::exp(-u0 * u0 / (2 * t)) + 0.5 * std::erfc(u0 / std::sqrt(2 * t)));
  }
  double prod = 1.0, prod_upper = 1.0;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    double delta = std::abs(x[i] - y[i]);
    double s = 0.0;
    if (spectral) {
      s = 1.0;
      for (int k = 1; k <= lattice_cutoff; ++k)
        s += 2.0 * std::exp(-2.0 * std::numbers::pi * std::numbers::pi * k * k * t) *
             std::cos(2.0 * std::numbers::pi * k * delta);
    } else {
      for (int z = -lattice_cutoff; z <= lattice_cutoff; ++z) {
        double u = delta - z;
        s += norm * std::exp(-u * u / (2 * t));
      }
    }
    prod *= s;
    prod_upper *= s + tail1;
  }
  return {prod, prod_upper - prod};
}

namespace {

// Fraction s in (0,1] along x -> x + inc at which the segment enters the
// domain (o = offset of x from the center).
double entry_fraction(const Domain& dom, std::span<const double> o, std::span<const double> inc) {
  if (dom.is_ball()) {
    double r = dom.as_ball().radius;
    double a = 0, b = 0, c = -r * r;
    for (std::size_t i = 0; i < o.size(); ++i) {
      a += inc[i] * inc[i];
      b += 2 * o[i] * inc[i];
      c += o[i] * o[i];
    }
    double disc = b * b - 4 * a * c;
    if (a <= 0 || disc < 0) return 1.0;
    double s = (-b - std::sqrt(disc)) / (2 * a);
    return std::clamp(s, 0.0, 1.0);
  }
  double h = 0.5 * dom.as_cube().side;
  auto inside = [&](double s) {
    for (std::size_t i = 0; i < o.size(); ++i)
      if (std::abs(o[i] + s * inc[i]) > h) return false;
    return true;
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 40; ++it) {
    double mid = 0.5 * (lo + hi);
    (inside(mid) ? hi : lo) = mid;
  }
  return hi;
}

// Fraction along the segment at which it leaves a ball (o inside).
double exit_fraction(double r, std::span<const double> o, std::span<const double> inc) {
  double a = 0, b = 0, c = -r * r;
  for (std::size_t i = 0; i < o.size(); ++i) {
    a += inc[i] * inc[i];
    b += 2 * o[i] * inc[i];
    c += o[i] * o[i];
  }
  double disc = b * b - 4 * a * c;
  if (a <= 0 || disc < 0) return 1.0;
  return std::clamp((-b + std::sqrt(disc)) / (2 * a), 0.0, 1.0);
}

}  // namespace

HitResult first_hit(std::span<const double> x0, const Domain& target, const HitOptions& opt,
                    Rng& rng) {
  const std::size_t d = target.dim();
  if (x0.size() != d) throw std::invalid_argument("dimension mismatch");
  const bool torus = target.space() == Space::Torus;
  const auto& c = target.center();
  HitResult res;
  std::vector<double> x(x0.begin(), x0.end()), y(d), inc(d), o(d), p(d);
  if (torus)
    for (double& v : x) v = wrap_unit(v);
  if (target.contains(x)) {
    res.hit = true;
    res.hit_point = x;
    res.final_state = x;
    return res;
  }
  // Distance to the escape sphere; the step also respects it so that
  // "hit before escape" is resolved at the same accuracy as the hit itself.
  const bool bounded = !torus && std::isfinite(opt.escape_radius);
  auto room = [&](std::span<const double> z) {
    double r2 = 0;
    for (std::size_t i = 0; i < d; ++i) r2 += (z[i] - c[i]) * (z[i] - c[i]);
    return opt.escape_radius - std::sqrt(r2);
  };
  double t = 0.0;
  double g = target.gap(x);
  double e = bounded ? room(x) : std::numeric_limits<double>::infinity();
  while (true) {
    if (e <= 0) {
      res.escaped = true;
      break;
    }
    if (t >= opt.T_max) break;
    double h = std::min(opt.steps.step(std::min(g, e)), opt.T_max - t);
    double sh = std::sqrt(h);
    for (std::size_t i = 0; i < d; ++i) {
      inc[i] = sh * rng.normal();
      y[i] = x[i] + inc[i];
      if (torus) y[i] = wrap_unit(y[i]);
    }
    ++res.steps;
    if (target.contains(y)) {
      target.offset(x, o);
      double s = entry_fraction(target, o, inc);
      for (std::size_t i = 0; i < d; ++i) p[i] = x[i] + s * inc[i];
      res.hit = true;
      res.hit_time = t + s * h;
      res.hit_point.assign(d, 0.0);
      target.project_to_boundary(p, res.hit_point);
      res.final_state = res.hit_point;
      res.final_time = res.hit_time;
      return res;
    }
    const double ey = bounded ? room(y) : std::numeric_limits<double>::infinity();
    if (ey <= 0) {
      x.swap(y);
      t += h;
      res.escaped = true;
      break;
    }
    double gy = target.gap(y);
    if (opt.bridge_correction && rng.uniform() < std::exp(-2.0 * g * gy / h)) {
      double s = g / (g + gy);
      for (std::size_t i = 0; i < d; ++i) p[i] = x[i] + s * inc[i];
      res.hit = true;
      res.hit_time = t + s * h;
      res.hit_point.assign(d, 0.0);
      target.project_to_boundary(p, res.hit_point);
      res.final_state = res.hit_point;
      res.final_time = res.hit_time;
      return res;
    }
    if (bounded && opt.bridge_correction && rng.uniform() < std::exp(-2.0 * e * ey / h)) {
      x.swap(y);
      t += h;
      res.escaped = true;
      break;
    }
    e = ey;
    x.swap(y);
    g = gy;
    t += h;
  }
  res.final_state = x;
  res.final_time = t;
  return res;
}

HitResult first_hit_ball(const Point& x0, const Domain& ball, const HitOptions& opt,
                         SeedSpec seed) {
  require_finite_point(x0);
  if (!ball.is_ball()) throw std::invalid_argument("first_hit_ball needs a ball");
  Rng rng(seed);
  return first_hit(x0.coords(), ball, opt, rng);
}

ExitResult first_exit_ball(const Point& x0, const Domain& ball, const ExitOptions& opt,
                           SeedSpec seed) {
  require_finite_point(x0);
  if (!ball.is_ball() || ball.space() != Space::Euclidean)
    throw std::invalid_argument("first_exit_ball needs a Euclidean ball");
  if (!ball.contains(x0.coords())) throw std::invalid_argument("start point outside the ball");
  const std::size_t d = ball.dim();
  const double r = ball.as_ball().radius;
  Rng rng(seed);
  std::vector<double> x(x0.coords().begin(), x0.coords().end()), y(d), inc(d), o(d), p(d);
  ExitResult res;
  double t = 0.0, a = ball.depth(x);
  while (true) {
    if (t >= opt.T_max) {
      res.censored = true;
      res.exit_time = t;
      res.exit_point = x;
      return res;
    }
    double h = std::min(opt.dt, opt.T_max - t);
    double sh = std::sqrt(h);
    for (std::size_t i = 0; i < d; ++i) {
      inc[i] = sh * rng.normal();
      y[i] = x[i] + inc[i];
    }
    bool out = !ball.contains(y);
    double b = out ? 0.0 : ball.depth(y);
    double s = -1.0;
    if (out) {
      ball.offset(x, o);
      s = exit_fraction(r, o, inc);
    } else if (opt.bridge_correction && rng.uniform() < std::exp(-2.0 * a * b / h)) {
      s = a / (a + b);
    }
    if (s >= 0.0) {
      for (std::size_t i = 0; i < d; ++i) p[i] = x[i] + s * inc[i];
      res.exit_time = t + s * h;
      res.exit_point.assign(d, 0.0);
      ball.project_to_boundary(p, res.exit_point);
      return res;
    }
    x.swap(y);
    a = b;
    t += h;
  }
}

OccupationRun accumulate_occupation(std::span<const double> x0, const Domain& K,
                                    const OccupationOptions& opt, Rng& rng, WeightedAtoms* out) {
  if (K.space() != Space::Euclidean) throw std::invalid_argument("occupation walker is Euclidean");
  const std::size_t d = K.dim();
  if (x0.size() != d) throw std::invalid_argument("dimension mismatch");
  if (opt.stride < 1) throw std::invalid_argument("stride must be >= 1");
  const auto& c = K.center();
  const double R2 = opt.escape_radius * opt.escape_radius;
  std::vector<double> x(x0.begin(), x0.end()), anchor(d);
  OccupationRun run;
  double group = 0.0;
  std::size_t in_group = 0;
  auto flush = [&] {
    if (in_group && out) out->add(anchor, group);
    group = 0.0;
    in_group = 0;
  };
  double t = 0.0;
  while (true) {
    double r2 = 0;
    for (std::size_t i = 0; i < d; ++i) r2 += (x[i] - c[i]) * (x[i] - c[i]);
    if (r2 >= R2) {
      run.escaped = true;
      break;
    }
    if (t >= opt.T_max) break;
    bool in = K.contains(x);
    double h = in ? opt.steps.dt : opt.steps.step(K.gap(x));
    h = std::min(h, opt.T_max - t);
    if (in) {
      if (in_group == 0) anchor = x;
      group += h;
      run.mass += h;
      if (++in_group == opt.stride) flush();
    } else {
      flush();
    }
    double sh = std::sqrt(h);
    for (std::size_t i = 0; i < d; ++i) x[i] += sh * rng.normal();
    t += h;
    ++run.steps;
  }
  flush();
  run.elapsed = t;
  return run;
}

}  // namespace occlab
