#include "occlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace occlab {

namespace {

void require_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite coordinate");
}

void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b)
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a) + " vs " +
                                std::to_string(b));
}

}  // namespace

double wrap_unit(double v) {
  double w = v - std::floor(v + 0.5);
  // floor can round so that w lands on +1/2 for tiny negative inputs.
  if (w >= 0.5) w -= 1.0;
  return w;
}

Point::Point(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw std::invalid_argument("point dimension must be >= 1");
  require_finite(coords_);
}

Point::Point(std::initializer_list<double> coords) : Point(std::vector<double>(coords)) {}

double Point::norm() const {
  double s = 0.0;
  for (double v : coords_) s += v * v;
  return std::sqrt(s);
}

TorusPoint::TorusPoint(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw std::invalid_argument("point dimension must be >= 1");
  require_finite(coords_);
  for (double& v : coords_) v = wrap_unit(v);
}

TorusPoint::TorusPoint(std::initializer_list<double> coords)
    : TorusPoint(std::vector<double>(coords)) {}

// The squared distance to a lattice image separates over coordinates, so
// minimizing each coordinate over the shifts {-1,0,1} is the same as the
// minimum over all 3^d shifts.
double flat_distance(std::span<const double> x, std::span<const double> y) {
  require_same_dim(x.size(), y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double diff = wrap_unit(x[i]) - wrap_unit(y[i]);
    double a = std::abs(diff);
    double m = std::min(a, std::abs(1.0 - a));
    s += m * m;
  }
  return std::sqrt(s);
}

double flat_distance(const TorusPoint& x, const TorusPoint& y) {
  return flat_distance(x.coords(), y.coords());
}

double euclid_distance(std::span<const double> x, std::span<const double> y) {
  require_same_dim(x.size(), y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = x[i] - y[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double distance(Space s, std::span<const double> x, std::span<const double> y) {
  return s == Space::Torus ? flat_distance(x, y) : euclid_distance(x, y);
}

Domain Domain::ball(Point center, double radius, Space space) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be > 0");
  if (space == Space::Torus) {
    if (!(radius < 0.5)) throw std::invalid_argument("torus ball radius must be < 1/2");
    std::vector<double> c(center.coords().begin(), center.coords().end());
    for (double& v : c) v = wrap_unit(v);
    center = Point(std::move(c));
  }
  return Domain(Ball{std::move(center), radius}, space);
}

Domain Domain::cube(Point center, double side, Space space) {
  if (!(side > 0.0)) throw std::invalid_argument("cube side must be > 0");
  if (space == Space::Torus) {
    if (side > 1.0) throw std::invalid_argument("torus cube side must be <= 1");
    std::vector<double> c(center.coords().begin(), center.coords().end());
    for (double& v : c) v = wrap_unit(v);
    center = Point(std::move(c));
  }
  return Domain(Cube{std::move(center), side}, space);
}

std::size_t Domain::dim() const { return center().dim(); }

const Point& Domain::center() const {
  return is_ball() ? as_ball().center : as_cube().center;
}

void Domain::offset(std::span<const double> x, std::span<double> out) const {
  const auto& c = center();
  require_same_dim(x.size(), c.dim());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = x[i] - c[i];
    out[i] = space_ == Space::Torus ? wrap_unit(v) : v;
  }
}

bool Domain::contains(std::span<const double> x) const {
  const auto& c = center();
  require_same_dim(x.size(), c.dim());
  if (is_ball()) {
    double r = as_ball().radius, s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double v = x[i] - c[i];
      if (space_ == Space::Torus) v = wrap_unit(v);
      s += v * v;
    }
    return s <= r * r;
  }
  double h = 0.5 * as_cube().side;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = x[i] - c[i];
    if (space_ == Space::Torus) v = wrap_unit(v);
    if (std::abs(v) > h) return false;
  }
  return true;
}

double unit_ball_volume(std::size_t d) {
  double h = 0.5 * static_cast<double>(d);
  return std::pow(std::numbers::pi, h) / std::tgamma(h + 1.0);
}

double Domain::volume() const {
  double d = static_cast<double>(dim());
  if (is_ball()) return unit_ball_volume(dim()) * std::pow(as_ball().radius, d);
  return std::pow(as_cube().side, d);
}

double Domain::circumradius() const {
  if (is_ball()) return as_ball().radius;
  return 0.5 * as_cube().side * std::sqrt(static_cast<double>(dim()));
}

double Domain::gap(std::span<const double> x) const {
  const auto& c = center();
  const bool torus = space_ == Space::Torus;
  double s = 0.0;
  if (is_ball()) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      double v = torus ? wrap_unit(x[i] - c[i]) : x[i] - c[i];
      s += v * v;
    }
    return std::max(0.0, std::sqrt(s) - as_ball().radius);
  }
  double h = 0.5 * as_cube().side;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = torus ? wrap_unit(x[i] - c[i]) : x[i] - c[i];
    double e = std::abs(v) - h;
    if (e > 0) s += e * e;
  }
  return std::sqrt(s);
}

double Domain::depth(std::span<const double> x) const {
  const auto& c = center();
  const bool torus = space_ == Space::Torus;
  if (is_ball()) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double v = torus ? wrap_unit(x[i] - c[i]) : x[i] - c[i];
      s += v * v;
    }
    return std::max(0.0, as_ball().radius - std::sqrt(s));
  }
  double h = 0.5 * as_cube().side, m = h;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = torus ? wrap_unit(x[i] - c[i]) : x[i] - c[i];
    m = std::min(m, h - std::abs(v));
  }
  return std::max(0.0, m);
}

void Domain::project_to_boundary(std::span<const double> x, std::span<double> out) const {
  const std::size_t d = x.size();
  std::vector<double> o(d);
  offset(x, o);
  const auto& c = center();
  if (is_ball()) {
    double s = 0.0;
    for (double v : o) s += v * v;
    s = std::sqrt(s);
    double r = as_ball().radius;
    for (std::size_t i = 0; i < d; ++i) {
      double u = s > 0 ? o[i] / s : (i == 0 ? 1.0 : 0.0);
      out[i] = c[i] + r * u;
    }
  } else {
    double h = 0.5 * as_cube().side;
    bool inside = true;
    for (double v : o) inside = inside && std::abs(v) <= h;
    if (inside) {
      // Push the coordinate closest to a face onto that face.
      std::size_t k = 0;
      double best = h - std::abs(o[0]);
      for (std::size_t i = 1; i < d; ++i)
        if (h - std::abs(o[i]) < best) best = h - std::abs(o[i]), k = i;
      for (std::size_t i = 0; i < d; ++i) out[i] = c[i] + o[i];
      out[k] = c[k] + (o[k] >= 0 ? h : -h);
    } else {
      for (std::size_t i = 0; i < d; ++i) out[i] = c[i] + std::clamp(o[i], -h, h);
    }
  }
  if (space_ == Space::Torus)
    for (std::size_t i = 0; i < d; ++i) out[i] = wrap_unit(out[i]);
}

void WeightedAtoms::reserve(std::size_t n) {
  positions_.reserve(n * dim_);
  masses_.reserve(n);
}

void WeightedAtoms::add(std::span<const double> x, double mass) {
  require_same_dim(x.size(), dim_);
  if (!(mass >= 0.0) || !std::isfinite(mass)) throw std::invalid_argument("atom mass must be >= 0");
  if (space_ == Space::Torus) {
    for (double v : x) positions_.push_back(wrap_unit(v));
  } else {
    positions_.insert(positions_.end(), x.begin(), x.end());
  }
  masses_.push_back(mass);
  total_ += mass;
}

void WeightedAtoms::scale_masses(double a) {
  for (double& m : masses_) m *= a;
  recompute_total();
}

void WeightedAtoms::recompute_total() {
  double s = 0.0;
  for (double m : masses_) s += m;
  total_ = s;
}

WeightedAtoms dilate_measure(const WeightedAtoms& mu, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("dilation factor must be > 0");
  if (mu.space() != Space::Euclidean) throw std::invalid_argument("dilation needs a Euclidean measure");
  WeightedAtoms out(mu.dim(), mu.space());
  out.reserve(mu.size());
  std::vector<double> x(mu.dim());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    auto p = mu.position(i);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = rho * p[k];
    out.add(x, mu.mass(i));
  }
  return out;
}

WeightedAtoms translate_measure(const WeightedAtoms& mu, const Point& shift) {
  require_same_dim(mu.dim(), shift.dim());
  WeightedAtoms out(mu.dim(), mu.space());
  out.reserve(mu.size());
  std::vector<double> x(mu.dim());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    auto p = mu.position(i);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = p[k] + shift[k];
    out.add(x, mu.mass(i));
  }
  return out;
}

WeightedAtoms restrict_measure(const WeightedAtoms& mu, const Domain& omega) {
  if (mu.space() != omega.space()) throw std::invalid_argument("space mismatch");
  WeightedAtoms out(mu.dim(), mu.space());
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (omega.contains(mu.position(i))) out.add(mu.position(i), mu.mass(i));
  return out;
}

double mass_in(const WeightedAtoms& mu, const Domain& omega) {
  if (mu.space() != omega.space()) throw std::invalid_argument("space mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (omega.contains(mu.position(i))) s += mu.mass(i);
  return s;
}

Discretization uniform_discretization(const Domain& omega, int n_per_axis) {
  if (n_per_axis < 1) throw std::invalid_argument("n_per_axis must be >= 1");
  const std::size_t d = omega.dim();
  const double box = omega.is_ball() ? 2.0 * omega.as_ball().radius : omega.as_cube().side;
  const double h = box / n_per_axis;
  const double cell_vol = std::pow(h, static_cast<double>(d));
  const auto& c = omega.center();

  Discretization out;
  out.cell_side = h;
  out.atoms = WeightedAtoms(d, omega.space());
  std::vector<int> idx(d, 0);
  std::vector<double> x(d);
  std::vector<double> kept;
  while (true) {
    for (std::size_t k = 0; k < d; ++k) x[k] = c[k] - 0.5 * box + (idx[k] + 0.5) * h;
    if (omega.is_cube() || omega.contains(x)) kept.insert(kept.end(), x.begin(), x.end());
    std::size_t k = 0;
    while (k < d && ++idx[k] == n_per_axis) idx[k++] = 0;
    if (k == d) break;
  }
  const std::size_t count = kept.size() / d;
  const double vol = omega.volume();
  out.volume_deficit = vol - cell_vol * static_cast<double>(count);
  if (count == 0) return out;
  const double m = vol / static_cast<double>(count);
  out.atoms.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.atoms.add(std::span<const double>(kept.data() + i * d, d), m);
  return out;
}

}  // namespace occlab
