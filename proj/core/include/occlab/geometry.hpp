#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace occlab {

enum class Space { Euclidean, Torus };

// Reduce a coordinate into [-1/2, 1/2).
double wrap_unit(double v);

class Point {
public:
  Point() = default;
  explicit Point(std::vector<double> coords);
  Point(std::initializer_list<double> coords);

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  double& operator[](std::size_t i) { return coords_[i]; }
  std::span<const double> coords() const { return coords_; }
  std::span<double> coords() { return coords_; }
  double norm() const;

private:
  std::vector<double> coords_;
};

// Point of the flat torus, canonical representative in [-1/2, 1/2)^d.
class TorusPoint {
public:
  TorusPoint() = default;
  explicit TorusPoint(std::vector<double> coords);
  TorusPoint(std::initializer_list<double> coords);

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const { return coords_; }

private:
  std::vector<double> coords_;
};

double flat_distance(const TorusPoint& x, const TorusPoint& y);
// Raw-coordinate variants used in inner loops; inputs need not be canonical
// for the torus version.
double flat_distance(std::span<const double> x, std::span<const double> y);
double euclid_distance(std::span<const double> x, std::span<const double> y);
double distance(Space s, std::span<const double> x, std::span<const double> y);

struct Ball {
  Point center;
  double radius;
};

struct Cube {
  Point center;
  double side;
};

class Domain {
public:
  static Domain ball(Point center, double radius, Space space = Space::Euclidean);
  static Domain cube(Point center, double side, Space space = Space::Euclidean);

  bool is_ball() const { return std::holds_alternative<Ball>(shape_); }
  bool is_cube() const { return std::holds_alternative<Cube>(shape_); }
  const Ball& as_ball() const { return std::get<Ball>(shape_); }
  const Cube& as_cube() const { return std::get<Cube>(shape_); }
  Space space() const { return space_; }
  std::size_t dim() const;
  const Point& center() const;

  // Closed membership.
  bool contains(std::span<const double> x) const;
  // Lebesgue measure.
  double volume() const;
  // Radius of the smallest centered ball containing the domain.
  double circumradius() const;
  double diameter() const { return 2.0 * circumradius(); }
  // Distance from x to the domain (0 inside).
  double gap(std::span<const double> x) const;
  // Distance from an interior point x to the boundary (0 outside).
  double depth(std::span<const double> x) const;
  // Nearest point of the boundary, written to out (same coordinate frame as x).
  void project_to_boundary(std::span<const double> x, std::span<double> out) const;
  // x - center, wrapped on the torus.
  void offset(std::span<const double> x, std::span<double> out) const;

private:
  Domain(std::variant<Ball, Cube> s, Space space) : shape_(std::move(s)), space_(space) {}
  std::variant<Ball, Cube> shape_;
  Space space_;
};

double unit_ball_volume(std::size_t d);

// Finite atomic measure; positions stored flat, row-major.
class WeightedAtoms {
public:
  WeightedAtoms() = default;
  explicit WeightedAtoms(std::size_t dim, Space space = Space::Euclidean) : dim_(dim), space_(space) {}

  std::size_t dim() const { return dim_; }
  Space space() const { return space_; }
  std::size_t size() const { return masses_.size(); }
  bool empty() const { return masses_.empty(); }
  double total_mass() const { return total_; }

  std::span<const double> position(std::size_t i) const {
    return {positions_.data() + i * dim_, dim_};
  }
  double mass(std::size_t i) const { return masses_[i]; }
  const std::vector<double>& positions() const { return positions_; }
  const std::vector<double>& masses() const { return masses_; }

  void reserve(std::size_t n);
  void add(std::span<const double> x, double mass);
  // Multiply every mass by a > 0.
  void scale_masses(double a);
  // Recompute the cached total from scratch.
  void recompute_total();

private:
  std::size_t dim_ = 0;
  Space space_ = Space::Euclidean;
  std::vector<double> positions_;
  std::vector<double> masses_;
  double total_ = 0.0;
};

WeightedAtoms dilate_measure(const WeightedAtoms& mu, double rho);
WeightedAtoms translate_measure(const WeightedAtoms& mu, const Point& x);
WeightedAtoms restrict_measure(const WeightedAtoms& mu, const Domain& omega);
// Total mass of mu inside omega, without materializing the restriction.
double mass_in(const WeightedAtoms& mu, const Domain& omega);

struct Discretization {
  WeightedAtoms atoms;
  double cell_side = 0.0;
  // |Omega| minus the raw covered volume before rescaling (zero for cubes).
  double volume_deficit = 0.0;
};

Discretization uniform_discretization(const Domain& omega, int n_per_axis);

}  // namespace occlab
