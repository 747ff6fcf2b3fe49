#include "occlab/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace occlab {

namespace {

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  os.precision(17);
  return os;
}

}  // namespace

void write_atoms_csv(const std::filesystem::path& file, const WeightedAtoms& mu) {
  auto os = open_out(file);
  for (std::size_t k = 0; k < mu.dim(); ++k) os << 'x' << k + 1 << ',';
  os << "mass\n";
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (double v : mu.position(i)) os << v << ',';
    os << mu.mass(i) << '\n';
  }
}

WeightedAtoms read_atoms_csv(const std::filesystem::path& file, Space space) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot read " + file.string());
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(file.string() + ": empty file");
  std::size_t cols = 1;
  for (char c : line) cols += c == ',';
  if (cols < 2 || line.rfind("x1,", 0) != 0) throw std::runtime_error(file.string() + ": bad header");
  const std::size_t d = cols - 1;
  WeightedAtoms mu(d, space);
  std::vector<double> x(d);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = std::stod(cell, &used);
      if (used != cell.size()) throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": bad number");
      row.push_back(v);
    }
    if (row.size() != cols) throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": wrong column count");
    if (!(row.back() >= 0)) throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": negative mass");
    std::copy(row.begin(), row.end() - 1, x.begin());
    mu.add(x, row.back());
  }
  return mu;
}

void write_plan_csv(const std::filesystem::path& file, const TransportProblem& pb,
                    const TransportPlan& plan) {
  auto os = open_out(file);
  const Space sp = pb.metric == Metric::TorusFlat ? Space::Torus : Space::Euclidean;
  os << "i,j,mass,cost_contrib\n";
  for (const auto& e : plan.entries) {
    double c = std::pow(distance(sp, pb.source.position(e.i), pb.target.position(e.j)), pb.p);
    os << e.i << ',' << e.j << ',' << e.mass << ',' << e.mass * c << '\n';
  }
}

}  // namespace occlab
