#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "occlab/io.hpp"
#include "occlab/rng.hpp"

using namespace occlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "occlab_test_io";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& f, const std::string& s) { std::ofstream(f) << s; }

}  // namespace

TEST(Io, AtomsRoundTripExact) {
  Rng rng(SeedSpec{8, 0});
  WeightedAtoms mu(3, Space::Torus);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x{rng.uniform() - 0.5, rng.uniform() - 0.5, 1e-300 * rng.uniform()};
    mu.add(x, rng.uniform() / 3.0);
  }
  auto f = scratch("atoms.csv");
  write_atoms_csv(f, mu);
  auto back = read_atoms_csv(f, Space::Torus);
  EXPECT_EQ(back.dim(), 3u);
  EXPECT_EQ(back.space(), Space::Torus);
  EXPECT_EQ(back.positions(), mu.positions());
  EXPECT_EQ(back.masses(), mu.masses());

  std::ifstream is(f);
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "x1,x2,x3,mass");
}

TEST(Io, EmptyMeasure) {
  auto f = scratch("empty.csv");
  write_atoms_csv(f, WeightedAtoms(2));
  auto back = read_atoms_csv(f);
  EXPECT_EQ(back.dim(), 2u);
  EXPECT_TRUE(back.empty());
}

TEST(Io, RejectsMalformedFiles) {
  auto f = scratch("bad.csv");
  write_text(f, "");
  EXPECT_THROW(read_atoms_csv(f), std::runtime_error);
  write_text(f, "a,b,mass\n1,2,3\n");
  EXPECT_THROW(read_atoms_csv(f), std::runtime_error);
  write_text(f, "x1,x2,mass\n1,2\n");
  EXPECT_THROW(read_atoms_csv(f), std::runtime_error);
  write_text(f, "x1,x2,mass\n1,2,-1\n");
  EXPECT_THROW(read_atoms_csv(f), std::runtime_error);
  write_text(f, "x1,x2,mass\n1,2x,1\n");
  EXPECT_ANY_THROW(read_atoms_csv(f));
  EXPECT_THROW(read_atoms_csv(scratch("missing.csv")), std::runtime_error);
}

TEST(Io, PlanCsvSumsToCost) {
  WeightedAtoms a(1), b(1);
  a.add(std::vector<double>{0.0}, 1.0);
  a.add(std::vector<double>{1.0}, 1.0);
  b.add(std::vector<double>{0.5}, 2.0);
  TransportProblem pb{a, b, 2.0};
  auto [plan, rep] = wasserstein_exact(pb);
  auto f = scratch("plan.csv");
  write_plan_csv(f, pb, plan);
  std::ifstream is(f);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "i,j,mass,cost_contrib");
  double total = 0;
  int rows = 0;
  while (std::getline(is, line)) {
    total += std::stod(line.substr(line.rfind(',') + 1));
    ++rows;
  }
  EXPECT_EQ(rows, 2);
  EXPECT_NEAR(total, plan.cost, 1e-15);
  EXPECT_NEAR(plan.cost, 0.5, 1e-15);
}
