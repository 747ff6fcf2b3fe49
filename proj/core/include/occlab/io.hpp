#pragma once

#include <filesystem>

#include "occlab/geometry.hpp"
#include "occlab/transport.hpp"

namespace occlab {

// Header x1,...,xd,mass; full round-trip precision.
void write_atoms_csv(const std::filesystem::path& file, const WeightedAtoms& mu);
WeightedAtoms read_atoms_csv(const std::filesystem::path& file, Space space = Space::Euclidean);

// Rows i,j,mass,cost_contrib where cost_contrib = mass * d(x_i, y_j)^p.
void write_plan_csv(const std::filesystem::path& file, const TransportProblem& pb,
                    const TransportPlan& plan);

}  // namespace occlab
