#pragma once

#include <string>

#include "aphom/coeff.hpp"
#include "aphom/grid.hpp"

namespace testutil {

inline aphom::coeff::CoefficientField loadField(const std::string& name) {
    return aphom::coeff::CoefficientField::load(std::string(APHOM_CONFIG_DIR) + "/fields/" + name + ".json");
}

/// Small deterministic plan for unit tests; keeps the sup/inf loops cheap.
inline aphom::coeff::SamplingPlan tinyPlan(std::uint64_t seed = 7) {
    aphom::coeff::SamplingPlan p;
    p.centers = 8;
    p.quadPerAxis = 17;
    p.shifts = 12;
    p.zPerAxis = 8;
    p.supRadius = 8.0;
    p.seed = seed;
    return p;
}

inline aphom::grid::Grid periodicGrid(int dim, double ell, int n) {
    aphom::grid::Grid g;
    g.dim = dim;
    g.boxSide = ell;
    g.n = n;
    g.boundary = aphom::grid::Boundary::Periodic;
    return g;
}

inline aphom::grid::Grid dirichletGrid(int dim, double ell, int n) {
    aphom::grid::Grid g;
    g.dim = dim;
    g.boxSide = ell;
    g.n = n;
    g.boundary = aphom::grid::Boundary::Dirichlet;
    return g;
}

}  // namespace testutil
