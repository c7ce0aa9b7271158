#pragma once

#include <functional>
#include <optional>

#include "aphom/corrector.hpp"
#include "aphom/grid.hpp"
#include "aphom/report.hpp"
#include "aphom/solver.hpp"

namespace aphom::bvp {

/// Component-valued source / boundary function: (x, component) -> value.
using FieldFn = std::function<double(const Vec&, int)>;

/// L_eps(u) = F in Omega, u = f on the boundary of the box [0, boxSide]^d.
/// epsilon = 0 requests the constant-coefficient solve with `effective`.
struct DirichletProblem {
    grid::Grid box;                // Dirichlet grid
    FieldFn force;                 // F, smooth closed form
    FieldFn boundary;              // trace of a smooth function
    double epsilon = 0.0;
    const coeff::CoefficientField* field = nullptr;   // used when epsilon > 0
    std::optional<Tensor4> effective;                 // used when epsilon == 0
    solver::KrylovOptions krylov;
};

std::pair<grid::DiscreteField, solver::SolveReport> solveDirichlet(const DirichletProblem& problem);

struct GradientProfile {
    Vec center{0, 0, 0};
    std::vector<double> radii;
    std::vector<double> values;  // (avg_{B(x0,r)} |grad u|^2)^{1/2}
    double epsilonFloor = 0.0;
};

/// Windowed gradient L2 means over balls B(x0, r); radii must stay inside the
/// domain and above the epsilon floor.
GradientProfile gradientProfile(const grid::DiscreteField& u, const Vec& x0, const std::vector<double>& rList,
                                double epsilon);

struct RateStudyOptions {
    std::vector<double> epsList;
    double boxSide = 1.0;
    int cellsPerEps = 16;       // per-eps grid: h = eps / cellsPerEps
    double correctorBox = 4.0;  // periodic y-box for the effective tensor
    solver::KrylovOptions krylov;
    int threads = 1;
    bool computeBound = false;  // also assemble the corrector-difference rhs bound (costly)
    int k = 1;
    double sigma = 0.5;
    double thetaC = 0.1;
    coeff::SamplingPlan plan;
};

/// ||u_eps - u0||_{L^2} / ||u0||_{H^2} vs eps with fitted slope; u0 solved
/// with A_hat at T_max = 1 / min(eps). Optionally reports the theorem's rhs
/// (corrector-difference norms with the psi-proxy plus T^-1 Theta).
report::ExperimentReport rateStudy(const coeff::CoefficientField& field, const FieldFn& force,
                                   const FieldFn& boundary, const RateStudyOptions& opts);

struct LiouvilleOptions {
    double sigma = 0.5;
    std::vector<double> Rlist;
    double rProbe = 1.0;   // fixed interior radius
    int cellsPerUnit = 16; // resolution per unit length
    solver::KrylovOptions krylov;
};

/// Solutions of L_1 u = 0 on boxes of growing size R with boundary data of
/// prescribed growth R^sigma; reports the interior gradient mean at fixed r
/// and asserts the decreasing trend.
report::ExperimentReport liouvilleProbe(const coeff::CoefficientField& field, const LiouvilleOptions& opts);

}  // namespace aphom::bvp
