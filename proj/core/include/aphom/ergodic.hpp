#pragma once

#include <vector>

#include "aphom/coeff.hpp"
#include "aphom/grid.hpp"
#include "aphom/report.hpp"

namespace aphom::ergodic {

/// omega_k(g; L, R) for a periodic grid function: sup over sampled y-shifts,
/// inf over a z-lattice (both snapped to grid nodes, wrapped on the torus) of
/// the windowed S^2_R norm of the k-fold difference.
double omegaGrid(const grid::DiscreteField& g, int k, double L, double R, const coeff::SamplingPlan& plan,
                 const std::vector<double>* periodHint = nullptr);

/// Both sides of the oscillation-gradient inequality
///   ||u||_{S^2_R} <= |M| + C { sup_y inf_z ||D_yz u||_{S^2_R} + L ||grad u||_{S^2_R} }
/// returned with C = 1 (raw components) so tests calibrate C themselves.
struct OscillationParts {
    double lhs = 0.0;
    double absMean = 0.0;
    double diffTerm = 0.0;
    double gradTerm = 0.0;  // already multiplied by L
};
OscillationParts oscillationBound(const grid::DiscreteField& u, double L, double R, const coeff::SamplingPlan& plan);

/// Heat-kernel decay of a mean-zero grid function against
///   ||g*Phi_t||_inf <= C { omega_k(g;L,R) + exp(-c t/(k L^2)) ||g||_{S^2_R} }
/// and the gradient variant with an extra 1/sqrt(t). (C, c) are calibrated on
/// the first half of the t grid and asserted across all of it.
struct HeatDecayOptions {
    int k = 1;
    double L = 1.0;
    double R = 1.0;
    std::vector<double> tList;
    coeff::SamplingPlan plan;
    std::vector<double> periodHint;  // nonempty: z search snaps y mod period
};
report::ExperimentReport heatDecay(const grid::DiscreteField& g, const HeatDecayOptions& opts);

/// Both sides of the reconstruction estimate: ||g||_{S^2_1} vs the
/// omega_k(g;L,T) term plus the integral of inf_L { omega_k(grad g; L, t)
/// + exp(-c t^2/L^2) ||grad g||_{S^2_t} } over a log-spaced t grid, inf over
/// a geometric L menu {1, 2, 4, ..., t}.
struct ReconstructionParts {
    double lhs = 0.0;
    double headTerm = 0.0;
    double integral = 0.0;
    std::vector<double> tGrid;
    std::vector<double> integrand;
};
ReconstructionParts reconstructionBound(const grid::DiscreteField& g, int k, double T, double c,
                                        const coeff::SamplingPlan& plan, int tPoints = 9);

/// Table of rho_k(L, t) samples on an (L, t) product grid.
struct RhoTable {
    std::vector<double> Ls;
    std::vector<double> ts;
    std::vector<std::vector<double>> rho;  // rho[iL][it]

    double value(int iL, int it) const { return rho[iL][it]; }
};

struct ThetaSpec {
    int k = 1;
    double sigma = 0.5;
    double c = 0.1;
    RhoTable rhoSamples;
    double T = 8.0;
};

struct ThetaRow {
    double t = 0.0, Lstar = 0.0, rho = 0.0, expTerm = 0.0, integrand = 0.0;
};

/// Theta_{k,sigma}(T) = int_1^T inf_{1<=L<=t} { rho_k(L,t) + exp(-c t^2/L^2) }
/// (T/t)^sigma dt, trapezoid on the table's (log-spaced) t grid with linear
/// interpolation in log t at the endpoints. `rows`, when given, receives the
/// per-node breakdown (t, L*, rho, expTerm, integrand).
double thetaBound(const ThetaSpec& spec, std::vector<ThetaRow>* rows = nullptr);

/// rho table builder on geometric L and t grids (t doubles as the window R).
RhoTable buildRhoTable(const coeff::CoefficientField& field, int k, const std::vector<double>& Ls,
                       const std::vector<double>& ts, const coeff::SamplingPlan& plan, double qbar = 4.0);

}  // namespace aphom::ergodic
