#pragma once

#include "aphom/corrector.hpp"
#include "aphom/grid.hpp"
#include "aphom/report.hpp"

namespace aphom::twoscale {

/// K_{eps,delta} f = S_eps(eta_delta f): boundary cutoff then mollification.
/// Output vanishes on every node within delta - eps of the boundary, so the
/// periodic-extension convolution inside mollify never sees the wrap.
/// Requires delta >= 2 eps >= 4h.
grid::DiscreteField kSmooth(const grid::DiscreteField& f, double eps, double delta);

struct ExpansionInput {
    double epsilon = 0.125;
    double delta = 0.25;                     // >= 2*epsilon
    const grid::DiscreteField* uEps = nullptr;
    const grid::DiscreteField* u0 = nullptr;
    const corrector::CorrectorSet* correctors = nullptr;  // at scale T = 1/epsilon
    const corrector::EffectiveTensor* eff = nullptr;
    const coeff::CoefficientField* field = nullptr;
};

/// w_eps = u_eps - u0 - eps chi_{T,k}^beta(x/eps) K_{eps,delta}(d_k u0^beta)
/// plus the three residual fluxes of L_eps(w_eps):
///   r1_i = (ahat_ij - a_ij(x/eps)) (K(d_j u0) - d_j u0)
///   r2_i = b_{T,ij}(x/eps) K(d_j u0)
///   r3_i = eps a_ij(x/eps) chi_{T,k}(x/eps) d_j K(d_k u0)
struct Expansion {
    grid::DiscreteField wEps;
    double h1 = 0.0;
    double l2 = 0.0;
    double residual1 = 0.0;  // L2 norms of the residual fluxes
    double residual2 = 0.0;
    double residual3 = 0.0;
};

Expansion buildExpansion(const ExpansionInput& input, const grid::DiscreteField* bT = nullptr);

struct H1StudyOptions {
    std::vector<double> epsList;
    double boxSide = 1.0;     // Omega = [0, boxSide]^d
    int cellsPerEps = 16;     // h = eps / cellsPerEps
    double correctorBox = 4.0;
    solver::KrylovOptions krylov;
    coeff::SamplingPlan plan;
    int k = 1;
    double sigma = 0.5;
    int threads = 1;
    std::string dumpDir;  // nonempty: save w_eps fields as .apf
};

/// ||w_eps||_{H^1} against the measured delta(eps) of the H^1 error theorem,
/// assembled from corrector norms with the psi-proxy, floored at 2 eps.
report::ExperimentReport h1ErrorStudy(const coeff::CoefficientField& field,
                                      const std::function<double(const Vec&, int)>& force,
                                      const std::function<double(const Vec&, int)>& boundary,
                                      const H1StudyOptions& opts);

}  // namespace aphom::twoscale
