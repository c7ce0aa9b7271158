#pragma once

#include <vector>

#include "aphom/coeff.hpp"
#include "aphom/grid.hpp"
#include "aphom/report.hpp"
#include "aphom/solver.hpp"
#include "aphom/tensor.hpp"

namespace aphom::corrector {

/// Approximate correctors chi_T for one (field, T, grid): the d*m columns
/// chi_{T,j}^beta, each with m components, solving
///   -div(A grad chi) + T^-2 chi = div(A grad P_j^beta)
/// on the periodic box. Column (j, beta) lives at component (j*m+beta)*m+alpha.
struct CorrectorSet {
    coeff::CoefficientField field;  // owned copy: sets outlive their source
    double T = 1.0;
    grid::Grid box;
    grid::DiscreteField chi;                     // m*(d*m) components
    grid::DiscreteField gradChi;                 // staggered: chi components x dim
    std::vector<solver::SolveReport> diagnostics;

    int columns() const { return field.dim * field.m; }
    int compIndex(int j, int beta, int alpha) const { return (j * field.m + beta) * field.m + alpha; }

    /// One column (j,beta) as an m-component field.
    grid::DiscreteField column(int j, int beta) const;
};

struct EffectiveTensor {
    Tensor4 values;
    double T = 0.0;
    Tensor4 symmetricPart;
    Tensor4 skewPart;
    double eigMin = 0.0;  // of the symmetric part
    double eigMax = 0.0;
};

/// b_T, phi_T, h_T for one corrector set, all cell-centered.
struct DualCorrectorSet {
    grid::DiscreteField bT;      // d*m*d*m components, Tensor4 flat order
    Tensor4 bTmean;
    grid::DiscreteField phiT;    // same layout as bT
    grid::DiscreteField hT;      // d*m*m components, index (j*m+alpha)*m+beta
    std::vector<solver::SolveReport> diagnostics;
};

struct CorrectorOptions {
    solver::KrylovOptions krylov;
    int threads = 1;
    bool keepDiagnostics = true;
};

/// Box rule: periodic fields solve on a whole number of periods; otherwise
/// side 8T (Green's function decay exp(-|x|/T) makes truncation error ~ e^-8).
/// h resolves the fastest oscillation: h <= 2*pi / (16 max|omega|).
grid::Grid correctorGrid(const coeff::CoefficientField& field, double T, int maxCellsPerSide = 1 << 14,
                         double minBoxSide = 4.0);

CorrectorSet solveCorrector(const coeff::CoefficientField& field, double T, const grid::Grid& g,
                            const CorrectorOptions& opts = {});

/// A_T = box average of A + A grad chi_T, computed with the scheme's own flux
/// sampling so the adjoint identity eff(A*) = eff(A)^T holds to solver
/// tolerance.
EffectiveTensor effectiveTensor(const CorrectorSet& cs);

/// Cell-centered flux discrepancy b_T = A + A grad chi_T - A_T, the dual
/// correctors -Lap phi + T^-2 phi = b_T - <b_T> (FFT), and h_T = d_i phi_{T,ij}.
DualCorrectorSet fluxAndDual(const CorrectorSet& cs, const EffectiveTensor& eff, int threads = 1);

/// Residual fields for the structural identities, both O(h^2):
///   divB:  d_i b_{T,ij} - T^-2 chi_{T,j}
///   recon: b_T - [<b_T> - d_k(d_k phi_ij - d_i phi_kj) - d_i(d_k phi_kj) + T^-2 phi_ij]
struct FluxIdentityResiduals {
    double divBRel = 0.0;   // ||d_i b_ij - T^-2 chi_j||_2 / ||b||_2
    double reconRel = 0.0;  // reconstruction residual, relative to ||b||_2
};
FluxIdentityResiduals fluxIdentityResiduals(const CorrectorSet& cs, const DualCorrectorSet& dual);

struct StudyOptions {
    CorrectorOptions corr;
    double windowR = 1.0;  // S^2_R window for the measured norms
    grid::Grid commonGrid; // used when explicit; otherwise correctorGrid per T
    bool useCommonGrid = false;
};

/// Norm growth of chi_T and grad chi_T vs T with fitted log-log slopes.
report::ExperimentReport growthStudy(const coeff::CoefficientField& field, const std::vector<double>& Ts,
                                     const StudyOptions& opts = {});

/// ||chi_T - chi_2T||_{S^2_1} decay on a common grid; fitted exponent beta.
report::ExperimentReport cauchyStudy(const coeff::CoefficientField& field, const std::vector<double>& Ts,
                                     const StudyOptions& opts = {});

}  // namespace aphom::corrector
