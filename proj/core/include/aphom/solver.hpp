#pragma once

#include <string>
#include <vector>

#include "aphom/coeff.hpp"
#include "aphom/grid.hpp"

namespace aphom::solver {

/// CSR matrix for -div(A grad .) + lambda on a grid. The (i=j) part of the
/// flux is discretized with staggered forward/backward differences and
/// face-midpoint coefficient sampling; mixed (i != j) couplings use the
/// symmetric centered form, so pointwise-symmetric A yields a symmetric
/// matrix. Unknown ordering is component-major: dof = c * cells + cell.
struct SparseOperator {
    int nRows = 0;
    std::vector<int> rowPtr;
    std::vector<int> col;
    std::vector<double> val;
    double lambda = 0.0;
    bool symmetric = false;
    grid::Grid gridRef;
    int components = 1;

    void apply(const std::vector<double>& x, std::vector<double>& y) const;
    std::vector<double> diagonal() const;
    double maxAbsEntry() const;
    /// max_ij |M - M^T| (structure-aware; for the symmetry invariant check)
    double asymmetry() const;
};

struct SolveReport {
    int iterations = 0;
    double finalRelativeResidual = 0.0;
    double wallTime = 0.0;
    std::string method;  // "PCG" | "BiCGStab" | "FFT"
};

/// Assembled system: operator plus the right-hand-side contribution that
/// inhomogeneous Dirichlet data folds in through ghost elimination.
struct AssembledSystem {
    SparseOperator op;
    std::vector<double> lift;  // add to the load vector
};

/// Periodic / homogeneous-Dirichlet assembly.
SparseOperator assemble(const coeff::CoefficientField& field, const grid::Grid& g, double lambda);

/// Dirichlet assembly with boundary data given as the trace of the smooth
/// global function fb. `scale` evaluates the coefficient at x/epsilonScale
/// (epsilonScale = 1 leaves it alone).
AssembledSystem assembleDirichlet(const coeff::CoefficientField& field, const grid::Grid& g, double lambda,
                                  const std::function<double(const Vec&, int)>& fb, double epsilonScale = 1.0);

/// Matrix-free application of the same discretization (independent path used
/// to test the assembly).
void applyOperator(const coeff::CoefficientField& field, const grid::Grid& g, double lambda,
                   const std::vector<double>& x, std::vector<double>& y, double epsilonScale = 1.0);

struct KrylovOptions {
    double tol = 1e-10;
    int maxIter = 200000;
};

/// Jacobi-preconditioned CG when the operator is symmetric, BiCGStab
/// otherwise. lambda = 0 on periodic grids enforces the mean-zero gauge and
/// rejects non-mean-zero loads.
std::pair<grid::DiscreteField, SolveReport> solveKrylov(const SparseOperator& op, const grid::DiscreteField& rhs,
                                                        const KrylovOptions& opts = {});

std::pair<std::vector<double>, SolveReport> solveKrylov(const SparseOperator& op, const std::vector<double>& rhs,
                                                        const KrylovOptions& opts = {});

/// Exact constant-coefficient solve of (-Laplace + lambda) u = rhs in the
/// discrete Fourier basis, using the discrete Laplacian symbol so it inverts
/// assemble(I, g, lambda). lambda = 0 requires mean-zero rhs (mean-zero gauge).
grid::DiscreteField solveFFT(const grid::Grid& g, double lambda, const grid::DiscreteField& rhs);

/// Relative residual ||b - M x|| / ||b||.
double relativeResidual(const SparseOperator& op, const std::vector<double>& x, const std::vector<double>& b);

}  // namespace aphom::solver
