#pragma once

#include <vector>

namespace aphom {

/// Dense symmetric n x n matrix in row-major storage.
struct SymEig {
    std::vector<double> values;   // ascending
    std::vector<double> vectors;  // column k = eigenvector of values[k], row-major
};

/// Cyclic Jacobi eigenvalue iteration. Intended for the small (d*m)^2 matrices
/// that show up in tensor diagnostics, not for grid-sized problems.
SymEig symmetricEigen(const std::vector<double>& a, int n);

/// Largest singular value of a dense n x n matrix (via eigen of A^T A).
double spectralNorm(const std::vector<double>& a, int n);

}  // namespace aphom
