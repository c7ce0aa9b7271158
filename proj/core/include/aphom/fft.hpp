#pragma once

#include <functional>

#include "aphom/grid.hpp"

namespace aphom::fft {

/// Apply a real Fourier multiplier componentwise on a periodic power-of-two
/// grid: u_hat(k) *= mult(ktilde) with ktilde the signed integer frequency
/// vector (entries in (-n/2, n/2]). The zero mode is ktilde = 0.
grid::DiscreteField applyMultiplier(const grid::DiscreteField& u,
                                    const std::function<double(const std::array<int, 3>&)>& mult);

/// Circular convolution with a kernel given on the same grid (kernel centered
/// at cell index 0 with wrap-around support).
grid::DiscreteField convolve(const grid::DiscreteField& u, const std::vector<double>& kernel);

/// Symbol of the assembled (2d+1)-point Laplacian: sum_k (2/h sin(pi kt_k/n))^2.
double discreteLaplaceSymbol(const grid::Grid& g, const std::array<int, 3>& ktilde);

/// Continuous frequency vector xi = 2*pi*ktilde / boxSide.
Vec continuousFrequency(const grid::Grid& g, const std::array<int, 3>& ktilde);

}  // namespace aphom::fft
