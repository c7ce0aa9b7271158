#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aphom/util.hpp"

namespace aphom::grid {

enum class Boundary { Periodic, Dirichlet };

/// Uniform cell-centered grid on [0, boxSide]^dim with n cells per side.
/// Cell centers sit at (i + 1/2) h, h = boxSide / n. Periodic grids wrap;
/// Dirichlet grids carry their boundary through ghost-cell reflection.
struct Grid {
    int dim = 1;
    double boxSide = 1.0;
    int n = 4;
    Boundary boundary = Boundary::Periodic;

    double h() const { return boxSide / n; }

    std::size_t cells() const {
        std::size_t c = 1;
        for (int k = 0; k < dim; ++k) c *= static_cast<std::size_t>(n);
        return c;
    }

    bool powerOfTwo() const { return n >= 4 && (n & (n - 1)) == 0; }

    /// Row-major flat index, last axis fastest.
    std::size_t flat(const std::array<int, 3>& iv) const {
        std::size_t f = 0;
        for (int k = 0; k < dim; ++k) f = f * n + static_cast<std::size_t>(iv[k]);
        return f;
    }

    std::array<int, 3> unflat(std::size_t f) const {
        std::array<int, 3> iv{0, 0, 0};
        for (int k = dim - 1; k >= 0; --k) {
            iv[k] = static_cast<int>(f % n);
            f /= n;
        }
        return iv;
    }

    Vec center(const std::array<int, 3>& iv) const {
        Vec x{0.0, 0.0, 0.0};
        for (int k = 0; k < dim; ++k) x[k] = (iv[k] + 0.5) * h();
        return x;
    }

    int wrap(int i) const {
        int r = i % n;
        return r < 0 ? r + n : r;
    }

    bool operator==(const Grid& o) const {
        return dim == o.dim && n == o.n && boxSide == o.boxSide && boundary == o.boundary;
    }
};

/// Values of a scalar/vector/tensor field on a grid. Storage is
/// component-major: data[c * cells + flat]. Operations allocate fresh
/// outputs; a field is treated as immutable once built.
struct DiscreteField {
    Grid grid;
    int components = 1;
    std::vector<double> data;

    DiscreteField() = default;
    DiscreteField(const Grid& g, int comps)
        : grid(g), components(comps), data(static_cast<std::size_t>(comps) * g.cells(), 0.0) {}

    double& at(int c, std::size_t flat) { return data[static_cast<std::size_t>(c) * grid.cells() + flat]; }
    double at(int c, std::size_t flat) const { return data[static_cast<std::size_t>(c) * grid.cells() + flat]; }

    std::size_t cells() const { return grid.cells(); }
};

/// Fill a field by evaluating fn at cell centers.
DiscreteField sampleScalar(const Grid& g, const std::function<double(const Vec&)>& fn);

// ----------------------------------------------------------------------------
// Mimetic operators. gradient uses forward differences onto faces (the value
// with component index c*dim + k lives at x + h/2 e_k); divergence is its
// negative adjoint on periodic grids (summation by parts holds to rounding).
// On Dirichlet grids gradient assumes zero trace (odd ghost reflection), which
// is the case for every field whose H^1_0 norm we measure.
// ----------------------------------------------------------------------------
DiscreteField gradient(const DiscreteField& u);
DiscreteField divergence(const DiscreteField& flux);

/// Centered difference along one axis, cell-centered output. Dirichlet grids
/// use one-sided differences in the boundary ring.
DiscreteField centeredDerivative(const DiscreteField& u, int axis);

// ----------------------------------------------------------------------------
// Norms. Multi-component fields are measured through the pointwise Euclidean
// norm across components.
// ----------------------------------------------------------------------------

/// Sliding-cube maximum of windowed p-averages over all grid-aligned
/// positions: the S^p_R analogue on the torus (exact discrete sup). The
/// window is the cube of half-width R.
double windowedNorm(const DiscreteField& u, double p, double R);

/// Integral L^2 norm sqrt( h^d * sum |u|^2 ).
double l2Norm(const DiscreteField& u);

/// Root mean square, i.e. the B^2-style box average (f_box |u|^2)^{1/2}.
double rmsNorm(const DiscreteField& u);

double h1Norm(const DiscreteField& u);

double maxAbs(const DiscreteField& u);

/// Per-component means (uniform cell weights = trapezoid on the torus).
std::vector<double> componentMeans(const DiscreteField& u);

DiscreteField axpy(double a, const DiscreteField& x, const DiscreteField& y);  // a*x + y

// ----------------------------------------------------------------------------
// Smoothing
// ----------------------------------------------------------------------------

/// S_eps: convolution with the unit-mass bump c*exp(-1/(1-|x/eps|^2)),
/// discretized on the grid and normalized so constants are preserved exactly.
/// Requires eps >= 2h so the kernel is resolved. Dirichlet grids convolve
/// with periodic extension; callers are expected to feed data that vanishes
/// near the boundary (see twoscale::kSmooth).
DiscreteField mollify(const DiscreteField& u, double eps);

/// g * Phi_t via the Fourier multiplier exp(-t |xi|^2); periodic grids only.
/// Solves u_t = Laplace(u) exactly in the discrete Fourier basis.
DiscreteField heatSmooth(const DiscreteField& g, double t);

/// Boundary cutoff eta_delta on a Dirichlet box: 0 within delta of the
/// boundary, 1 beyond 2*delta, smoothstep ramp in between (|grad| <= 1.5/delta).
DiscreteField cutoff(const Grid& g, double delta);

// ----------------------------------------------------------------------------
// Persistence: one-line JSON header + raw little-endian float64 payload,
// component-major then row-major cells. Extension ".apf".
// ----------------------------------------------------------------------------
void saveApf(const std::string& path, const DiscreteField& u);
DiscreteField loadApf(const std::string& path);

}  // namespace aphom::grid
