#include "aphom/fft.hpp"

#include <cmath>
#include <complex>
#include <cstring>
#include <mutex>

#include <fftw3.h>

namespace aphom::fft {

using grid::DiscreteField;
using grid::Grid;

namespace {

std::mutex& planMutex() {
    static std::mutex m;
    return m;
}

struct R2CBuffers {
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    std::size_t nReal = 0, nSpec = 0;

    R2CBuffers(const Grid& g) {
        int dims[3] = {g.n, g.n, g.n};
        nReal = g.cells();
        nSpec = 1;
        for (int k = 0; k < g.dim - 1; ++k) nSpec *= static_cast<std::size_t>(g.n);
        nSpec *= static_cast<std::size_t>(g.n / 2 + 1);
        real = fftw_alloc_real(nReal);
        spec = fftw_alloc_complex(nSpec);
        std::lock_guard<std::mutex> lock(planMutex());
        fwd = fftw_plan_dft_r2c(g.dim, dims, real, spec, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r(g.dim, dims, spec, real, FFTW_ESTIMATE);
    }

    ~R2CBuffers() {
        std::lock_guard<std::mutex> lock(planMutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(real);
        fftw_free(spec);
    }
};

// Dirichlet data reaches here only through mollify's periodic-extension
// convolution, so only the FFT size is checked.
void requirePow2(const Grid& g, const char* what) {
    if (!g.powerOfTwo()) fail(ErrorKind::Config, std::string(what) + ": grid n must be a power of two >= 4");
}

int signedFreq(int idx, int n) { return idx <= n / 2 ? idx : idx - n; }

}  // namespace

Vec continuousFrequency(const Grid& g, const std::array<int, 3>& kt) {
    const double f = 2.0 * M_PI / g.boxSide;
    return {f * kt[0], f * kt[1], f * kt[2]};
}

double discreteLaplaceSymbol(const Grid& g, const std::array<int, 3>& kt) {
    const double h = g.h();
    double s = 0.0;
    for (int k = 0; k < g.dim; ++k) {
        const double sn = std::sin(M_PI * kt[k] / static_cast<double>(g.n));
        s += (2.0 / h) * (2.0 / h) * sn * sn;
    }
    return s;
}

DiscreteField applyMultiplier(const DiscreteField& u,
                              const std::function<double(const std::array<int, 3>&)>& mult) {
    const Grid& g = u.grid;
    requirePow2(g, "applyMultiplier");
    R2CBuffers buf(g);
    const std::size_t N = g.cells();
    const double scale = 1.0 / static_cast<double>(N);
    const int nHalf = g.n / 2 + 1;

    DiscreteField out(g, u.components);
    for (int c = 0; c < u.components; ++c) {
        std::memcpy(buf.real, u.data.data() + static_cast<std::size_t>(c) * N, N * sizeof(double));
        fftw_execute(buf.fwd);
        for (std::size_t s = 0; s < buf.nSpec; ++s) {
            std::size_t rest = s;
            std::array<int, 3> kt{0, 0, 0};
            kt[g.dim - 1] = static_cast<int>(rest % nHalf);  // last axis is the halved one
            rest /= nHalf;
            for (int k = g.dim - 2; k >= 0; --k) {
                kt[k] = signedFreq(static_cast<int>(rest % g.n), g.n);
                rest /= g.n;
            }
            const double m = mult(kt) * scale;
            buf.spec[s][0] *= m;
            buf.spec[s][1] *= m;
        }
        fftw_execute(buf.bwd);
        std::memcpy(out.data.data() + static_cast<std::size_t>(c) * N, buf.real, N * sizeof(double));
    }
    return out;
}

DiscreteField convolve(const DiscreteField& u, const std::vector<double>& kernel) {
    const Grid& g = u.grid;
    requirePow2(g, "convolve");
    const std::size_t N = g.cells();
    if (kernel.size() != N) fail(ErrorKind::Config, "convolve: kernel size mismatch");

    R2CBuffers buf(g);
    std::vector<std::complex<double>> kerHat(buf.nSpec);
    std::memcpy(buf.real, kernel.data(), N * sizeof(double));
    fftw_execute(buf.fwd);
    for (std::size_t s = 0; s < buf.nSpec; ++s) kerHat[s] = {buf.spec[s][0], buf.spec[s][1]};

    const double scale = 1.0 / static_cast<double>(N);
    DiscreteField out(g, u.components);
    for (int c = 0; c < u.components; ++c) {
        std::memcpy(buf.real, u.data.data() + static_cast<std::size_t>(c) * N, N * sizeof(double));
        fftw_execute(buf.fwd);
        for (std::size_t s = 0; s < buf.nSpec; ++s) {
            const std::complex<double> v(buf.spec[s][0], buf.spec[s][1]);
            const std::complex<double> r = v * kerHat[s] * scale;
            buf.spec[s][0] = r.real();
            buf.spec[s][1] = r.imag();
        }
        fftw_execute(buf.bwd);
        std::memcpy(out.data.data() + static_cast<std::size_t>(c) * N, buf.real, N * sizeof(double));
    }
    return out;
}

}  // namespace aphom::fft
