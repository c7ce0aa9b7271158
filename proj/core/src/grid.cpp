#include "aphom/grid.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aphom/fft.hpp"

namespace aphom::grid {

namespace {

std::size_t strideOf(const Grid& g, int axis) {
    std::size_t s = 1;
    for (int k = g.dim - 1; k > axis; --k) s *= static_cast<std::size_t>(g.n);
    return s;
}

}  // namespace

DiscreteField sampleScalar(const Grid& g, const std::function<double(const Vec&)>& fn) {
    DiscreteField u(g, 1);
    const std::size_t N = g.cells();
    for (std::size_t f = 0; f < N; ++f) u.data[f] = fn(g.center(g.unflat(f)));
    return u;
}

DiscreteField gradient(const DiscreteField& u) {
    const Grid& g = u.grid;
    const double invH = 1.0 / g.h();
    DiscreteField out(g, u.components * g.dim);
    const std::size_t N = g.cells();
    for (int c = 0; c < u.components; ++c) {
        const double* src = u.data.data() + static_cast<std::size_t>(c) * N;
        for (int k = 0; k < g.dim; ++k) {
            const std::size_t stride = strideOf(g, k);
            double* dst = out.data.data() + static_cast<std::size_t>(c * g.dim + k) * N;
            for (std::size_t f = 0; f < N; ++f) {
                const int ik = static_cast<int>((f / stride) % g.n);
                double up;
                if (ik + 1 < g.n) {
                    up = src[f + stride];
                } else if (g.boundary == Boundary::Periodic) {
                    up = src[f - static_cast<std::size_t>(g.n - 1) * stride];
                } else {
                    up = -src[f];  // zero-trace ghost
                }
                dst[f] = (up - src[f]) * invH;
            }
        }
    }
    return out;
}

DiscreteField divergence(const DiscreteField& flux) {
    const Grid& g = flux.grid;
    if (flux.components % g.dim != 0) fail(ErrorKind::Config, "divergence: components not a multiple of dim");
    const int comps = flux.components / g.dim;
    const double invH = 1.0 / g.h();
    DiscreteField out(g, comps);
    const std::size_t N = g.cells();
    for (int c = 0; c < comps; ++c) {
        double* dst = out.data.data() + static_cast<std::size_t>(c) * N;
        for (int k = 0; k < g.dim; ++k) {
            const std::size_t stride = strideOf(g, k);
            const double* src = flux.data.data() + static_cast<std::size_t>(c * g.dim + k) * N;
            for (std::size_t f = 0; f < N; ++f) {
                const int ik = static_cast<int>((f / stride) % g.n);
                double here = src[f];
                double below;
                if (ik > 0) {
                    below = src[f - stride];
                } else if (g.boundary == Boundary::Periodic) {
                    below = src[f + static_cast<std::size_t>(g.n - 1) * stride];
                } else {
                    below = 0.0;  // adjoint convention at the lower wall
                }
                // negative adjoint of gradient; top Dirichlet face mirrors the ghost
                if (g.boundary == Boundary::Dirichlet && ik == g.n - 1) here *= 2.0;
                dst[f] += (here - below) * invH;
            }
        }
    }
    return out;
}

DiscreteField centeredDerivative(const DiscreteField& u, int axis) {
    const Grid& g = u.grid;
    const double invH = 1.0 / g.h();
    DiscreteField out(g, u.components);
    const std::size_t N = g.cells();
    const std::size_t stride = strideOf(g, axis);
    for (int c = 0; c < u.components; ++c) {
        const double* src = u.data.data() + static_cast<std::size_t>(c) * N;
        double* dst = out.data.data() + static_cast<std::size_t>(c) * N;
        for (std::size_t f = 0; f < N; ++f) {
            const int ik = static_cast<int>((f / stride) % g.n);
            if (g.boundary == Boundary::Periodic) {
                const double up = (ik + 1 < g.n) ? src[f + stride] : src[f - static_cast<std::size_t>(g.n - 1) * stride];
                const double dn = (ik > 0) ? src[f - stride] : src[f + static_cast<std::size_t>(g.n - 1) * stride];
                dst[f] = 0.5 * (up - dn) * invH;
            } else {
                if (ik == 0)
                    dst[f] = (src[f + stride] - src[f]) * invH;
                else if (ik == g.n - 1)
                    dst[f] = (src[f] - src[f - stride]) * invH;
                else
                    dst[f] = 0.5 * (src[f + stride] - src[f - stride]) * invH;
            }
        }
    }
    return out;
}

// ----------------------------------------------------------------------------
// Norms
// ----------------------------------------------------------------------------

namespace {

/// In-place circular sliding-window sum of width w along one axis.
void circularWindowSum(std::vector<double>& v, const Grid& g, int axis, int w) {
    const std::size_t stride = strideOf(g, axis);
    const int n = g.n;
    const std::size_t N = g.cells();
    std::vector<double> line(static_cast<std::size_t>(n));
    const std::size_t lines = N / static_cast<std::size_t>(n);
    for (std::size_t l = 0; l < lines; ++l) {
        // base index of this 1-D line
        const std::size_t block = stride * static_cast<std::size_t>(n);
        const std::size_t outer = l / stride;
        const std::size_t inner = l % stride;
        const std::size_t base = outer * block + inner;
        for (int i = 0; i < n; ++i) line[i] = v[base + static_cast<std::size_t>(i) * stride];
        double s = 0.0;
        for (int i = 0; i < w; ++i) s += line[i % n];
        for (int i = 0; i < n; ++i) {
            v[base + static_cast<std::size_t>(i) * stride] = s;
            s -= line[i];
            s += line[(i + w) % n];
        }
    }
}

}  // namespace

double windowedNorm(const DiscreteField& u, double p, double R) {
    const Grid& g = u.grid;
    if (!(R > 0.0)) fail(ErrorKind::Config, "windowedNorm: R must be positive");
    const int w = std::max(1, std::min(g.n, static_cast<int>(std::lround(2.0 * R / g.h()))));
    const std::size_t N = g.cells();

    std::vector<double> pw(N, 0.0);
    for (std::size_t f = 0; f < N; ++f) {
        double s2 = 0.0;
        for (int c = 0; c < u.components; ++c) {
            const double v = u.at(c, f);
            s2 += v * v;
        }
        pw[f] = (p == 2.0) ? s2 : std::pow(s2, 0.5 * p);
    }
    for (int k = 0; k < g.dim; ++k) circularWindowSum(pw, g, k, w);

    double cellsPerWindow = 1.0;
    for (int k = 0; k < g.dim; ++k) cellsPerWindow *= w;

    double best = 0.0;
    if (g.boundary == Boundary::Periodic) {
        for (std::size_t f = 0; f < N; ++f) best = std::max(best, pw[f]);
    } else {
        // only windows fully inside the box
        for (std::size_t f = 0; f < N; ++f) {
            const auto iv = g.unflat(f);
            bool ok = true;
            for (int k = 0; k < g.dim; ++k) ok = ok && iv[k] + w <= g.n;
            if (ok) best = std::max(best, pw[f]);
        }
    }
    return std::pow(best / cellsPerWindow, 1.0 / p);
}

double l2Norm(const DiscreteField& u) {
    double s = 0.0;
    for (double v : u.data) s += v * v;
    double cellVol = 1.0;
    for (int k = 0; k < u.grid.dim; ++k) cellVol *= u.grid.h();
    return std::sqrt(s * cellVol);
}

double rmsNorm(const DiscreteField& u) {
    double s = 0.0;
    const std::size_t N = u.cells();
    for (std::size_t f = 0; f < N; ++f) {
        double s2 = 0.0;
        for (int c = 0; c < u.components; ++c) s2 += u.at(c, f) * u.at(c, f);
        s += s2;
    }
    return std::sqrt(s / static_cast<double>(N));
}

double h1Norm(const DiscreteField& u) {
    const double a = l2Norm(u);
    const double b = l2Norm(gradient(u));
    return std::sqrt(a * a + b * b);
}

double maxAbs(const DiscreteField& u) {
    double s = 0.0;
    for (double v : u.data) s = std::max(s, std::abs(v));
    return s;
}

std::vector<double> componentMeans(const DiscreteField& u) {
    const std::size_t N = u.cells();
    std::vector<double> m(u.components, 0.0);
    for (int c = 0; c < u.components; ++c) {
        double s = 0.0;
        for (std::size_t f = 0; f < N; ++f) s += u.at(c, f);
        m[c] = s / static_cast<double>(N);
    }
    return m;
}

DiscreteField axpy(double a, const DiscreteField& x, const DiscreteField& y) {
    DiscreteField out = y;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += a * x.data[i];
    return out;
}

// ----------------------------------------------------------------------------
// Smoothing
// ----------------------------------------------------------------------------

DiscreteField mollify(const DiscreteField& u, double eps) {
    const Grid& g = u.grid;
    const double h = g.h();
    if (eps < 2.0 * h - 1e-12) fail(ErrorKind::Config, "mollify: eps < 2h under-resolves the kernel");
    const int r = static_cast<int>(std::floor(eps / h - 1e-12));

    // bump weights on the cell-offset stencil, normalized on the grid
    const int width = 2 * r + 1;
    std::size_t stencil = 1;
    for (int k = 0; k < g.dim; ++k) stencil *= static_cast<std::size_t>(width);
    std::vector<double> wts(stencil, 0.0);
    std::vector<std::array<int, 3>> offs(stencil);
    double wsum = 0.0;
    for (std::size_t s = 0; s < stencil; ++s) {
        std::size_t rest = s;
        double r2 = 0.0;
        std::array<int, 3> off{0, 0, 0};
        for (int k = g.dim - 1; k >= 0; --k) {
            off[k] = static_cast<int>(rest % width) - r;
            rest /= width;
            r2 += (off[k] * h) * (off[k] * h);
        }
        const double s2 = r2 / (eps * eps);
        offs[s] = off;
        if (s2 < 1.0) {
            wts[s] = std::exp(-1.0 / (1.0 - s2));
            wsum += wts[s];
        }
    }
    for (double& w : wts) w /= wsum;

    const std::size_t N = g.cells();
    if (stencil > 2048 && g.powerOfTwo()) {
        // large kernel: circular FFT convolution
        std::vector<double> kernel(N, 0.0);
        for (std::size_t s = 0; s < stencil; ++s) {
            if (wts[s] == 0.0) continue;
            std::array<int, 3> iv{0, 0, 0};
            for (int k = 0; k < g.dim; ++k) iv[k] = g.wrap(offs[s][k]);
            kernel[g.flat(iv)] += wts[s];
        }
        return fft::convolve(u, kernel);
    }

    DiscreteField out(g, u.components);
    for (int c = 0; c < u.components; ++c) {
        const double* src = u.data.data() + static_cast<std::size_t>(c) * N;
        double* dst = out.data.data() + static_cast<std::size_t>(c) * N;
        for (std::size_t f = 0; f < N; ++f) {
            const auto iv = g.unflat(f);
            double acc = 0.0;
            for (std::size_t s = 0; s < stencil; ++s) {
                if (wts[s] == 0.0) continue;
                std::array<int, 3> jv{0, 0, 0};
                for (int k = 0; k < g.dim; ++k) jv[k] = g.wrap(iv[k] + offs[s][k]);
                acc += wts[s] * src[g.flat(jv)];
            }
            dst[f] = acc;
        }
    }
    return out;
}

DiscreteField heatSmooth(const DiscreteField& u, double t) {
    const Grid& g = u.grid;
    if (g.boundary != Boundary::Periodic) fail(ErrorKind::Config, "heatSmooth: periodic grids only");
    if (!(t >= 0.0)) fail(ErrorKind::Config, "heatSmooth: t must be nonnegative");
    return fft::applyMultiplier(u, [&](const std::array<int, 3>& kt) {
        const Vec xi = fft::continuousFrequency(g, kt);
        return std::exp(-t * dot(xi, xi));
    });
}

DiscreteField cutoff(const Grid& g, double delta) {
    if (g.boundary != Boundary::Dirichlet) fail(ErrorKind::Config, "cutoff: Dirichlet grids only");
    if (!(delta > 0.0)) fail(ErrorKind::Config, "cutoff: delta must be positive");
    DiscreteField eta(g, 1);
    const std::size_t N = g.cells();
    for (std::size_t f = 0; f < N; ++f) {
        const Vec x = g.center(g.unflat(f));
        double dist = g.boxSide;
        for (int k = 0; k < g.dim; ++k) dist = std::min({dist, x[k], g.boxSide - x[k]});
        double s;
        if (dist <= delta)
            s = 0.0;
        else if (dist >= 2.0 * delta)
            s = 1.0;
        else {
            const double v = (dist - delta) / delta;
            s = v * v * (3.0 - 2.0 * v);  // smoothstep, |d/ddist| <= 1.5/delta
        }
        eta.data[f] = s;
    }
    return eta;
}

// ----------------------------------------------------------------------------
// Persistence
// ----------------------------------------------------------------------------

void saveApf(const std::string& path, const DiscreteField& u) {
    nlohmann::json hdr;
    hdr["dim"] = u.grid.dim;
    hdr["n"] = u.grid.n;
    hdr["boxSide"] = u.grid.boxSide;
    hdr["components"] = u.components;
    hdr["boundary"] = u.grid.boundary == Boundary::Periodic ? "periodic" : "dirichlet";
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Config, "cannot write " + path);
    out << hdr.dump() << "\n";
    // payload is native x86 little-endian float64
    out.write(reinterpret_cast<const char*>(u.data.data()),
              static_cast<std::streamsize>(u.data.size() * sizeof(double)));
}

DiscreteField loadApf(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Config, "cannot open " + path);
    std::string header;
    std::getline(in, header);
    nlohmann::json hdr = nlohmann::json::parse(header);
    Grid g;
    g.dim = hdr.at("dim").get<int>();
    g.n = hdr.at("n").get<int>();
    g.boxSide = hdr.at("boxSide").get<double>();
    g.boundary = hdr.at("boundary").get<std::string>() == "periodic" ? Boundary::Periodic : Boundary::Dirichlet;
    DiscreteField u(g, hdr.at("components").get<int>());
    in.read(reinterpret_cast<char*>(u.data.data()), static_cast<std::streamsize>(u.data.size() * sizeof(double)));
    if (!in) fail(ErrorKind::Config, "truncated payload in " + path);
    return u;
}

}  // namespace aphom::grid
