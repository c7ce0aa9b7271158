#include "aphom/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "aphom/fft.hpp"

namespace aphom::solver {

using coeff::CoefficientField;
using grid::Boundary;
using grid::DiscreteField;
using grid::Grid;

// ----------------------------------------------------------------------------
// SparseOperator
// ----------------------------------------------------------------------------

void SparseOperator::apply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(nRows, 0.0);
    for (int r = 0; r < nRows; ++r) {
        double s = 0.0;
        for (int k = rowPtr[r]; k < rowPtr[r + 1]; ++k) s += val[k] * x[col[k]];
        y[r] = s;
    }
}

std::vector<double> SparseOperator::diagonal() const {
    std::vector<double> d(nRows, 0.0);
    for (int r = 0; r < nRows; ++r)
        for (int k = rowPtr[r]; k < rowPtr[r + 1]; ++k)
            if (col[k] == r) d[r] = val[k];
    return d;
}

double SparseOperator::maxAbsEntry() const {
    double m = 0.0;
    for (double v : val) m = std::max(m, std::abs(v));
    return m;
}

double SparseOperator::asymmetry() const {
    // columns are sorted within each row, so M(c,r) is a binary search away
    auto entry = [&](int r, int c) {
        const int lo = rowPtr[r], hi = rowPtr[r + 1];
        auto it = std::lower_bound(col.begin() + lo, col.begin() + hi, c);
        if (it != col.begin() + hi && *it == c) return val[it - col.begin()];
        return 0.0;
    };
    double worst = 0.0;
    for (int r = 0; r < nRows; ++r)
        for (int k = rowPtr[r]; k < rowPtr[r + 1]; ++k)
            worst = std::max(worst, std::abs(val[k] - entry(col[k], r)));
    return worst;
}

// ----------------------------------------------------------------------------
// Assembly. Hybrid stencil:
//   (i = j) flux through faces, coefficient at face midpoints (staggered);
//   (i != j) symmetric centered form C_i^T a_ij(cell) C_j.
// Dirichlet boundaries eliminate ghosts by odd reflection
//   u(ghost) = 2 f(boundary point) - u(mirror),
// recursively for corner ghosts; the f part goes into the lift vector.
// ----------------------------------------------------------------------------

namespace {

struct Entry {
    int colIdx;
    double v;
};

struct StencilContext {
    const CoefficientField* field;
    const Grid* g;
    double lambda;
    double epsScale;  // coefficient sampled at x / epsScale
    const std::function<double(const Vec&, int)>* fb;  // nullptr = homogeneous
    bool hasOffDiag;
};

/// Coefficient sample position. Periodic boxes wrap the raw coordinate first
/// (the periodization A(x mod l)), so the seam face gets one consistent value
/// and symmetric fields assemble to symmetric matrices.
Vec coeffPoint(const Grid& g, const std::array<double, 3>& x, double epsScale) {
    Vec y{0, 0, 0};
    for (int k = 0; k < g.dim; ++k) {
        double v = x[k];
        if (g.boundary == Boundary::Periodic) v -= g.boxSide * std::floor(v / g.boxSide);
        y[k] = v / epsScale;
    }
    return y;
}

/// Resolve a (possibly ghost) cell index into interior contributions plus a
/// boundary lift. coef multiplies u^beta at the resolved cell.
void resolveCell(const StencilContext& ctx, std::array<int, 3> jv, double coefV, int beta,
                 std::vector<Entry>& entries, double& lift) {
    const Grid& g = *ctx.g;
    const int n = g.n;
    for (int k = 0; k < g.dim; ++k) {
        if (jv[k] >= 0 && jv[k] < n) continue;
        if (g.boundary == Boundary::Periodic) {
            jv[k] = g.wrap(jv[k]);
            continue;
        }
        // boundary point: midpoint between ghost and mirror cell centers;
        // eliminating u(ghost) = 2 f(b) - u(mirror) moves -2 coef f(b) to the rhs
        std::array<double, 3> b{0, 0, 0};
        for (int l = 0; l < g.dim; ++l) b[l] = (jv[l] + 0.5) * g.h();
        b[k] = jv[k] < 0 ? 0.0 : g.boxSide;
        if (ctx.fb) lift -= 2.0 * coefV * (*ctx.fb)(Vec{b[0], b[1], b[2]}, beta);
        jv[k] = jv[k] < 0 ? -1 - jv[k] : 2 * n - 1 - jv[k];
        coefV = -coefV;
        // restart scan: the mirror may still be outside along another axis
        resolveCell(ctx, jv, coefV, beta, entries, lift);
        return;
    }
    entries.push_back({static_cast<int>(static_cast<std::size_t>(beta) * g.cells() + g.flat(jv)), coefV});
}

/// Emit the row for (alpha, cell iv). Returns sorted, merged entries.
void buildRow(const StencilContext& ctx, const std::array<int, 3>& iv, int alpha, std::vector<Entry>& entries,
              double& lift) {
    const Grid& g = *ctx.g;
    const CoefficientField& A = *ctx.field;
    const int m = A.m;
    const double h = g.h();
    const double invH2 = 1.0 / (h * h);
    entries.clear();
    lift = 0.0;

    const Vec xc = g.center(iv);

    // zeroth-order term
    resolveCell(ctx, iv, ctx.lambda, alpha, entries, lift);

    for (int i = 0; i < g.dim; ++i) {
        std::array<double, 3> xf{xc[0], xc[1], xc[2]};
        xf[i] = xc[i] + 0.5 * h;
        const Vec yPlus = coeffPoint(g, xf, ctx.epsScale);
        xf[i] = xc[i] - 0.5 * h;
        const Vec yMinus = coeffPoint(g, xf, ctx.epsScale);

        for (int beta = 0; beta < m; ++beta) {
            const double af = A.entry(yPlus, i, alpha, i, beta);
            const double ab = A.entry(yMinus, i, alpha, i, beta);
            std::array<int, 3> up = iv, dn = iv;
            ++up[i];
            --dn[i];
            resolveCell(ctx, iv, (af + ab) * invH2, beta, entries, lift);
            resolveCell(ctx, up, -af * invH2, beta, entries, lift);
            resolveCell(ctx, dn, -ab * invH2, beta, entries, lift);
        }

        if (!ctx.hasOffDiag) continue;
        for (int j = 0; j < g.dim; ++j) {
            if (j == i) continue;
            // -C_i(a_ij C_j u): coefficient at the +/- e_i neighbor cells
            std::array<int, 3> ivp = iv, ivm = iv;
            ++ivp[i];
            --ivm[i];
            std::array<double, 3> xp{(ivp[0] + 0.5) * h, (ivp[1] + 0.5) * h, (ivp[2] + 0.5) * h};
            std::array<double, 3> xm{(ivm[0] + 0.5) * h, (ivm[1] + 0.5) * h, (ivm[2] + 0.5) * h};
            const Vec yp = coeffPoint(g, xp, ctx.epsScale);
            const Vec ym = coeffPoint(g, xm, ctx.epsScale);
            for (int beta = 0; beta < m; ++beta) {
                const double ap = A.entry(yp, i, alpha, j, beta) * 0.25 * invH2;
                const double am = A.entry(ym, i, alpha, j, beta) * 0.25 * invH2;
                std::array<int, 3> c1 = ivp, c2 = ivp, c3 = ivm, c4 = ivm;
                ++c1[j];
                --c2[j];
                ++c3[j];
                --c4[j];
                resolveCell(ctx, c1, -ap, beta, entries, lift);
                resolveCell(ctx, c2, +ap, beta, entries, lift);
                resolveCell(ctx, c3, +am, beta, entries, lift);
                resolveCell(ctx, c4, -am, beta, entries, lift);
            }
        }
    }

    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.colIdx < b.colIdx; });
    std::size_t w = 0;
    for (std::size_t r = 0; r < entries.size(); ++r) {
        if (w > 0 && entries[w - 1].colIdx == entries[r].colIdx)
            entries[w - 1].v += entries[r].v;
        else
            entries[w++] = entries[r];
    }
    entries.resize(w);
}

bool fieldHasOffDiag(const CoefficientField& A) {
    auto off = [&](const Tensor4& t) {
        for (int i = 0; i < A.dim; ++i)
            for (int a = 0; a < A.m; ++a)
                for (int j = 0; j < A.dim; ++j)
                    for (int b = 0; b < A.m; ++b)
                        if (i != j && t(i, a, j, b) != 0.0) return true;
        return false;
    };
    if (off(A.constTerm)) return true;
    for (const auto& mo : A.modes)
        if (off(mo.cosAmp) || off(mo.sinAmp)) return true;
    return false;
}

bool fieldPointwiseSymmetric(const CoefficientField& A) {
    auto sym = [&](const Tensor4& t) {
        Tensor4 skew = t.skewPart();
        return skew.maxAbs() <= 1e-14 * std::max(1.0, t.maxAbs());
    };
    if (!sym(A.constTerm)) return false;
    for (const auto& mo : A.modes)
        if (!sym(mo.cosAmp) || !sym(mo.sinAmp)) return false;
    return true;
}

AssembledSystem assembleImpl(const CoefficientField& field, const Grid& g, double lambda,
                             const std::function<double(const Vec&, int)>* fb, double epsScale) {
    if (lambda < 0.0) fail(ErrorKind::Config, "assemble: lambda must be nonnegative");
    if (!field.certifiedElliptic())
        fail(ErrorKind::Field, "assemble: field fails the ellipticity certificate");
    if (field.dim != g.dim) fail(ErrorKind::Config, "assemble: field/grid dimension mismatch");

    StencilContext ctx{&field, &g, lambda, epsScale, fb, fieldHasOffDiag(field)};
    const std::size_t N = g.cells();
    const int m = field.m;
    const int rows = static_cast<int>(N) * m;

    AssembledSystem sys;
    sys.op.nRows = rows;
    sys.op.lambda = lambda;
    sys.op.gridRef = g;
    sys.op.components = m;
    sys.op.symmetric = fieldPointwiseSymmetric(field);
    sys.op.rowPtr.reserve(rows + 1);
    sys.op.rowPtr.push_back(0);
    sys.lift.assign(rows, 0.0);

    std::vector<Entry> entries;
    entries.reserve(64);
    for (int alpha = 0; alpha < m; ++alpha) {
        for (std::size_t f = 0; f < N; ++f) {
            double lift = 0.0;
            buildRow(ctx, g.unflat(f), alpha, entries, lift);
            for (const Entry& e : entries) {
                sys.op.col.push_back(e.colIdx);
                sys.op.val.push_back(e.v);
            }
            sys.op.rowPtr.push_back(static_cast<int>(sys.op.col.size()));
            sys.lift[static_cast<std::size_t>(alpha) * N + f] = lift;
        }
    }
    return sys;
}

}  // namespace

SparseOperator assemble(const CoefficientField& field, const Grid& g, double lambda) {
    return assembleImpl(field, g, lambda, nullptr, 1.0).op;
}

AssembledSystem assembleDirichlet(const CoefficientField& field, const Grid& g, double lambda,
                                  const std::function<double(const Vec&, int)>& fb, double epsScale) {
    if (g.boundary != Boundary::Dirichlet) fail(ErrorKind::Config, "assembleDirichlet: needs a Dirichlet grid");
    return assembleImpl(field, g, lambda, &fb, epsScale);
}

void applyOperator(const CoefficientField& field, const Grid& g, double lambda, const std::vector<double>& x,
                   std::vector<double>& y, double epsScale) {
    // independent matrix-free path: flux assembly through the same sampling
    // conventions, written against the raw arrays
    const std::size_t N = g.cells();
    const int m = field.m;
    const double h = g.h();
    const bool offdiag = fieldHasOffDiag(field);
    y.assign(x.size(), 0.0);

    auto u = [&](int beta, std::array<int, 3> jv, auto&& self) -> double {
        for (int k = 0; k < g.dim; ++k) {
            if (jv[k] >= 0 && jv[k] < g.n) continue;
            if (g.boundary == Boundary::Periodic) {
                jv[k] = g.wrap(jv[k]);
                continue;
            }
            jv[k] = jv[k] < 0 ? -1 - jv[k] : 2 * g.n - 1 - jv[k];
            return -self(beta, jv, self);  // homogeneous odd reflection
        }
        return x[static_cast<std::size_t>(beta) * N + g.flat(jv)];
    };

    for (int alpha = 0; alpha < m; ++alpha) {
        for (std::size_t f = 0; f < N; ++f) {
            const auto iv = g.unflat(f);
            const Vec xc = g.center(iv);
            double acc = lambda * u(alpha, iv, u);
            for (int i = 0; i < g.dim; ++i) {
                std::array<double, 3> xf{xc[0], xc[1], xc[2]};
                xf[i] = xc[i] + 0.5 * h;
                const Vec yPlus = coeffPoint(g, xf, epsScale);
                xf[i] = xc[i] - 0.5 * h;
                const Vec yMinus = coeffPoint(g, xf, epsScale);
                std::array<int, 3> up = iv, dn = iv;
                ++up[i];
                --dn[i];
                for (int beta = 0; beta < m; ++beta) {
                    const double gUp = (u(beta, up, u) - u(beta, iv, u)) / h;
                    const double gDn = (u(beta, iv, u) - u(beta, dn, u)) / h;
                    acc -= (field.entry(yPlus, i, alpha, i, beta) * gUp -
                            field.entry(yMinus, i, alpha, i, beta) * gDn) /
                           h;
                }
                if (!offdiag) continue;
                for (int j = 0; j < g.dim; ++j) {
                    if (j == i) continue;
                    std::array<int, 3> ivp = iv, ivm = iv;
                    ++ivp[i];
                    --ivm[i];
                    std::array<double, 3> xp{(ivp[0] + 0.5) * h, (ivp[1] + 0.5) * h, (ivp[2] + 0.5) * h};
                    std::array<double, 3> xm{(ivm[0] + 0.5) * h, (ivm[1] + 0.5) * h, (ivm[2] + 0.5) * h};
                    const Vec yp = coeffPoint(g, xp, epsScale);
                    const Vec ym = coeffPoint(g, xm, epsScale);
                    for (int beta = 0; beta < m; ++beta) {
                        std::array<int, 3> c1 = ivp, c2 = ivp, c3 = ivm, c4 = ivm;
                        ++c1[j];
                        --c2[j];
                        ++c3[j];
                        --c4[j];
                        const double cjp = (u(beta, c1, u) - u(beta, c2, u)) / (2.0 * h);
                        const double cjm = (u(beta, c3, u) - u(beta, c4, u)) / (2.0 * h);
                        acc -= (field.entry(yp, i, alpha, j, beta) * cjp -
                                field.entry(ym, i, alpha, j, beta) * cjm) /
                               (2.0 * h);
                    }
                }
            }
            y[static_cast<std::size_t>(alpha) * N + f] = acc;
        }
    }
}

// ----------------------------------------------------------------------------
// Krylov solvers
// ----------------------------------------------------------------------------

namespace {

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dotv(a, a)); }

void removeComponentMeans(std::vector<double>& v, int comps) {
    const std::size_t N = v.size() / comps;
    for (int c = 0; c < comps; ++c) {
        double s = 0.0;
        for (std::size_t f = 0; f < N; ++f) s += v[static_cast<std::size_t>(c) * N + f];
        s /= static_cast<double>(N);
        for (std::size_t f = 0; f < N; ++f) v[static_cast<std::size_t>(c) * N + f] -= s;
    }
}

}  // namespace

std::pair<std::vector<double>, SolveReport> solveKrylov(const SparseOperator& op, const std::vector<double>& rhs,
                                                        const KrylovOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> b = rhs;
    const bool gauge = op.lambda == 0.0 && op.gridRef.boundary == Boundary::Periodic;
    if (gauge) {
        const std::size_t N = b.size() / op.components;
        for (int c = 0; c < op.components; ++c) {
            double s = 0.0;
            for (std::size_t f = 0; f < N; ++f) s += b[static_cast<std::size_t>(c) * N + f];
            s /= static_cast<double>(N);
            const double scale = norm(b) / std::sqrt(static_cast<double>(b.size())) + 1e-300;
            if (std::abs(s) > 1e-8 * scale + 1e-14)
                fail(ErrorKind::Solver, "solveKrylov: singular system (lambda=0 with non-mean-zero rhs)");
            for (std::size_t f = 0; f < N; ++f) b[static_cast<std::size_t>(c) * N + f] -= s;
        }
    }

    const double bNorm = norm(b);
    std::vector<double> x(b.size(), 0.0);
    SolveReport rep;
    if (bNorm == 0.0) {
        rep.method = op.symmetric ? "PCG" : "BiCGStab";
        rep.wallTime = 0.0;
        return {x, rep};
    }

    std::vector<double> diag = op.diagonal();
    for (double& d : diag) d = (d != 0.0) ? 1.0 / d : 1.0;
    auto precond = [&](const std::vector<double>& r, std::vector<double>& z) {
        z.resize(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) z[i] = diag[i] * r[i];
    };

    std::vector<double> r = b, z, p, Ap(b.size());
    int it = 0;
    double relRes = 1.0;

    if (op.symmetric) {
        rep.method = "PCG";
        precond(r, z);
        p = z;
        double rz = dotv(r, z);
        for (it = 0; it < opts.maxIter; ++it) {
            op.apply(p, Ap);
            const double alpha = rz / dotv(p, Ap);
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += alpha * p[i];
            const bool replace = (it + 1) % 256 == 0;
            if (replace) {
                // residual replacement with restart: keeps the recurrence
                // honest against floating-point drift at high condition number
                op.apply(x, Ap);
                for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - Ap[i];
            } else {
                for (std::size_t i = 0; i < r.size(); ++i) r[i] -= alpha * Ap[i];
            }
            relRes = norm(r) / bNorm;
            if (relRes <= opts.tol) {
                ++it;
                break;
            }
            precond(r, z);
            const double rzNew = dotv(r, z);
            const double beta = replace ? 0.0 : rzNew / rz;
            rz = rzNew;
            for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
        }
    } else {
        rep.method = "BiCGStab";
        std::vector<double> rHat = r, v(b.size(), 0.0), pv(b.size(), 0.0), s(b.size()), t(b.size()), y(b.size()),
            zv(b.size());
        double rho = 1.0, alpha = 1.0, w = 1.0;
        for (it = 0; it < opts.maxIter; ++it) {
            const double rhoNew = dotv(rHat, r);
            if (rhoNew == 0.0) break;
            const double beta = (rhoNew / rho) * (alpha / w);
            rho = rhoNew;
            for (std::size_t i = 0; i < pv.size(); ++i) pv[i] = r[i] + beta * (pv[i] - w * v[i]);
            precond(pv, y);
            op.apply(y, v);
            alpha = rho / dotv(rHat, v);
            for (std::size_t i = 0; i < s.size(); ++i) s[i] = r[i] - alpha * v[i];
            if (norm(s) / bNorm <= opts.tol) {
                for (std::size_t i = 0; i < x.size(); ++i) x[i] += alpha * y[i];
                relRes = norm(s) / bNorm;
                ++it;
                break;
            }
            precond(s, zv);
            op.apply(zv, t);
            w = dotv(t, s) / dotv(t, t);
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += alpha * y[i] + w * zv[i];
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = s[i] - w * t[i];
            relRes = norm(r) / bNorm;
            if (relRes <= opts.tol) {
                ++it;
                break;
            }
        }
    }

    // recompute the true residual for the report
    op.apply(x, Ap);
    for (std::size_t i = 0; i < Ap.size(); ++i) Ap[i] = b[i] - Ap[i];
    relRes = norm(Ap) / bNorm;
    rep.iterations = it;
    rep.finalRelativeResidual = relRes;
    rep.wallTime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (relRes > opts.tol * 10.0) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3e after %d iterations", relRes, it);
        fail(ErrorKind::Solver, std::string("solveKrylov: iteration budget exhausted, residual ") + buf);
    }

    if (gauge) removeComponentMeans(x, op.components);
    return {x, rep};
}

std::pair<DiscreteField, SolveReport> solveKrylov(const SparseOperator& op, const DiscreteField& rhs,
                                                  const KrylovOptions& opts) {
    auto [x, rep] = solveKrylov(op, rhs.data, opts);
    DiscreteField out(rhs.grid, rhs.components);
    out.data = std::move(x);
    return {out, rep};
}

double relativeResidual(const SparseOperator& op, const std::vector<double>& x, const std::vector<double>& b) {
    std::vector<double> Ax;
    op.apply(x, Ax);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double d = b[i] - Ax[i];
        num += d * d;
        den += b[i] * b[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

grid::DiscreteField solveFFT(const Grid& g, double lambda, const DiscreteField& rhs) {
    if (g.boundary != Boundary::Periodic) fail(ErrorKind::Config, "solveFFT: periodic grids only");
    if (!g.powerOfTwo()) fail(ErrorKind::Config, "solveFFT: n must be a power of two");
    if (lambda < 0.0) fail(ErrorKind::Config, "solveFFT: lambda must be nonnegative");
    if (lambda == 0.0) {
        const std::vector<double> means = grid::componentMeans(rhs);
        const double scale = grid::rmsNorm(rhs) + 1e-300;
        for (double mv : means)
            if (std::abs(mv) > 1e-8 * scale + 1e-14)
                fail(ErrorKind::Solver, "solveFFT: lambda=0 requires mean-zero rhs");
    }
    return fft::applyMultiplier(rhs, [&](const std::array<int, 3>& kt) {
        const double sym = fft::discreteLaplaceSymbol(g, kt);
        const double den = sym + lambda;
        return den > 0.0 ? 1.0 / den : 0.0;  // zero mode -> mean-zero gauge
    });
}

}  // namespace aphom::solver
