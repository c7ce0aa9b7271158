#include "aphom/corrector.hpp"

#include <cmath>

#include "aphom/fft.hpp"

namespace aphom::corrector {

using coeff::CoefficientField;
using grid::Boundary;
using grid::DiscreteField;
using grid::Grid;

namespace {

Vec wrapPoint(const Grid& g, Vec x) {
    for (int k = 0; k < g.dim; ++k) x[k] -= g.boxSide * std::floor(x[k] / g.boxSide);
    return x;
}

int nextPow2(int v) {
    int n = 4;
    while (n < v) n <<= 1;
    return n;
}

/// True when the box is a whole number of field periods along every axis, so
/// the periodic truncation is exact and the 8T rule is unnecessary.
bool boxCommensurate(const CoefficientField& field, const Grid& g) {
    if (!field.periodLattice) return false;
    for (int k = 0; k < g.dim; ++k) {
        const double ratio = g.boxSide / (*field.periodLattice)[k];
        if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0 - 1e-9) return false;
    }
    return true;
}

}  // namespace

grid::Grid correctorGrid(const CoefficientField& field, double T, int maxCellsPerSide, double minBoxSide) {
    Grid g;
    g.dim = field.dim;
    g.boundary = Boundary::Periodic;

    if (field.periodLattice) {
        double pmax = 0.0;
        for (double p : *field.periodLattice) pmax = std::max(pmax, p);
        double ell = pmax * std::ceil(std::max(minBoxSide, pmax) / pmax);
        // bump until every axis period divides the box
        for (int tries = 0; tries < 64; ++tries) {
            bool ok = true;
            for (double p : *field.periodLattice) {
                const double r = ell / p;
                ok = ok && std::abs(r - std::round(r)) < 1e-9;
            }
            if (ok) break;
            ell += pmax;
        }
        g.boxSide = ell;
    } else {
        g.boxSide = std::max({8.0 * T, 4.0 * field.longestPeriod(), minBoxSide});
    }

    const double maxw = field.maxFrequency();
    const double hRule = maxw > 0.0 ? 2.0 * M_PI / (16.0 * maxw) : g.boxSide / 16.0;
    int n = nextPow2(static_cast<int>(std::ceil(g.boxSide / hRule - 1e-9)));
    n = std::max(n, 16);
    if (n > maxCellsPerSide)
        fail(ErrorKind::Config, "correctorGrid: resolving the fastest mode needs n = " + std::to_string(n) +
                                    " > limit " + std::to_string(maxCellsPerSide));
    g.n = n;
    return g;
}

namespace {

/// rhs column div(A grad P_j0^b0) through the scheme's own flux paths.
DiscreteField columnRhs(const CoefficientField& A, const Grid& g, int j0, int b0) {
    const int m = A.m;
    const double h = g.h();
    const std::size_t N = g.cells();
    DiscreteField rhs(g, m);
    for (std::size_t f = 0; f < N; ++f) {
        const auto iv = g.unflat(f);
        const Vec xc = g.center(iv);
        for (int alpha = 0; alpha < m; ++alpha) {
            // staggered part (flux axis = j0)
            Vec xp = xc, xm = xc;
            xp[j0] += 0.5 * h;
            xm[j0] -= 0.5 * h;
            double r = (A.entry(wrapPoint(g, xp), j0, alpha, j0, b0) -
                        A.entry(wrapPoint(g, xm), j0, alpha, j0, b0)) /
                       h;
            // centered part (flux axes i != j0)
            for (int i = 0; i < g.dim; ++i) {
                if (i == j0) continue;
                Vec cp = xc, cm = xc;
                cp[i] += h;
                cm[i] -= h;
                r += (A.entry(wrapPoint(g, cp), i, alpha, j0, b0) -
                      A.entry(wrapPoint(g, cm), i, alpha, j0, b0)) /
                     (2.0 * h);
            }
            rhs.at(alpha, f) = r;
        }
    }
    return rhs;
}

}  // namespace

CorrectorSet solveCorrector(const CoefficientField& field, double T, const Grid& g, const CorrectorOptions& opts) {
    if (g.boundary != Boundary::Periodic) fail(ErrorKind::Config, "solveCorrector: periodic grids only");
    if (!(T > 0.0)) fail(ErrorKind::Config, "solveCorrector: T must be positive");
    if (!field.certifiedElliptic()) fail(ErrorKind::Field, "solveCorrector: field fails ellipticity certificate");
    if (!boxCommensurate(field, g) && g.boxSide < 8.0 * T - 1e-9)
        fail(ErrorKind::Config, "solveCorrector: box side " + std::to_string(g.boxSide) +
                                    " violates the 8T truncation rule for a non-periodic field");
    const double maxw = field.maxFrequency();
    if (maxw > 0.0 && g.h() > 2.0 * M_PI / (16.0 * maxw) + 1e-12)
        fail(ErrorKind::Config, "solveCorrector: h does not resolve the fastest coefficient mode");

    const int d = field.dim, m = field.m;
    CorrectorSet cs;
    cs.field = field;
    cs.T = T;
    cs.box = g;
    cs.chi = DiscreteField(g, d * m * m);
    cs.diagnostics.resize(static_cast<std::size_t>(d) * m);

    const solver::SparseOperator op = solver::assemble(field, g, 1.0 / (T * T));

    const std::size_t N = g.cells();
    parallelFor(static_cast<std::size_t>(d) * m, opts.threads, [&](std::size_t colIdx) {
        const int j = static_cast<int>(colIdx) / m;
        const int beta = static_cast<int>(colIdx) % m;
        const DiscreteField rhs = columnRhs(field, g, j, beta);
        auto [u, rep] = solver::solveKrylov(op, rhs, opts.krylov);
        for (int alpha = 0; alpha < m; ++alpha) {
            const double* src = u.data.data() + static_cast<std::size_t>(alpha) * N;
            double* dst = cs.chi.data.data() + static_cast<std::size_t>(cs.compIndex(j, beta, alpha)) * N;
            std::copy(src, src + N, dst);
        }
        cs.diagnostics[colIdx] = rep;
    });

    cs.gradChi = grid::gradient(cs.chi);
    return cs;
}

grid::DiscreteField CorrectorSet::column(int j, int beta) const {
    const std::size_t N = box.cells();
    DiscreteField u(box, field.m);
    for (int alpha = 0; alpha < field.m; ++alpha) {
        const double* src = chi.data.data() + static_cast<std::size_t>(compIndex(j, beta, alpha)) * N;
        std::copy(src, src + N, u.data.data() + static_cast<std::size_t>(alpha) * N);
    }
    return u;
}

EffectiveTensor effectiveTensor(const CorrectorSet& cs) {
    const CoefficientField& A = cs.field;
    const Grid& g = cs.box;
    const int d = A.dim, m = A.m;
    const double h = g.h();
    const std::size_t N = g.cells();

    Tensor4 acc(d, m);
    // mean of the total flux A (grad P + grad chi), sampled like the scheme:
    // face-midpoint coefficients for the (i = i) part, cell-centered for mixed
    for (std::size_t f = 0; f < N; ++f) {
        const auto iv = g.unflat(f);
        const Vec xc = g.center(iv);
        const Tensor4 Acell = A.evaluate(wrapPoint(g, xc));
        for (int i = 0; i < d; ++i) {
            Vec xf = xc;
            xf[i] += 0.5 * h;
            const Vec yface = wrapPoint(g, xf);
            for (int alpha = 0; alpha < m; ++alpha) {
                for (int j = 0; j < d; ++j) {
                    for (int beta = 0; beta < m; ++beta) {
                        double flux = 0.0;
                        // E contribution from grad P_j^beta = e_j e^beta
                        flux += (i == j) ? A.entry(yface, i, alpha, i, beta) : Acell(i, alpha, j, beta);
                        // grad chi contribution
                        for (int gam = 0; gam < m; ++gam) {
                            const int comp = cs.compIndex(j, beta, gam);
                            // staggered derivative along i at this face
                            const double gstag = cs.gradChi.at(comp * d + i, f);
                            flux += A.entry(yface, i, alpha, i, gam) * gstag;
                            for (int k = 0; k < d; ++k) {
                                if (k == i) continue;
                                // centered derivative along k at the cell
                                std::array<int, 3> up = iv, dn = iv;
                                up[k] = g.wrap(up[k] + 1);
                                dn[k] = g.wrap(dn[k] - 1);
                                const double gc =
                                    (cs.chi.at(comp, g.flat(up)) - cs.chi.at(comp, g.flat(dn))) / (2.0 * h);
                                flux += Acell(i, alpha, k, gam) * gc;
                            }
                        }
                        acc(i, alpha, j, beta) += flux;
                    }
                }
            }
        }
    }
    acc *= 1.0 / static_cast<double>(N);

    EffectiveTensor eff;
    eff.values = acc;
    eff.T = cs.T;
    eff.symmetricPart = acc.symmetricPart();
    eff.skewPart = acc.skewPart();
    auto [lo, hi] = acc.symEigRange();
    eff.eigMin = lo;
    eff.eigMax = hi;
    return eff;
}

DualCorrectorSet fluxAndDual(const CorrectorSet& cs, const EffectiveTensor& eff, int threads) {
    const CoefficientField& A = cs.field;
    const Grid& g = cs.box;
    if (!g.powerOfTwo()) fail(ErrorKind::Config, "fluxAndDual: FFT needs a power-of-two grid");
    const int d = A.dim, m = A.m;
    const std::size_t N = g.cells();
    const double lambda = 1.0 / (cs.T * cs.T);

    DualCorrectorSet dual;
    dual.bT = DiscreteField(g, d * m * d * m);
    dual.bTmean = Tensor4(d, m);
    const Tensor4 probe(d, m);

    // b = A + A grad chi - A_hat at cells; grad chi averaged from faces for
    // the staggered components
    for (std::size_t f = 0; f < N; ++f) {
        const auto iv = g.unflat(f);
        const Tensor4 Acell = A.evaluate(wrapPoint(g, g.center(iv)));
        for (int j = 0; j < d; ++j) {
            for (int beta = 0; beta < m; ++beta) {
                for (int alpha = 0; alpha < m; ++alpha) {
                    for (int i = 0; i < d; ++i) {
                        double v = Acell(i, alpha, j, beta) - eff.values(i, alpha, j, beta);
                        for (int gam = 0; gam < m; ++gam) {
                            const int comp = cs.compIndex(j, beta, gam);
                            for (int k = 0; k < d; ++k) {
                                // cell-centered derivative: average the two faces
                                std::array<int, 3> dn = iv;
                                dn[k] = g.wrap(dn[k] - 1);
                                const double gk = 0.5 * (cs.gradChi.at(comp * d + k, f) +
                                                         cs.gradChi.at(comp * d + k, g.flat(dn)));
                                v += Acell(i, alpha, k, gam) * gk;
                            }
                        }
                        dual.bT.at(static_cast<int>(probe.flat(i, alpha, j, beta)), f) = v;
                    }
                }
            }
        }
    }

    const std::vector<double> means = grid::componentMeans(dual.bT);
    for (std::size_t c = 0; c < means.size(); ++c) dual.bTmean.data()[c] = means[c];

    // dual correctors: one constant-coefficient solve per component
    dual.phiT = DiscreteField(g, d * m * d * m);
    dual.diagnostics.resize(static_cast<std::size_t>(d) * m * d * m);
    parallelFor(static_cast<std::size_t>(d) * m * d * m, threads, [&](std::size_t c) {
        DiscreteField rhs(g, 1);
        const double mean = means[c];
        for (std::size_t f = 0; f < N; ++f) rhs.data[f] = dual.bT.at(static_cast<int>(c), f) - mean;
        const DiscreteField phi = solver::solveFFT(g, lambda, rhs);
        std::copy(phi.data.begin(), phi.data.end(),
                  dual.phiT.data.begin() + static_cast<std::size_t>(c) * N);
        solver::SolveReport rep;
        rep.method = "FFT";
        dual.diagnostics[c] = rep;
    });

    // h_{T,j}^{ab} = d_i phi_{T,ij}^{ab} (i summed), centered differences
    dual.hT = DiscreteField(g, d * m * m);
    for (int j = 0; j < d; ++j) {
        for (int alpha = 0; alpha < m; ++alpha) {
            for (int beta = 0; beta < m; ++beta) {
                const int hc = (j * m + alpha) * m + beta;
                for (int i = 0; i < d; ++i) {
                    const int pc = static_cast<int>(probe.flat(i, alpha, j, beta));
                    DiscreteField comp(g, 1);
                    std::copy(dual.phiT.data.begin() + static_cast<std::size_t>(pc) * N,
                              dual.phiT.data.begin() + static_cast<std::size_t>(pc + 1) * N, comp.data.begin());
                    const DiscreteField der = grid::centeredDerivative(comp, i);
                    for (std::size_t f = 0; f < N; ++f) dual.hT.at(hc, f) += der.data[f];
                }
            }
        }
    }
    return dual;
}

namespace {

DiscreteField extractComponent(const DiscreteField& u, int c) {
    DiscreteField out(u.grid, 1);
    const std::size_t N = u.cells();
    std::copy(u.data.begin() + static_cast<std::size_t>(c) * N, u.data.begin() + static_cast<std::size_t>(c + 1) * N,
              out.data.begin());
    return out;
}

}  // namespace

FluxIdentityResiduals fluxIdentityResiduals(const CorrectorSet& cs, const DualCorrectorSet& dual) {
    const Grid& g = cs.box;
    const CoefficientField& A = cs.field;
    const int d = A.dim, m = A.m;
    const std::size_t N = g.cells();
    const double invT2 = 1.0 / (cs.T * cs.T);
    const Tensor4 probe(d, m);

    const double bNorm = grid::rmsNorm(dual.bT) + 1e-300;

    // d_i b_ij - T^-2 chi_j
    double divAcc = 0.0;
    for (int j = 0; j < d; ++j)
        for (int beta = 0; beta < m; ++beta)
            for (int alpha = 0; alpha < m; ++alpha) {
                DiscreteField divb(g, 1);
                for (int i = 0; i < d; ++i) {
                    const DiscreteField der = grid::centeredDerivative(
                        extractComponent(dual.bT, static_cast<int>(probe.flat(i, alpha, j, beta))), i);
                    for (std::size_t f = 0; f < N; ++f) divb.data[f] += der.data[f];
                }
                const int cc = cs.compIndex(j, beta, alpha);
                for (std::size_t f = 0; f < N; ++f) {
                    const double r = divb.data[f] - invT2 * cs.chi.at(cc, f);
                    divAcc += r * r;
                }
            }
    const double total = static_cast<double>(N) * d * m * m;

    // b - [ <b> - d_k(d_k phi_ij - d_i phi_kj) - d_i(d_k phi_kj) + T^-2 phi_ij ]
    double reconAcc = 0.0;
    for (int j = 0; j < d; ++j)
        for (int beta = 0; beta < m; ++beta)
            for (int alpha = 0; alpha < m; ++alpha)
                for (int i = 0; i < d; ++i) {
                    DiscreteField recon(g, 1);
                    const double mean = dual.bTmean(i, alpha, j, beta);
                    for (std::size_t f = 0; f < N; ++f) recon.data[f] = mean;
                    for (int k = 0; k < d; ++k) {
                        const DiscreteField phik =
                            extractComponent(dual.phiT, static_cast<int>(probe.flat(k, alpha, j, beta)));
                        const DiscreteField phii =
                            extractComponent(dual.phiT, static_cast<int>(probe.flat(i, alpha, j, beta)));
                        // skew block: d_k phi_ij - d_i phi_kj
                        DiscreteField skew = grid::centeredDerivative(phii, k);
                        const DiscreteField dk = grid::centeredDerivative(phik, i);
                        for (std::size_t f = 0; f < N; ++f) skew.data[f] -= dk.data[f];
                        const DiscreteField dskew = grid::centeredDerivative(skew, k);
                        // d_i (d_k phi_kj)
                        const DiscreteField dcomp = grid::centeredDerivative(grid::centeredDerivative(phik, k), i);
                        for (std::size_t f = 0; f < N; ++f) recon.data[f] -= dskew.data[f] + dcomp.data[f];
                    }
                    const DiscreteField phiij =
                        extractComponent(dual.phiT, static_cast<int>(probe.flat(i, alpha, j, beta)));
                    const int bc = static_cast<int>(probe.flat(i, alpha, j, beta));
                    for (std::size_t f = 0; f < N; ++f) {
                        const double r = dual.bT.at(bc, f) - (recon.data[f] + invT2 * phiij.data[f]);
                        reconAcc += r * r;
                    }
                }
    const double totalRecon = static_cast<double>(N) * d * m * d * m;

    FluxIdentityResiduals res;
    res.divBRel = std::sqrt(divAcc / total) / bNorm;
    res.reconRel = std::sqrt(reconAcc / totalRecon) / bNorm;
    return res;
}

// ----------------------------------------------------------------------------
// Studies
// ----------------------------------------------------------------------------

report::ExperimentReport growthStudy(const CoefficientField& field, const std::vector<double>& Ts,
                                     const StudyOptions& opts) {
    report::ExperimentReport rep;
    rep.kind = "growth";
    report::Series gradSeries{"gradChi_S21", "T (length)", "||grad chi_T||_{S^2_1}", {}};
    report::Series chiSeries{"chi_S21", "T (length)", "||chi_T||_{S^2_1}", {}};

    for (double T : Ts) {
        const Grid g = opts.useCommonGrid ? opts.commonGrid : correctorGrid(field, T);
        const CorrectorSet cs = solveCorrector(field, T, g, opts.corr);
        gradSeries.xy.emplace_back(T, grid::windowedNorm(cs.gradChi, 2.0, opts.windowR));
        chiSeries.xy.emplace_back(T, grid::windowedNorm(cs.chi, 2.0, opts.windowR));
    }

    rep.fits["gradChi_S21"] = report::fitPowerLawOrDegenerate(gradSeries.xy);
    rep.fits["chi_S21"] = report::fitPowerLawOrDegenerate(chiSeries.xy);

    double lo = gradSeries.xy.front().second, hi = lo;
    for (auto& [t, v] : gradSeries.xy) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    rep.constants["gradS21MaxMinRatio"] = lo > 0.0 ? hi / lo : 0.0;

    rep.series.push_back(std::move(gradSeries));
    rep.series.push_back(std::move(chiSeries));
    return rep;
}

report::ExperimentReport cauchyStudy(const CoefficientField& field, const std::vector<double>& Ts,
                                     const StudyOptions& opts) {
    if (Ts.size() < 2) fail(ErrorKind::Config, "cauchyStudy: need at least two T values");
    report::ExperimentReport rep;
    rep.kind = "cauchy";

    const Grid g = opts.useCommonGrid ? opts.commonGrid : correctorGrid(field, Ts.back());
    std::vector<CorrectorSet> sets;
    sets.reserve(Ts.size());
    for (double T : Ts) sets.push_back(solveCorrector(field, T, g, opts.corr));

    report::Series diffs{"cauchy_diff", "T (length)", "||chi_T - chi_2T||_{S^2_1}", {}};
    for (std::size_t i = 0; i + 1 < sets.size(); ++i) {
        if (std::abs(Ts[i + 1] - 2.0 * Ts[i]) > 1e-9 * Ts[i])
            fail(ErrorKind::Config, "cauchyStudy: T list must be consecutive dyadic");
        const DiscreteField d = grid::axpy(-1.0, sets[i + 1].chi, sets[i].chi);
        diffs.xy.emplace_back(Ts[i], grid::windowedNorm(d, 2.0, opts.windowR));
    }

    const report::FitResult fit = report::fitPowerLawOrDegenerate(diffs.xy);
    rep.fits["cauchy_decay"] = fit;
    rep.constants["betaHat"] = fit.degenerate ? 0.0 : -fit.slope;
    rep.constants["betaHatStderr"] = fit.slopeStderr;
    rep.series.push_back(std::move(diffs));
    return rep;
}

}  // namespace aphom::corrector
