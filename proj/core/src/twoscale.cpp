#include "aphom/twoscale.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "aphom/bvp.hpp"

namespace aphom::twoscale {

using corrector::CorrectorSet;
using grid::Boundary;
using grid::DiscreteField;
using grid::Grid;

grid::DiscreteField kSmooth(const DiscreteField& f, double eps, double delta) {
    const Grid& g = f.grid;
    if (g.boundary != Boundary::Dirichlet) fail(ErrorKind::Config, "kSmooth: Dirichlet grids only");
    if (delta < 2.0 * eps - 1e-12) fail(ErrorKind::Config, "kSmooth: collar rule delta >= 2 eps violated");
    if (eps < 2.0 * g.h() - 1e-12) fail(ErrorKind::Config, "kSmooth: eps >= 2h required");
    const DiscreteField eta = grid::cutoff(g, delta);
    DiscreteField cut(g, f.components);
    const std::size_t N = g.cells();
    for (int c = 0; c < f.components; ++c)
        for (std::size_t i = 0; i < N; ++i) cut.at(c, i) = eta.data[i] * f.at(c, i);
    return grid::mollify(cut, eps);
}

namespace {

/// chi column (j,beta,alpha) sampled at x/eps; grids must be commensurate:
/// hOmega / eps = hCorrector exactly, so cell i maps to corrector cell i mod n.
struct ChiSampler {
    const CorrectorSet* cs;
    const Grid* omega;
    double eps;

    ChiSampler(const CorrectorSet& c, const Grid& om, double e) : cs(&c), omega(&om), eps(e) {
        const double ratio = om.h() / (e * c.box.h());
        if (std::abs(ratio - 1.0) > 1e-9)
            fail(ErrorKind::Config, "buildExpansion: corrector grid incommensurate with Omega grid (h/eps != h_y)");
    }

    double at(int comp, const std::array<int, 3>& iv) const {
        std::array<int, 3> jv{0, 0, 0};
        for (int k = 0; k < omega->dim; ++k) jv[k] = cs->box.wrap(iv[k]);
        return cs->chi.at(comp, cs->box.flat(jv));
    }
};

}  // namespace

Expansion buildExpansion(const ExpansionInput& in, const DiscreteField* bT) {
    if (!in.uEps || !in.u0 || !in.correctors || !in.eff || !in.field)
        fail(ErrorKind::Config, "buildExpansion: incomplete input");
    const Grid& g = in.uEps->grid;
    if (!(in.u0->grid == g)) fail(ErrorKind::Config, "buildExpansion: uEps and u0 must share the grid");
    if (in.delta < 2.0 * in.epsilon - 1e-12) fail(ErrorKind::Config, "buildExpansion: delta >= 2 eps violated");

    const coeff::CoefficientField& A = *in.field;
    const int d = A.dim, m = A.m;
    const std::size_t N = g.cells();
    const ChiSampler chi(*in.correctors, g, in.epsilon);

    // K_{eps,delta}(d_k u0^beta) for all k, beta
    std::vector<DiscreteField> Kdu(static_cast<std::size_t>(d) * m);
    for (int k = 0; k < d; ++k) {
        const DiscreteField du = grid::centeredDerivative(*in.u0, k);
        for (int beta = 0; beta < m; ++beta) {
            DiscreteField comp(g, 1);
            std::copy(du.data.begin() + static_cast<std::size_t>(beta) * N,
                      du.data.begin() + static_cast<std::size_t>(beta + 1) * N, comp.data.begin());
            Kdu[static_cast<std::size_t>(k) * m + beta] = kSmooth(comp, in.epsilon, in.delta);
        }
    }

    Expansion out;
    out.wEps = DiscreteField(g, m);
    for (int alpha = 0; alpha < m; ++alpha) {
        for (std::size_t f = 0; f < N; ++f) {
            const auto iv = g.unflat(f);
            double corr = 0.0;
            for (int k = 0; k < d; ++k)
                for (int beta = 0; beta < m; ++beta)
                    corr += chi.at(in.correctors->compIndex(k, beta, alpha), iv) *
                            Kdu[static_cast<std::size_t>(k) * m + beta].data[f];
            out.wEps.at(alpha, f) = in.uEps->at(alpha, f) - in.u0->at(alpha, f) - in.epsilon * corr;
        }
    }
    out.h1 = grid::h1Norm(out.wEps);
    out.l2 = grid::l2Norm(out.wEps);

    // residual fluxes of L_eps(w)
    const Tensor4& ahat = in.eff->values;
    DiscreteField r1(g, m * d), r2(g, m * d), r3(g, m * d);
    std::vector<DiscreteField> du0(d);
    for (int k = 0; k < d; ++k) du0[k] = grid::centeredDerivative(*in.u0, k);
    std::vector<DiscreteField> dKdu(static_cast<std::size_t>(d) * d * m);  // d_j K(d_k u0^beta)
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
            for (int beta = 0; beta < m; ++beta)
                dKdu[(static_cast<std::size_t>(j) * d + k) * m + beta] =
                    grid::centeredDerivative(Kdu[static_cast<std::size_t>(k) * m + beta], j);

    const Tensor4 probe(d, m);
    for (std::size_t f = 0; f < N; ++f) {
        const auto iv = g.unflat(f);
        const Vec xc = g.center(iv);
        const Vec y{xc[0] / in.epsilon, xc[1] / in.epsilon, xc[2] / in.epsilon};
        const Tensor4 Ay = A.evaluate(y);
        for (int alpha = 0; alpha < m; ++alpha) {
            for (int i = 0; i < d; ++i) {
                double v1 = 0.0, v2 = 0.0, v3 = 0.0;
                for (int j = 0; j < d; ++j) {
                    for (int beta = 0; beta < m; ++beta) {
                        const double K = Kdu[static_cast<std::size_t>(j) * m + beta].data[f];
                        const double duv = du0[j].at(beta, f);
                        v1 += (ahat(i, alpha, j, beta) - Ay(i, alpha, j, beta)) * (K - duv);
                        if (bT) {
                            // b_T lives on the corrector y-grid; sample at x/eps
                            std::array<int, 3> jv{0, 0, 0};
                            for (int a = 0; a < d; ++a) jv[a] = in.correctors->box.wrap(iv[a]);
                            v2 += bT->at(static_cast<int>(probe.flat(i, alpha, j, beta)),
                                         in.correctors->box.flat(jv)) *
                                  K;
                        }
                    }
                }
                // r3 = eps a_ij(y) chi_{T,k}^{beta gamma}(y) d_j K(d_k u0^gamma)
                for (int j = 0; j < d; ++j)
                    for (int beta = 0; beta < m; ++beta)
                        for (int k = 0; k < d; ++k)
                            for (int gam = 0; gam < m; ++gam)
                                v3 += Ay(i, alpha, j, beta) *
                                      chi.at(in.correctors->compIndex(k, gam, beta), iv) *
                                      dKdu[(static_cast<std::size_t>(j) * d + k) * m + gam].data[f];
                r1.at(alpha * d + i, f) = v1;
                r2.at(alpha * d + i, f) = v2;
                r3.at(alpha * d + i, f) = in.epsilon * v3;
            }
        }
    }
    out.residual1 = grid::l2Norm(r1);
    out.residual2 = grid::l2Norm(r2);
    out.residual3 = grid::l2Norm(r3);
    return out;
}

report::ExperimentReport h1ErrorStudy(const coeff::CoefficientField& field,
                                      const std::function<double(const Vec&, int)>& force,
                                      const std::function<double(const Vec&, int)>& boundary,
                                      const H1StudyOptions& opts) {
    report::ExperimentReport rep;
    rep.kind = "twoscale";
    if (opts.epsList.size() < 3) fail(ErrorKind::Config, "h1ErrorStudy: need >= 3 epsilon values");

    const double epsMin = *std::min_element(opts.epsList.begin(), opts.epsList.end());
    const double Tmax = 1.0 / epsMin;

    // one corrector grid serves every eps: h_y = h_x / eps is eps-independent
    // because per-eps Omega grids keep h_x = eps / cellsPerEps
    grid::Grid ybox;
    ybox.dim = field.dim;
    ybox.boundary = Boundary::Periodic;
    ybox.boxSide = opts.correctorBox;
    ybox.n = static_cast<int>(std::lround(opts.correctorBox * opts.cellsPerEps));
    if (!ybox.powerOfTwo()) fail(ErrorKind::Config, "h1ErrorStudy: correctorBox*cellsPerEps must be a power of two");

    corrector::CorrectorOptions copts;
    copts.krylov = opts.krylov;
    copts.threads = opts.threads;

    const corrector::CorrectorSet csMax = corrector::solveCorrector(field, Tmax, ybox, copts);
    const corrector::EffectiveTensor effMax = corrector::effectiveTensor(csMax);

    report::Series sH1{"h1_vs_delta", "delta (dimensionless)", "||w_eps||_{H^1}", {}};
    report::Series sEps{"h1_vs_eps", "eps (length ratio)", "||w_eps||_{H^1}", {}};
    report::Series sDelta{"delta_of_eps", "eps (length ratio)", "delta(eps)", {}};

    for (double eps : opts.epsList) {
        const double T = 1.0 / eps;

        grid::Grid om;
        om.dim = field.dim;
        om.boundary = Boundary::Dirichlet;
        om.boxSide = opts.boxSide;
        om.n = static_cast<int>(std::lround(opts.boxSide * opts.cellsPerEps / eps));

        const corrector::CorrectorSet cs =
            (T == Tmax) ? csMax : corrector::solveCorrector(field, T, ybox, copts);
        const corrector::EffectiveTensor eff = corrector::effectiveTensor(cs);
        const corrector::DualCorrectorSet dual = corrector::fluxAndDual(cs, eff, opts.threads);

        // delta(eps): 2/T + ||grad chi_T - psi_proxy||_B2 + T^-1 ||chi||_S21
        //             + T^-2 ||phi||_S21 + T^-1 ||grad phi||_S21, floored at 2 eps
        const DiscreteField gradDiff = grid::axpy(-1.0, csMax.gradChi, cs.gradChi);
        const double psiTerm = grid::rmsNorm(gradDiff);
        const double chiTerm = grid::windowedNorm(cs.chi, 2.0, 1.0) / T;
        const double phiTerm = grid::windowedNorm(dual.phiT, 2.0, 1.0) / (T * T);
        const double gradPhiTerm = grid::windowedNorm(grid::gradient(dual.phiT), 2.0, 1.0) / T;
        double delta = 2.0 / T + psiTerm + chiTerm + phiTerm + gradPhiTerm;
        delta = std::max(delta, 2.0 * eps);

        // solve u_eps and u0 on the eps grid
        bvp::DirichletProblem pEps;
        pEps.box = om;
        pEps.force = force;
        pEps.boundary = boundary;
        pEps.epsilon = eps;
        pEps.field = &field;
        pEps.krylov = opts.krylov;
        auto [uEps, repEps] = bvp::solveDirichlet(pEps);

        bvp::DirichletProblem p0;
        p0.box = om;
        p0.force = force;
        p0.boundary = boundary;
        p0.epsilon = 0.0;
        p0.effective = effMax.values;
        p0.krylov = opts.krylov;
        auto [u0, rep0] = bvp::solveDirichlet(p0);

        ExpansionInput in;
        in.epsilon = eps;
        in.delta = delta;
        in.uEps = &uEps;
        in.u0 = &u0;
        in.correctors = &cs;
        in.eff = &eff;
        in.field = &field;
        const Expansion ex = buildExpansion(in, &dual.bT);

        sH1.xy.emplace_back(delta, ex.h1);
        sEps.xy.emplace_back(eps, ex.h1);
        sDelta.xy.emplace_back(eps, delta);
        if (!opts.dumpDir.empty()) {
            char name[64];
            std::snprintf(name, sizeof(name), "/wEps_n%d.apf", om.n);
            grid::saveApf(opts.dumpDir + name, ex.wEps);
        }
    }

    rep.fits["h1_vs_delta"] = report::fitPowerLawOrDegenerate(sH1.xy);
    rep.fits["h1_vs_eps"] = report::fitPowerLawOrDegenerate(sEps.xy);
    rep.series.push_back(std::move(sH1));
    rep.series.push_back(std::move(sEps));
    rep.series.push_back(std::move(sDelta));
    return rep;
}

}  // namespace aphom::twoscale
