#include "aphom/bvp.hpp"

#include <algorithm>
#include <cmath>

#include "aphom/ergodic.hpp"

namespace aphom::bvp {

using coeff::CoefficientField;
using grid::Boundary;
using grid::DiscreteField;
using grid::Grid;

namespace {

/// Constant-tensor field wrapper so the one assembly path serves both the
/// oscillatory and the homogenized solves.
CoefficientField constantField(const Tensor4& t, int dim, int m) {
    CoefficientField f;
    f.dim = dim;
    f.m = m;
    f.constTerm = t;
    auto [lo, hi] = t.symEigRange();
    if (!(lo > 0.0)) fail(ErrorKind::Field, "effective tensor is not elliptic");
    f.mu = std::min(lo, 1.0 / hi);
    f.periodLattice = std::vector<double>(dim, 1.0);
    return f;
}

}  // namespace

std::pair<DiscreteField, solver::SolveReport> solveDirichlet(const DirichletProblem& problem) {
    const Grid& g = problem.box;
    if (g.boundary != Boundary::Dirichlet) fail(ErrorKind::Config, "solveDirichlet: Dirichlet grid required");

    double epsScale = 1.0;
    const CoefficientField* A = nullptr;
    CoefficientField constA;
    if (problem.epsilon > 0.0) {
        if (!problem.field) fail(ErrorKind::Config, "solveDirichlet: oscillatory solve needs a field");
        A = problem.field;
        epsScale = problem.epsilon;
        const double maxw = A->maxFrequency();
        if (maxw > 0.0) {
            const double hRule = 2.0 * M_PI * problem.epsilon / (16.0 * maxw);
            if (g.h() > hRule + 1e-12)
                fail(ErrorKind::Config, "solveDirichlet: grid does not resolve eps oscillations (h <= eps/16 rule)");
        }
    } else {
        if (!problem.effective) fail(ErrorKind::Config, "solveDirichlet: homogenized solve needs a tensor");
        constA = constantField(*problem.effective, g.dim, problem.effective->msize());
        A = &constA;
    }

    solver::AssembledSystem sys = solver::assembleDirichlet(*A, g, 0.0, problem.boundary, epsScale);
    DiscreteField rhs(g, A->m);
    const std::size_t N = g.cells();
    for (int c = 0; c < A->m; ++c)
        for (std::size_t f = 0; f < N; ++f)
            rhs.at(c, f) = problem.force(g.center(g.unflat(f)), c) + sys.lift[static_cast<std::size_t>(c) * N + f];

    return solver::solveKrylov(sys.op, rhs, problem.krylov);
}

GradientProfile gradientProfile(const DiscreteField& u, const Vec& x0, const std::vector<double>& rList,
                                double epsilon) {
    const Grid& g = u.grid;
    GradientProfile prof;
    prof.center = x0;
    prof.epsilonFloor = epsilon;
    const DiscreteField gr = grid::gradient(u);
    const std::size_t N = g.cells();
    for (double r : rList) {
        if (r < epsilon - 1e-12) fail(ErrorKind::Config, "gradientProfile: radius below the epsilon floor");
        for (int k = 0; k < g.dim; ++k)
            if (x0[k] - r < -1e-9 || x0[k] + r > g.boxSide + 1e-9)
                fail(ErrorKind::Config, "gradientProfile: ball leaves the domain");
        double acc = 0.0;
        std::size_t count = 0;
        for (std::size_t f = 0; f < N; ++f) {
            const Vec x = g.center(g.unflat(f));
            const Vec dx = sub(x, x0);
            if (norm2(dx) > r) continue;
            double s = 0.0;
            for (int c = 0; c < gr.components; ++c) s += gr.at(c, f) * gr.at(c, f);
            acc += s;
            ++count;
        }
        prof.radii.push_back(r);
        prof.values.push_back(count > 0 ? std::sqrt(acc / static_cast<double>(count)) : 0.0);
    }
    return prof;
}

report::ExperimentReport rateStudy(const CoefficientField& field, const FieldFn& force, const FieldFn& boundary,
                                   const RateStudyOptions& opts) {
    report::ExperimentReport rep;
    rep.kind = "rate";
    if (opts.epsList.size() < 3) fail(ErrorKind::Config, "rateStudy: need >= 3 epsilon values");

    const double epsMin = *std::min_element(opts.epsList.begin(), opts.epsList.end());
    const double Tmax = 1.0 / epsMin;

    grid::Grid ybox;
    ybox.dim = field.dim;
    ybox.boundary = Boundary::Periodic;
    ybox.boxSide = opts.correctorBox;
    ybox.n = static_cast<int>(std::lround(opts.correctorBox * opts.cellsPerEps));
    while (!ybox.powerOfTwo() && ybox.n < (1 << 14)) ++ybox.n;

    corrector::CorrectorOptions copts;
    copts.krylov = opts.krylov;
    copts.threads = opts.threads;
    const corrector::CorrectorSet csMax = corrector::solveCorrector(field, Tmax, ybox, copts);
    const corrector::EffectiveTensor effMax = corrector::effectiveTensor(csMax);

    // adjoint correctors for the theorem's rhs bound
    coeff::CoefficientField adjointA;
    std::optional<corrector::CorrectorSet> csMaxAdj;
    if (opts.computeBound) {
        adjointA = field.adjointField();
        csMaxAdj = corrector::solveCorrector(adjointA, Tmax, ybox, copts);
    }

    // rho table for Theta (shared across eps; t grid spans [1, Tmax])
    ergodic::RhoTable rhoTab;
    if (opts.computeBound) {
        std::vector<double> Ls{1.0}, ts{1.0};
        while (Ls.back() * 2.0 <= Tmax) Ls.push_back(Ls.back() * 2.0);
        while (ts.back() * 2.0 <= Tmax) ts.push_back(ts.back() * 2.0);
        if (ts.back() < Tmax) ts.push_back(Tmax);
        rhoTab = ergodic::buildRhoTable(field, opts.k, Ls, ts, opts.plan);
    }

    report::Series sErr{"l2_rate", "eps (length ratio)", "||u_eps - u0||_L2 / ||u0||_H2", {}};
    report::Series sBound{"rhs_bound", "eps (length ratio)", "corrector-difference bound", {}};

    for (double eps : opts.epsList) {
        grid::Grid om;
        om.dim = field.dim;
        om.boundary = Boundary::Dirichlet;
        om.boxSide = opts.boxSide;
        om.n = static_cast<int>(std::lround(opts.boxSide * opts.cellsPerEps / eps));

        DirichletProblem pEps;
        pEps.box = om;
        pEps.force = force;
        pEps.boundary = boundary;
        pEps.epsilon = eps;
        pEps.field = &field;
        pEps.krylov = opts.krylov;
        auto [uEps, repEps] = solveDirichlet(pEps);

        DirichletProblem p0;
        p0.box = om;
        p0.force = force;
        p0.boundary = boundary;
        p0.epsilon = 0.0;
        p0.effective = effMax.values;
        p0.krylov = opts.krylov;
        auto [u0, rep0] = solveDirichlet(p0);

        const DiscreteField diff = grid::axpy(-1.0, u0, uEps);
        const double l2 = grid::l2Norm(diff);
        // ||u0||_H2 via first and (centered) second derivatives
        double h2 = std::pow(grid::l2Norm(u0), 2) + std::pow(grid::l2Norm(grid::gradient(u0)), 2);
        for (int i = 0; i < om.dim; ++i) {
            const DiscreteField di = grid::centeredDerivative(u0, i);
            for (int j = 0; j < om.dim; ++j) h2 += std::pow(grid::l2Norm(grid::centeredDerivative(di, j)), 2);
        }
        const double u0H2 = std::sqrt(h2);
        sErr.xy.emplace_back(eps, l2 / u0H2);

        if (opts.computeBound) {
            const double T = 1.0 / eps;
            const corrector::CorrectorSet cs =
                (T == Tmax) ? csMax : corrector::solveCorrector(field, T, ybox, copts);
            const corrector::CorrectorSet csAdj =
                (T == Tmax) ? *csMaxAdj : corrector::solveCorrector(adjointA, T, ybox, copts);
            const double psiTerm = grid::rmsNorm(grid::axpy(-1.0, csMax.gradChi, cs.gradChi));
            const double psiTermAdj = grid::rmsNorm(grid::axpy(-1.0, csMaxAdj->gradChi, csAdj.gradChi));
            ergodic::ThetaSpec spec;
            spec.k = opts.k;
            spec.sigma = opts.sigma;
            spec.c = opts.thetaC;
            spec.rhoSamples = rhoTab;
            spec.T = std::max(1.0, T);
            const double theta = ergodic::thetaBound(spec);
            sBound.xy.emplace_back(eps, psiTerm + psiTermAdj + theta / T);
        }
    }

    // errors at the solver-tolerance floor (constant fields) are not a rate
    rep.fits["l2_rate"] = report::fitPowerLawOrDegenerate(sErr.xy, 1e-8);
    rep.series.push_back(std::move(sErr));
    if (opts.computeBound) {
        // one calibrated C: fitted on the first half of the eps list,
        // asserted across all of it
        const auto& err = rep.series[0].xy;
        const std::size_t half = std::max<std::size_t>(1, (err.size() + 1) / 2);
        double C = 0.0;
        for (std::size_t i = 0; i < half; ++i)
            if (sBound.xy[i].second > 0.0) C = std::max(C, err[i].second / sBound.xy[i].second);
        rep.constants["boundC"] = C;
        for (std::size_t i = 0; i < sBound.xy.size(); ++i)
            rep.assertLE("rhs_bound_dominates_eps" + std::to_string(i), err[i].second,
                         C * sBound.xy[i].second * (1.0 + 1e-9) + 1e-14);
        rep.series.push_back(std::move(sBound));
    }
    return rep;
}

report::ExperimentReport liouvilleProbe(const CoefficientField& field, const LiouvilleOptions& opts) {
    report::ExperimentReport rep;
    rep.kind = "liouville";
    if (!(opts.sigma > 0.0 && opts.sigma < 1.0)) fail(ErrorKind::Config, "liouvilleProbe: sigma must be in (0,1)");
    if (opts.Rlist.size() < 3) fail(ErrorKind::Config, "liouvilleProbe: need >= 3 R values");

    report::Series sProf{"interior_grad", "R (length)", "(avg_{B(c,r)} |grad u|^2)^{1/2}", {}};
    for (double R : opts.Rlist) {
        grid::Grid g;
        g.dim = field.dim;
        g.boundary = Boundary::Dirichlet;
        g.boxSide = 2.0 * R;
        const double maxw = field.maxFrequency();
        const double hRule = maxw > 0.0 ? 2.0 * M_PI / (16.0 * maxw) : 2.0 * R / 64.0;
        int n = static_cast<int>(std::ceil(2.0 * R / hRule));
        n = std::max(n, 8 * static_cast<int>(std::ceil(2.0 * R / opts.rProbe)));
        n = std::min(n, 4096);
        g.n = n;

        // boundary data with prescribed growth R^sigma along the first axis
        const double c0 = R;
        auto fb = [R, c0, sigma = opts.sigma](const Vec& x, int) {
            return std::pow(R, sigma) * (x[0] - c0) / R;
        };
        DirichletProblem p;
        p.box = g;
        p.force = [](const Vec&, int) { return 0.0; };
        p.boundary = fb;
        p.epsilon = 1.0;
        p.field = &field;
        p.krylov = opts.krylov;
        auto [u, srep] = solveDirichlet(p);

        Vec center{0, 0, 0};
        for (int k = 0; k < g.dim; ++k) center[k] = R;
        const GradientProfile prof = gradientProfile(u, center, {opts.rProbe}, 0.0);
        sProf.xy.emplace_back(R, prof.values[0]);
    }

    const report::FitResult fit = report::fitPowerLawOrDegenerate(sProf.xy);
    rep.fits["interior_grad_decay"] = fit;
    bool decreasing = true;
    for (std::size_t i = 0; i + 1 < sProf.xy.size(); ++i)
        decreasing = decreasing && sProf.xy[i + 1].second <= sProf.xy[i].second * (1.0 + 1e-9);
    rep.assertGE("interior_grad_decreasing", decreasing ? 1.0 : 0.0, 1.0);
    rep.series.push_back(std::move(sProf));
    return rep;
}

}  // namespace aphom::bvp
