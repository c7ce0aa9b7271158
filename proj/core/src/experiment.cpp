#include "aphom/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aphom/bvp.hpp"
#include "aphom/coeff.hpp"
#include "aphom/corrector.hpp"
#include "aphom/ergodic.hpp"
#include "aphom/grid.hpp"
#include "aphom/twoscale.hpp"
#include "aphom/util.hpp"

namespace aphom::experiment {

using nlohmann::json;
using report::ExperimentReport;

namespace {

// ----------------------------------------------------------------------------
// Config helpers
// ----------------------------------------------------------------------------

coeff::SamplingPlan planFromConfig(const json& j, std::uint64_t seed) {
    coeff::SamplingPlan p;
    p.seed = seed;
    if (!j.contains("sampling")) return p;
    const json& s = j.at("sampling");
    p.centers = s.value("centers", p.centers);
    p.quadPerAxis = s.value("quadPerAxis", p.quadPerAxis);
    p.shifts = s.value("shifts", p.shifts);
    p.zPerAxis = s.value("zPerAxis", p.zPerAxis);
    p.supRadius = s.value("supRadius", p.supRadius);
    return p;
}

solver::KrylovOptions krylovFromConfig(const json& j) {
    solver::KrylovOptions k;
    if (!j.contains("solver")) return k;
    k.tol = j.at("solver").value("tol", k.tol);
    k.maxIter = j.at("solver").value("maxIter", k.maxIter);
    return k;
}

grid::Grid gridFromConfig(const json& j, const coeff::CoefficientField& field, double T) {
    if (j.contains("grid")) {
        grid::Grid g;
        g.dim = field.dim;
        g.boundary = grid::Boundary::Periodic;
        g.boxSide = j.at("grid").at("ell").get<double>();
        g.n = j.at("grid").at("n").get<int>();
        return g;
    }
    return corrector::correctorGrid(field, T);
}

std::vector<double> doubleList(const json& j) {
    std::vector<double> v;
    if (j.is_array())
        for (const auto& e : j) v.push_back(e.get<double>());
    else
        v.push_back(j.get<double>());
    return v;
}

/// Closed-form source / boundary catalog for the BVP experiments.
bvp::FieldFn fnFromConfig(const json& j) {
    if (j.is_null()) return [](const Vec&, int) { return 0.0; };
    const std::string kind = j.value("kind", "zero");
    if (kind == "zero") return [](const Vec&, int) { return 0.0; };
    if (kind == "constant") {
        const double v = j.at("value").get<double>();
        return [v](const Vec&, int) { return v; };
    }
    if (kind == "affine") {
        const double c0 = j.value("c0", 0.0);
        std::vector<double> c = j.value("c", std::vector<double>{});
        return [c0, c](const Vec& x, int) {
            double v = c0;
            for (std::size_t k = 0; k < c.size(); ++k) v += c[k] * x[k];
            return v;
        };
    }
    if (kind == "sinprod") {
        const double amp = j.value("amp", 1.0);
        std::vector<double> freq = j.value("freq", std::vector<double>{});
        return [amp, freq](const Vec& x, int) {
            double v = amp;
            for (std::size_t k = 0; k < freq.size(); ++k) v *= std::sin(freq[k] * x[k]);
            return v;
        };
    }
    fail(ErrorKind::Config, "unknown function kind: " + kind);
}

Tensor4 tensorFromConfig(const json& j, int d, int m) {
    Tensor4 t(d, m);
    for (int i = 0; i < d; ++i)
        for (int a = 0; a < m; ++a)
            for (int jj = 0; jj < d; ++jj)
                for (int b = 0; b < m; ++b) t(i, a, jj, b) = j.at(i).at(a).at(jj).at(b).get<double>();
    return t;
}

std::string canonicalEcho(json j, std::uint64_t seed) {
    j.erase("out");
    j.erase("threads");
    j["seed"] = seed;
    return j.dump();
}

struct Ctx {
    json cfg;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string outDir;
    coeff::CoefficientField field;
    bool hasField = false;
};

// ----------------------------------------------------------------------------
// Kind runners
// ----------------------------------------------------------------------------

ExperimentReport runFieldCheck(Ctx& ctx) {
    ExperimentReport rep;
    rep.kind = "field-check";
    const coeff::CoefficientField& f = ctx.field;
    auto [lo, hi] = f.ellipticityCertificate();
    rep.constants["certLambdaMin"] = lo;
    rep.constants["certLambdaMax"] = hi;
    rep.constants["mu"] = f.mu;
    rep.assertGE("certificate_lower", lo, f.mu - 1e-12);
    rep.assertLE("certificate_upper", hi, 1.0 / f.mu + 1e-12);

    const int probes = ctx.cfg.value("probes", 100000);
    SplitMix64 rng(ctx.seed ^ 0x8f1bbcdcbfa53e0bULL);
    const int n = f.dim * f.m;
    double qMin = std::numeric_limits<double>::infinity(), qMax = 0.0;
    for (int i = 0; i < probes; ++i) {
        Vec y{0, 0, 0};
        for (int k = 0; k < f.dim; ++k) y[k] = rng.uniform(-50.0, 50.0);
        std::vector<double> xi(n);
        double nx = 0.0;
        for (int k = 0; k < n; ++k) {
            xi[k] = rng.normal();
            nx += xi[k] * xi[k];
        }
        if (nx == 0.0) continue;
        const double q = f.evaluate(y).symmetricPart().quadForm(xi) / nx;
        qMin = std::min(qMin, q);
        qMax = std::max(qMax, q);
    }
    rep.constants["sampledQuadMin"] = qMin;
    rep.constants["sampledQuadMax"] = qMax;
    rep.assertGE("sampled_ellipticity_lower", qMin, f.mu - 1e-9);
    rep.assertLE("sampled_ellipticity_upper", qMax, 1.0 / f.mu + 1e-9);
    return rep;
}

ExperimentReport runRho(Ctx& ctx) {
    ExperimentReport rep;
    rep.kind = "rho";
    const int k = ctx.cfg.value("k", 1);
    const double R = ctx.cfg.at("R").get<double>();
    const double qbar = ctx.cfg.value("qbar", 4.0);
    const coeff::SamplingPlan plan = planFromConfig(ctx.cfg, ctx.seed);
    const std::vector<double> Ls = doubleList(ctx.cfg.at("L"));

    const std::vector<double> vals = coeff::rhoSweep(ctx.field, k, Ls, R, plan, qbar);
    report::Series s{"rho", "L (length)", "rho_k(L,R)", {}};
    for (std::size_t i = 0; i < Ls.size(); ++i) s.xy.emplace_back(Ls[i], vals[i]);
    rep.series.push_back(s);

    if (ctx.cfg.contains("assert")) {
        const json& a = ctx.cfg.at("assert");
        if (a.contains("rhoLE"))
            for (std::size_t i = 0; i < vals.size(); ++i)
                rep.assertLE("rho_le_L" + std::to_string(i), vals[i], a.at("rhoLE").get<double>());
        if (a.value("monotone", false)) {
            bool mono = true;
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) mono = mono && vals[i + 1] <= vals[i] + 1e-12;
            rep.assertGE("rho_monotone_in_L", mono ? 1.0 : 0.0, 1.0);
        }
    }
    return rep;
}

ExperimentReport runCorrector(Ctx& ctx) {
    ExperimentReport rep;
    rep.kind = "corrector";
    const double T = ctx.cfg.at("T").get<double>();
    const grid::Grid g = gridFromConfig(ctx.cfg, ctx.field, T);
    corrector::CorrectorOptions copts;
    copts.krylov = krylovFromConfig(ctx.cfg);
    copts.threads = ctx.threads;

    const corrector::CorrectorSet cs = corrector::solveCorrector(ctx.field, T, g, copts);
    const double windowR = ctx.cfg.value("windowR", 1.0);
    const double chiS21 = grid::windowedNorm(cs.chi, 2.0, windowR);
    const double gradS21 = grid::windowedNorm(cs.gradChi, 2.0, windowR);
    const double chiS2T = grid::windowedNorm(cs.chi, 2.0, std::min(T, g.boxSide / 2.0));
    const double gradS2T = grid::windowedNorm(cs.gradChi, 2.0, std::min(T, g.boxSide / 2.0));
    rep.constants["chi_S21"] = chiS21;
    rep.constants["gradChi_S21"] = gradS21;
    rep.constants["energy_corL2"] = gradS2T + chiS2T / T;
    double worstRes = 0.0;
    for (const auto& d : cs.diagnostics) worstRes = std::max(worstRes, d.finalRelativeResidual);
    rep.constants["maxRelResidual"] = worstRes;

    if (ctx.cfg.contains("assert")) {
        const json& a = ctx.cfg.at("assert");
        if (a.contains("chiS21LE")) rep.assertLE("chi_s21", chiS21, a.at("chiS21LE").get<double>());
        if (a.contains("gradS21LE")) rep.assertLE("grad_s21", gradS21, a.at("gradS21LE").get<double>());
        if (a.contains("energyLE")) rep.assertLE("energy_corL2", gradS2T + chiS2T / T, a.at("energyLE").get<double>());
    }

    if (!ctx.outDir.empty()) {
        grid::saveApf(ctx.outDir + "/chi.apf", cs.chi);
        grid::saveApf(ctx.outDir + "/gradChi.apf", cs.gradChi);
        json man;
        man["fieldHash"] = ctx.field.hash();
        man["T"] = T;
        man["grid"] = {{"ell", g.boxSide}, {"n", g.n}};
        man["maxRelResidual"] = worstRes;
        std::ofstream(ctx.outDir + "/corrector_manifest.json") << man.dump(2) << "\n";
    }
    return rep;
}

ExperimentReport runEffective(Ctx& ctx) {
    ExperimentReport rep;
    rep.kind = "effective";
    const double T = ctx.cfg.at("T").get<double>();
    const grid::Grid g = gridFromConfig(ctx.cfg, ctx.field, T);
    corrector::CorrectorOptions copts;
    copts.krylov = krylovFromConfig(ctx.cfg);
    copts.threads = ctx.threads;

    const corrector::CorrectorSet cs = corrector::solveCorrector(ctx.field, T, g, copts);
    const corrector::EffectiveTensor eff = corrector::effectiveTensor(cs);

    const int d = ctx.field.dim, m = ctx.field.m;
    for (int i = 0; i < d; ++i)
        for (int a = 0; a < m; ++a)
            for (int j = 0; j < d; ++j)
                for (int b = 0; b < m; ++b) {
                    std::string name = "ahat_" + std::to_string(i) + std::to_string(a) + "_" +
                                       std::to_string(j) + std::to_string(b);
                    rep.constants[name] = eff.values(i, a, j, b);
                }
    rep.constants["eigMin"] = eff.eigMin;
    rep.constants["eigMax"] = eff.eigMax;

    if (ctx.cfg.contains("assert")) {
        const json& a = ctx.cfg.at("assert");
        if (a.contains("target")) {
            const Tensor4 target = tensorFromConfig(a.at("target"), d, m);
            const double tol = a.at("targetTol").get<double>();
            const Tensor4 diff = eff.values - target;
            rep.assertLE("ahat_matches_target", diff.maxAbs(), tol);
        }
        if (a.contains("eigRange")) {
            rep.assertGE("ahat_eig_lower", eff.eigMin, a.at("eigRange").at(0).get<double>());
            rep.assertLE("ahat_eig_upper", eff.eigMax, a.at("eigRange").at(1).get<double>());
        }
        if (a.contains("adjointTol")) {
            const coeff::CoefficientField adj = ctx.field.adjointField();
            const corrector::CorrectorSet csAdj = corrector::solveCorrector(adj, T, g, copts);
            const corrector::EffectiveTensor effAdj = corrector::effectiveTensor(csAdj);
            const Tensor4 diff = effAdj.values - eff.values.adjoint();
            rep.constants["adjointMismatch"] = diff.maxAbs();
            rep.assertLE("adjoint_transpose", diff.maxAbs(), a.at("adjointTol").get<double>());
        }
    }
    return rep;
}

ExperimentReport runDual(Ctx& ctx) {
    ExperimentReport rep;
    rep.kind = "dual";
    const double T = ctx.cfg.at("T").get<double>();
    corrector::CorrectorOptions copts;
    copts.krylov = krylovFromConfig(ctx.cfg);
    copts.threads = ctx.threads;

    std::vector<int> nList;
    if (ctx.cfg.contains("nList"))
        for (const auto& e : ctx.cfg.at("nList")) nList.push_back(e.get<int>());
    else
        nList.push_back(gridFromConfig(ctx.cfg, ctx.field, T).n);
    const double ell = ctx.cfg.contains("grid") ? ctx.cfg.at("grid").at("ell").get<double>()
                                                : corrector::correctorGrid(ctx.field, T).boxSide;

    report::Series sDiv{"divb_residual", "h (length)", "||d_i b_ij - T^-2 chi_j|| / ||b||", {}};
    report::Series sRec{"recon_residual", "h (length)", "flux reconstruction residual / ||b||", {}};
    double bNormLast = 0.0, phiNormLast = 0.0;
    for (int n : nList) {
        grid::Grid g;
        g.dim = ctx.field.dim;
        g.boundary = grid::Boundary::Periodic;
        g.boxSide = ell;
        g.n = n;
        const corrector::CorrectorSet cs = corrector::solveCorrector(ctx.field, T, g, copts);
        const corrector::EffectiveTensor eff = corrector::effectiveTensor(cs);
        const corrector::DualCorrectorSet dual = corrector::fluxAndDual(cs, eff, ctx.threads);
        const corrector::FluxIdentityResiduals res = corrector::fluxIdentityResiduals(cs, dual);
        sDiv.xy.emplace_back(g.h(), res.divBRel);
        sRec.xy.emplace_back(g.h(), res.reconRel);
        bNormLast = grid::rmsNorm(dual.bT);
        phiNormLast = grid::rmsNorm(dual.phiT);
    }
    rep.constants["bT_rms"] = bNormLast;
    rep.constants["phiT_rms"] = phiNormLast;
    if (!ctx.outDir.empty()) {
        // persist the finest-grid dual set
        grid::Grid g;
        g.dim = ctx.field.dim;
        g.boundary = grid::Boundary::Periodic;
        g.boxSide = ell;
        g.n = nList.back();
        const corrector::CorrectorSet cs = corrector::solveCorrector(ctx.field, T, g, copts);
        const corrector::EffectiveTensor eff = corrector::effectiveTensor(cs);
        const corrector::DualCorrectorSet dual = corrector::fluxAndDual(cs, eff, ctx.threads);
        grid::saveApf(ctx.outDir + "/bT.apf", dual.bT);
        grid::saveApf(ctx.outDir + "/phiT.apf", dual.phiT);
        grid::saveApf(ctx.outDir + "/hT.apf", dual.hT);
        json man;
        man["fieldHash"] = ctx.field.hash();
        man["T"] = T;
        man["grid"] = {{"ell", g.boxSide}, {"n", g.n}};
        std::ofstream(ctx.outDir + "/dual_manifest.json") << man.dump(2) << "\n";
    }

    if (nList.size() >= 3) {
        rep.fits["divb_order"] = report::fitPowerLawOrDegenerate(sDiv.xy);
        rep.fits["recon_order"] = report::fitPowerLawOrDegenerate(sRec.xy);
    }
    if (ctx.cfg.contains("assert")) {
        const json& a = ctx.cfg.at("assert");
        if (a.contains("orderMin") && nList.size() >= 3) {
            rep.assertGE("divb_order", rep.fits["divb_order"].degenerate ? 99.0 : rep.fits["divb_order"].slope,
                         a.at("orderMin").get<double>());
            rep.assertGE("recon_order", rep.fits["recon_order"].degenerate ? 99.0 : rep.fits["recon_order"].slope,
                         a.at("orderMin").get<double>());
        }
        if (a.contains("zeroTol")) {
            rep.assertLE("bT_zero", bNormLast, a.at("zeroTol").get<double>());
            rep.assertLE("phiT_zero", phiNormLast, a.at("zeroTol").get<double>());
        }
    }
    rep.series.push_back(std::move(sDiv));
    rep.series.push_back(std::move(sRec));
    return rep;
}

ExperimentReport runGrowth(Ctx& ctx) {
    corrector::StudyOptions opts;
    opts.corr.krylov = krylovFromConfig(ctx.cfg);
    opts.corr.threads = ctx.threads;
    opts.windowR = ctx.cfg.value("windowR", 1.0);
    const std::vector<double> Ts = doubleList(ctx.cfg.at("T"));
    if (ctx.cfg.contains("grid")) {
        opts.useCommonGrid = true;
        opts.commonGrid = gridFromConfig(ctx.cfg, ctx.field, Ts.back());
    }
    ExperimentReport rep = corrector::growthStudy(ctx.field, Ts, opts);
    if (ctx.cfg.value("includeTheta", false)) {
        const double sigma = ctx.cfg.value("sigma", 0.5);
        const double c = ctx.cfg.value("c", 0.1);
        const int k = ctx.cfg.value("k", 1);
        const double Tmax = *std::max_element(Ts.begin(), Ts.end());
        std::vector<double> Ls{1.0}, ts{1.0};
        while (Ls.back() * 2.0 <= Tmax) Ls.push_back(Ls.back() * 2.0);
        while (ts.back() * 2.0 <= Tmax) ts.push_back(ts.back() * 2.0);
        const ergodic::RhoTable tab =
            ergodic::buildRhoTable(ctx.field, k, Ls, ts, planFromConfig(ctx.cfg, ctx.seed));
        report::Series th{"theta_bound", "T (length)", "Theta_{k,sigma}(T)", {}};
        for (double T : Ts) {
            ergodic::ThetaSpec spec;
            spec.k = k;
            spec.sigma = sigma;
            spec.c = c;
            spec.T = T;
            spec.rhoSamples = tab;
            th.xy.emplace_back(T, ergodic::thetaBound(spec));
        }
        rep.series.push_back(std::move(th));
    }
    if (ctx.cfg.contains("assert")) {
        const json& a = ctx.cfg.at("assert");
        if (a.contains("maxMinRatioLE"))
            rep.assertLE("grad_maxmin_ratio", rep.constants["gradS21MaxMinRatio"],
                         a.at("maxMinRatioLE").get<double>());
        if (a.contains("chiSlopeLE")) {
            const auto& f = rep.fits["chi_S21"];
            rep.assertLE("chi_slope", f.degenerate ? 0.0 : f.slope, a.at("chiSlopeLE").get<double>());
        }
    }
    return rep;
}

ExperimentReport runCauchy(Ctx& ctx) {
    corrector::StudyOptions opts;
    opts.corr.krylov = krylovFromConfig(ctx.cfg);
    opts.corr.threads = ctx.threads;
    opts.windowR = ctx.cfg.value("windowR", 1.0);
    const std::vector<double> Ts = doubleList(ctx.cfg.at("T"));
    if (ctx.cfg.contains("grid")) {
        opts.useCommonGrid = true;
        opts.commonGrid = gridFromConfig(ctx.cfg, ctx.field, Ts.back());
    }
    ExperimentReport rep = corrector::cauchyStudy(ctx.field, Ts, opts);
    if (ctx.cfg.contains("assert")) {
        const json& a = ctx.cfg.at("assert");
        if (a.contains("betaMin")) {
            const bool degenerate = rep.fits["cauchy_decay"].degenerate;
            rep.assertGE("beta_hat", degenerate ? 99.0 : rep.constants["betaHat"], a.at("betaMin").get<double>());
        }
    }
    return rep;
}

ExperimentReport runTheta(Ctx& ctx) {
    ExperimentReport rep;
    rep.kind = "theta";
    ergodic::ThetaSpec spec;
    spec.k = ctx.cfg.value("k", 1);
    spec.sigma = ctx.cfg.at("sigma").get<double>();
    spec.c = ctx.cfg.value("c", 0.1);
    spec.T = ctx.cfg.at("T").get<double>();

    const json& rt = ctx.cfg.at("rhoTable");
    std::vector<double> Ls{1.0}, ts{1.0};
    while (Ls.back() * 2.0 <= spec.T) Ls.push_back(Ls.back() * 2.0);
    while (ts.back() * 2.0 <= spec.T) ts.push_back(ts.back() * 2.0);
    if (ts.back() < spec.T) ts.push_back(spec.T);
    if (rt.contains("Ls")) Ls = doubleList(rt.at("Ls"));
    if (rt.contains("ts")) ts = doubleList(rt.at("ts"));
    const std::string kind = rt.value("kind", "zero");
    spec.rhoSamples.Ls = Ls;
    spec.rhoSamples.ts = ts;
    if (kind == "zero") {
        spec.rhoSamples.rho.assign(Ls.size(), std::vector<double>(ts.size(), 0.0));
    } else if (kind == "powerlaw") {
        // rho(L, t) = amp * L^exponent (use L column as the decay variable)
        const double expo = rt.at("exponent").get<double>();
        const double amp = rt.value("amp", 1.0);
        spec.rhoSamples.rho.assign(Ls.size(), std::vector<double>(ts.size(), 0.0));
        for (std::size_t iL = 0; iL < Ls.size(); ++iL)
            for (std::size_t it = 0; it < ts.size(); ++it)
                spec.rhoSamples.rho[iL][it] = amp * std::pow(Ls[iL], expo);
    } else if (kind == "field") {
        if (!ctx.hasField) fail(ErrorKind::Config, "theta: rhoTable kind=field needs a field");
        spec.rhoSamples = ergodic::buildRhoTable(ctx.field, spec.k, Ls, ts, planFromConfig(ctx.cfg, ctx.seed));
    } else {
        fail(ErrorKind::Config, "theta: unknown rhoTable kind " + kind);
    }

    std::vector<ergodic::ThetaRow> rows;
    const double theta = ergodic::thetaBound(spec, &rows);
    rep.constants["theta"] = theta;
    rep.constants["Tsigma"] = std::pow(spec.T, spec.sigma);

    report::Series s{"theta_integrand", "t", "inf_L {rho + exp(-c t^2/L^2)} (T/t)^sigma", {}};
    for (const auto& r : rows) s.xy.emplace_back(r.t, r.integrand);
    rep.series.push_back(std::move(s));
    if (!ctx.outDir.empty()) {
        std::ofstream csv(ctx.outDir + "/theta_table.csv");
        csv << "t,Lstar,rho,expTerm,integrand\n";
        for (const auto& r : rows)
            csv << report::formatDouble(r.t) << "," << report::formatDouble(r.Lstar) << ","
                << report::formatDouble(r.rho) << "," << report::formatDouble(r.expTerm) << ","
                << report::formatDouble(r.integrand) << "\n";
    }

    if (ctx.cfg.contains("assert")) {
        const json& a = ctx.cfg.at("assert");
        if (a.contains("leFactorTsigma"))
            rep.assertLE("theta_le_factor_Tsigma", theta,
                         a.at("leFactorTsigma").get<double>() * std::pow(spec.T, spec.sigma));
        if (a.contains("thetaLE")) rep.assertLE("theta_le", theta, a.at("thetaLE").get<double>());
    }
    return rep;
}

ExperimentReport runErgodic(Ctx& ctx) {
    ExperimentReport rep;
    rep.kind = "ergodic";
    const double ell = ctx.cfg.at("grid").at("ell").get<double>();
    const int n = ctx.cfg.at("grid").at("n").get<int>();
    grid::Grid g;
    g.dim = ctx.field.dim;
    g.boundary = grid::Boundary::Periodic;
    g.boxSide = ell;
    g.n = n;

    // sample one coefficient entry and subtract its torus mean
    grid::DiscreteField u = grid::sampleScalar(g, [&](const Vec& y) { return ctx.field.entry(y, 0, 0, 0, 0); });
    const double mean = grid::componentMeans(u)[0];
    for (double& v : u.data) v -= mean;

    // semigroup identity
    const double s = ctx.cfg.value("semigroupS", 0.5), t = ctx.cfg.value("semigroupT", 1.5);
    const grid::DiscreteField two = grid::heatSmooth(grid::heatSmooth(u, s), t);
    const grid::DiscreteField one = grid::heatSmooth(u, s + t);
    const double semigroupErr = grid::maxAbs(grid::axpy(-1.0, one, two));
    rep.constants["semigroupErr"] = semigroupErr;
    rep.assertLE("heat_semigroup", semigroupErr, ctx.cfg.value("semigroupTol", 1e-12));

    // heat decay with calibrated (C, c)
    ergodic::HeatDecayOptions hopts;
    hopts.k = ctx.cfg.value("k", 1);
    hopts.L = ctx.cfg.value("L", 1.0);
    hopts.R = ctx.cfg.value("R", 1.0);
    hopts.tList = doubleList(ctx.cfg.at("tList"));
    hopts.plan = planFromConfig(ctx.cfg, ctx.seed);
    if (ctx.field.periodLattice) hopts.periodHint = *ctx.field.periodLattice;
    ExperimentReport heat = ergodic::heatDecay(u, hopts);
    for (auto& a : heat.assertions) rep.assertions.push_back(a);
    for (auto& c : heat.constants) rep.constants["heat_" + c.first] = c.second;
    for (auto& se : heat.series) rep.series.push_back(se);

    // oscillation-gradient inequality sweep
    if (ctx.cfg.contains("sweepL") && ctx.cfg.contains("sweepR")) {
        const std::vector<double> sweepL = doubleList(ctx.cfg.at("sweepL"));
        const std::vector<double> sweepR = doubleList(ctx.cfg.at("sweepR"));
        const coeff::SamplingPlan plan = planFromConfig(ctx.cfg, ctx.seed);
        double cHat = 0.0;
        report::Series sw{"oscillation_sweep", "L (length)", "needed C", {}};
        for (double L : sweepL)
            for (double R : sweepR) {
                if (L > R) continue;
                const ergodic::OscillationParts parts = ergodic::oscillationBound(u, L, R, plan);
                const double denom = parts.diffTerm + parts.gradTerm;
                const double need = denom > 1e-14 ? std::max(0.0, parts.lhs - parts.absMean) / denom : 0.0;
                cHat = std::max(cHat, need);
                sw.xy.emplace_back(L, need);
            }
        rep.constants["oscillationCHat"] = cHat;
        rep.assertLE("oscillation_C", cHat, ctx.cfg.value("oscillationCMax", 10.0));
        rep.series.push_back(std::move(sw));
    }
    return rep;
}

ExperimentReport runTwoscale(Ctx& ctx) {
    twoscale::H1StudyOptions opts;
    opts.epsList = doubleList(ctx.cfg.at("eps"));
    opts.boxSide = ctx.cfg.value("boxSide", 1.0);
    opts.cellsPerEps = ctx.cfg.value("cellsPerEps", 16);
    opts.correctorBox = ctx.cfg.value("correctorBox", 4.0);
    opts.krylov = krylovFromConfig(ctx.cfg);
    opts.plan = planFromConfig(ctx.cfg, ctx.seed);
    opts.threads = ctx.threads;
    opts.dumpDir = ctx.cfg.value("dumpFields", false) ? ctx.outDir : std::string();
    const bvp::FieldFn force = fnFromConfig(ctx.cfg.value("force", json()));
    const bvp::FieldFn boundary = fnFromConfig(ctx.cfg.value("boundary", json()));

    ExperimentReport rep = twoscale::h1ErrorStudy(ctx.field, force, boundary, opts);
    if (ctx.cfg.contains("assert")) {
        const json& a = ctx.cfg.at("assert");
        if (a.contains("exponentMin")) {
            const auto& f = rep.fits["h1_vs_delta"];
            rep.assertGE("h1_delta_exponent", f.degenerate ? 99.0 : f.slope, a.at("exponentMin").get<double>());
        }
        if (a.contains("h1Max")) {
            double worst = 0.0;
            for (auto& [x, y] : rep.series[0].xy) worst = std::max(worst, y);
            rep.assertLE("w_h1_max", worst, a.at("h1Max").get<double>());
        }
    }
    return rep;
}

ExperimentReport runRate(Ctx& ctx) {
    bvp::RateStudyOptions opts;
    opts.epsList = doubleList(ctx.cfg.at("eps"));
    opts.boxSide = ctx.cfg.value("boxSide", 1.0);
    opts.cellsPerEps = ctx.cfg.value("cellsPerEps", 16);
    opts.correctorBox = ctx.cfg.value("correctorBox", 4.0);
    opts.krylov = krylovFromConfig(ctx.cfg);
    opts.threads = ctx.threads;
    opts.computeBound = ctx.cfg.value("computeBound", false);
    opts.k = ctx.cfg.value("k", 1);
    opts.sigma = ctx.cfg.value("sigma", 0.5);
    opts.thetaC = ctx.cfg.value("c", 0.1);
    opts.plan = planFromConfig(ctx.cfg, ctx.seed);
    const bvp::FieldFn force = fnFromConfig(ctx.cfg.value("force", json()));
    const bvp::FieldFn boundary = fnFromConfig(ctx.cfg.value("boundary", json()));

    ExperimentReport rep = bvp::rateStudy(ctx.field, force, boundary, opts);
    if (ctx.cfg.contains("assert")) {
        const json& a = ctx.cfg.at("assert");
        const auto& f = rep.fits["l2_rate"];
        if (a.contains("slopeMin"))
            rep.assertGE("l2_rate_slope", f.degenerate ? 99.0 : f.slope, a.at("slopeMin").get<double>());
        if (a.contains("r2Min"))
            rep.assertGE("l2_rate_r2", f.degenerate ? 1.0 : f.r2, a.at("r2Min").get<double>());
        if (a.contains("errMax")) {
            double worst = 0.0;
            for (auto& [x, y] : rep.series[0].xy) worst = std::max(worst, y);
            rep.assertLE("l2_err_max", worst, a.at("errMax").get<double>());
        }
    }
    return rep;
}

ExperimentReport runProfile(Ctx& ctx) {
    ExperimentReport rep;
    rep.kind = "profile";
    const double eps = ctx.cfg.value("epsilon", 1.0);
    grid::Grid g;
    g.dim = ctx.field.dim;
    g.boundary = grid::Boundary::Dirichlet;
    g.boxSide = ctx.cfg.at("grid").at("ell").get<double>();
    g.n = ctx.cfg.at("grid").at("n").get<int>();

    bvp::DirichletProblem p;
    p.box = g;
    p.force = fnFromConfig(ctx.cfg.value("force", json()));
    p.boundary = fnFromConfig(ctx.cfg.value("boundary", json()));
    p.epsilon = eps;
    p.field = &ctx.field;
    p.krylov = krylovFromConfig(ctx.cfg);
    auto [u, srep] = bvp::solveDirichlet(p);

    Vec x0{0, 0, 0};
    const auto& jx = ctx.cfg.at("center");
    for (int k = 0; k < g.dim; ++k) x0[k] = jx.at(k).get<double>();
    const std::vector<double> rList = doubleList(ctx.cfg.at("radii"));
    const bvp::GradientProfile prof = bvp::gradientProfile(u, x0, rList, ctx.cfg.value("epsFloor", 0.0));

    report::Series s{"gradient_profile", "r (length)", "(avg_{B(x0,r)} |grad u|^2)^{1/2}", {}};
    for (std::size_t i = 0; i < prof.radii.size(); ++i) s.xy.emplace_back(prof.radii[i], prof.values[i]);
    rep.series.push_back(std::move(s));

    if (ctx.cfg.contains("assert")) {
        const json& a = ctx.cfg.at("assert");
        if (a.contains("constantValue")) {
            const double target = a.at("constantValue").get<double>();
            double worst = 0.0;
            for (double v : prof.values) worst = std::max(worst, std::abs(v - target));
            rep.assertLE("profile_constant", worst, a.value("constantTol", 1e-8));
        }
        if (a.contains("maxLE")) {
            double worst = 0.0;
            for (double v : prof.values) worst = std::max(worst, v);
            rep.assertLE("profile_max", worst, a.at("maxLE").get<double>());
        }
    }
    return rep;
}

ExperimentReport runLiouville(Ctx& ctx) {
    bvp::LiouvilleOptions opts;
    opts.sigma = ctx.cfg.at("sigma").get<double>();
    opts.Rlist = doubleList(ctx.cfg.at("R"));
    opts.rProbe = ctx.cfg.value("rProbe", 1.0);
    opts.krylov = krylovFromConfig(ctx.cfg);
    ExperimentReport rep = bvp::liouvilleProbe(ctx.field, opts);
    if (ctx.cfg.contains("assert")) {
        const json& a = ctx.cfg.at("assert");
        if (a.contains("rateLE")) {
            const auto& f = rep.fits["interior_grad_decay"];
            rep.assertLE("interior_grad_rate", f.degenerate ? -99.0 : f.slope, a.at("rateLE").get<double>());
        }
    }
    return rep;
}

}  // namespace

// ----------------------------------------------------------------------------
// Dispatch
// ----------------------------------------------------------------------------

ExperimentReport run(const std::string& configJson, const RunOptions& opts) {
    json cfg;
    try {
        cfg = json::parse(configJson);
    } catch (const std::exception& e) {
        fail(ErrorKind::Config, std::string("config parse error: ") + e.what());
    }
    if (!cfg.contains("kind")) fail(ErrorKind::Config, "config missing 'kind'");
    const std::string kind = cfg.at("kind").get<std::string>();

    Ctx ctx;
    ctx.cfg = cfg;
    ctx.seed = opts.overrideSeed ? opts.seed : cfg.value("seed", std::uint64_t{0});
    ctx.threads = resolveThreads(opts.threads > 0 ? opts.threads : cfg.value("threads", 0));
    ctx.outDir = !opts.outDir.empty() ? opts.outDir : cfg.value("out", std::string());
    if (!ctx.outDir.empty()) std::filesystem::create_directories(ctx.outDir);

    if (cfg.contains("field")) {
        ctx.field = coeff::CoefficientField::load(cfg.at("field").get<std::string>());
        if (!ctx.field.certifiedElliptic())
            fail(ErrorKind::Field, "field fails the ellipticity certificate");
        ctx.hasField = true;
    }

    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep;
    if (kind == "field-check")
        rep = runFieldCheck(ctx);
    else if (kind == "rho")
        rep = runRho(ctx);
    else if (kind == "corrector")
        rep = runCorrector(ctx);
    else if (kind == "effective")
        rep = runEffective(ctx);
    else if (kind == "dual")
        rep = runDual(ctx);
    else if (kind == "growth")
        rep = runGrowth(ctx);
    else if (kind == "cauchy")
        rep = runCauchy(ctx);
    else if (kind == "theta")
        rep = runTheta(ctx);
    else if (kind == "ergodic")
        rep = runErgodic(ctx);
    else if (kind == "twoscale")
        rep = runTwoscale(ctx);
    else if (kind == "rate")
        rep = runRate(ctx);
    else if (kind == "profile")
        rep = runProfile(ctx);
    else if (kind == "liouville")
        rep = runLiouville(ctx);
    else
        fail(ErrorKind::Config, "unknown experiment kind: " + kind);

    rep.kind = kind;
    rep.configEcho = canonicalEcho(cfg, ctx.seed);
    rep.fieldHash = ctx.hasField ? ctx.field.hash() : "";
    rep.wallClock["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!ctx.outDir.empty()) rep.write(ctx.outDir);
    return rep;
}

ExperimentReport runFile(const std::string& configPath, const RunOptions& opts) {
    std::ifstream in(configPath);
    if (!in) fail(ErrorKind::Config, "cannot open config: " + configPath);
    std::stringstream ss;
    ss << in.rdbuf();
    json cfg;
    try {
        cfg = json::parse(ss.str());
    } catch (const std::exception& e) {
        fail(ErrorKind::Config, std::string("config parse error: ") + e.what());
    }
    if (cfg.contains("field")) {
        const std::filesystem::path p = cfg.at("field").get<std::string>();
        if (p.is_relative())
            cfg["field"] = (std::filesystem::path(configPath).parent_path() / p).lexically_normal().string();
    }
    return run(cfg.dump(), opts);
}

int exitCodeFor(const ExperimentReport& rep) { return rep.allPass() ? Ok : AssertionFailure; }

int errorExitCode(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->kind()) {
            case ErrorKind::Config: return ConfigError;
            case ErrorKind::Field: return FieldInvalid;
            case ErrorKind::Solver: return SolverFailure;
            case ErrorKind::Assertion: return AssertionFailure;
            case ErrorKind::Internal: return ConfigError;
        }
    }
    return ConfigError;
}

}  // namespace aphom::experiment
