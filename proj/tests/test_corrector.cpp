#include <doctest.h>

#include <cmath>

#include "aphom/corrector.hpp"
#include "test_common.hpp"

using namespace aphom;
using namespace aphom::corrector;
using grid::DiscreteField;
using grid::Grid;
using testutil::loadField;
using testutil::periodicGrid;

TEST_SUITE_BEGIN("corrector");

namespace {

CorrectorOptions fastOpts(double tol = 1e-10) {
    CorrectorOptions o;
    o.krylov.tol = tol;
    o.krylov.maxIter = 200000;
    o.threads = 2;
    return o;
}

}  // namespace

TEST_CASE("constant field: chi vanishes to solver tolerance") {
    const coeff::CoefficientField f = loadField("const2d");
    const Grid g = periodicGrid(2, 4.0, 32);
    const CorrectorSet cs = solveCorrector(f, 8.0, g, fastOpts());
    CHECK(grid::windowedNorm(cs.chi, 2.0, 1.0) <= 1e-12);
}

TEST_CASE("1-D corrector matches a doubly refined oracle solve within 1e-4 relative L2") {
    const coeff::CoefficientField f = loadField("cos1d");
    const double T = 4.0;
    auto solveAt = [&](int n) { return solveCorrector(f, T, periodicGrid(1, 4.0, n), fastOpts(1e-11)); };
    const CorrectorSet coarse = solveAt(1024);
    const CorrectorSet fine = solveAt(4096);
    // compare on the coarse lattice: with cell-centered grids the coarse center
    // sits midway between fine cells 4i+1 and 4i+2
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 1024; ++i) {
        const double cv = coarse.chi.data[i];
        const double fv = 0.5 * (fine.chi.data[4 * i + 1] + fine.chi.data[4 * i + 2]);
        num += (cv - fv) * (cv - fv);
        den += fv * fv;
    }
    CHECK(std::sqrt(num / den) <= 1e-4);
}

TEST_CASE("translation equivariance on a grid-commensurate shift") {
    // A(. + x0) with x0 = 16 cells; chi of the translate equals the translated chi
    const coeff::CoefficientField f = loadField("cos1d");
    const Grid g = periodicGrid(1, 4.0, 128);
    const double x0 = 16.0 * g.h();

    coeff::CoefficientField shifted = f;
    const double w = 2.0 * M_PI;
    shifted.modes[0].cosAmp(0, 0, 0, 0) = std::cos(w * x0);
    shifted.modes[0].sinAmp(0, 0, 0, 0) = -std::sin(w * x0);

    const CorrectorSet a = solveCorrector(f, 4.0, g, fastOpts(1e-12));
    const CorrectorSet b = solveCorrector(shifted, 4.0, g, fastOpts(1e-12));
    double worst = 0.0;
    for (int i = 0; i < g.n; ++i)
        worst = std::max(worst, std::abs(b.chi.data[i] - a.chi.data[(i + 16) % g.n]));
    CHECK(worst <= 1e-8);
}

TEST_CASE("1-D effective tensor converges to the harmonic mean sqrt(3)") {
    // oracle: int_0^1 dy / (2 + cos 2 pi y) = 1 / sqrt(3)
    const coeff::CoefficientField f = loadField("cos1d");
    const Grid g = periodicGrid(1, 4.0, 256);
    const CorrectorSet cs = solveCorrector(f, 16.0, g, fastOpts());
    const EffectiveTensor eff = effectiveTensor(cs);
    CHECK(eff.values(0, 0, 0, 0) == doctest::Approx(std::sqrt(3.0)).epsilon(0.01));
}

TEST_CASE("1-D effective tensor error decreases monotonically in T") {
    const coeff::CoefficientField f = loadField("cos1d");
    const Grid g = periodicGrid(1, 4.0, 256);
    const double target = std::sqrt(3.0);
    double prev = 1e300;
    for (double T : {2.0, 4.0, 8.0}) {
        const CorrectorSet cs = solveCorrector(f, T, g, fastOpts());
        const double err = std::abs(effectiveTensor(cs).values(0, 0, 0, 0) - target);
        CHECK(err <= prev * (1.0 + 1e-9));
        prev = err;
    }
}

TEST_CASE("2-D laminate: effective tensor matches diag(sqrt(3), 2) within 1%") {
    const coeff::CoefficientField f = loadField("laminate2d");
    const Grid g = periodicGrid(2, 4.0, 128);
    const CorrectorSet cs = solveCorrector(f, 8.0, g, fastOpts(1e-9));
    const EffectiveTensor eff = effectiveTensor(cs);
    CHECK(eff.values(0, 0, 0, 0) == doctest::Approx(std::sqrt(3.0)).epsilon(0.01));
    CHECK(eff.values(1, 0, 1, 0) == doctest::Approx(2.0).epsilon(0.01));
    CHECK(std::abs(eff.values(0, 0, 1, 0)) <= 0.01);
    CHECK(std::abs(eff.values(1, 0, 0, 0)) <= 0.01);
    CHECK(eff.eigMin >= f.mu - 1e-9);
}

TEST_CASE("effective tensor of the adjoint field is the transpose") {
    const coeff::CoefficientField f = loadField("nonsym2d");
    const Grid g = periodicGrid(2, 4.0, 64);
    const double tol = 1e-11;
    const CorrectorSet cs = solveCorrector(f, 4.0, g, fastOpts(tol));
    const CorrectorSet csAdj = solveCorrector(f.adjointField(), 4.0, g, fastOpts(tol));
    const Tensor4 diff = effectiveTensor(csAdj).values - effectiveTensor(cs).values.adjoint();
    CHECK(diff.maxAbs() <= 2.0 * tol);
}

TEST_CASE("energy bound: one calibrated constant across the field family") {
    // ||grad chi||_{S2_T} + T^-1 ||chi||_{S2_T} <= C with one C for all fields
    std::vector<double> energies;
    for (const char* name : {"cos1d", "quasi1d"}) {
        const coeff::CoefficientField f = loadField(name);
        for (double T : {4.0, 8.0}) {
            const Grid g = correctorGrid(f, T);
            const CorrectorSet cs = solveCorrector(f, T, g, fastOpts(1e-9));
            const double R = std::min(T, g.boxSide / 2.0);
            energies.push_back(grid::windowedNorm(cs.gradChi, 2.0, R) +
                               grid::windowedNorm(cs.chi, 2.0, R) / T);
        }
    }
    const double C = energies.front() * 2.0 + 0.5;
    for (double e : energies) CHECK(e <= C);
}

TEST_CASE("psi-proxy inequality: <A(psi - grad chi_T) psi> >= mu <|psi - grad chi_T|^2> - tol") {
    const coeff::CoefficientField f = loadField("quasi1d");
    const Grid g = periodicGrid(1, 64.0, 512);
    const double Tmax = 8.0;
    const CorrectorSet ref = solveCorrector(f, Tmax, g, fastOpts(1e-11));
    for (double T : {2.0, 4.0}) {
        const CorrectorSet cs = solveCorrector(f, T, g, fastOpts(1e-11));
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < g.cells(); ++i) {
            const double psi = ref.gradChi.data[i];
            const double diff = psi - cs.gradChi.data[i];
            const double x = (i + 0.5) * g.h() + 0.5 * g.h();  // staggered sample point
            const double a = f.evaluate(makeVec(x))(0, 0, 0, 0);
            lhs += a * diff * psi;
            rhs += diff * diff;
        }
        lhs /= static_cast<double>(g.cells());
        rhs /= static_cast<double>(g.cells());
        CHECK(lhs >= f.mu * rhs - 1e-6);
    }
}

TEST_CASE("dual correctors: constant field gives zero b, phi, h") {
    const coeff::CoefficientField f = loadField("const2d");
    const Grid g = periodicGrid(2, 4.0, 32);
    const CorrectorSet cs = solveCorrector(f, 4.0, g, fastOpts());
    const DualCorrectorSet dual = fluxAndDual(cs, effectiveTensor(cs), 2);
    CHECK(grid::rmsNorm(dual.bT) <= 1e-11);
    CHECK(grid::rmsNorm(dual.phiT) <= 1e-10);
    CHECK(grid::rmsNorm(dual.hT) <= 1e-9);
}

TEST_CASE("flux identities: residuals fall at order >= 1 under h-halving") {
    const coeff::CoefficientField f = loadField("laminate2d");
    const double T = 4.0;
    std::vector<std::pair<double, double>> divb, recon;
    for (int n : {64, 128, 256}) {
        const Grid g = periodicGrid(2, 4.0, n);
        const CorrectorSet cs = solveCorrector(f, T, g, fastOpts(1e-11));
        const DualCorrectorSet dual = fluxAndDual(cs, effectiveTensor(cs), 2);
        const FluxIdentityResiduals res = fluxIdentityResiduals(cs, dual);
        divb.emplace_back(g.h(), res.divBRel);
        recon.emplace_back(g.h(), res.reconRel);
    }
    CHECK(report::fitPowerLaw(divb).slope >= 1.0);
    CHECK(report::fitPowerLaw(recon).slope >= 1.0);
}

TEST_CASE("growth study: periodic field has bounded chi norms") {
    const coeff::CoefficientField f = loadField("cos1d");
    StudyOptions opts;
    opts.corr = fastOpts(1e-10);
    report::ExperimentReport rep = growthStudy(f, {4.0, 8.0, 16.0}, opts);
    const auto& fit = rep.fits.at("chi_S21");
    CHECK_FALSE(fit.degenerate);
    CHECK(fit.slope <= 0.1);
}

TEST_CASE("growth study: constant field reports degenerate slopes") {
    const coeff::CoefficientField f = loadField("const1d");
    StudyOptions opts;
    opts.corr = fastOpts();
    report::ExperimentReport rep = growthStudy(f, {4.0, 8.0, 16.0}, opts);
    CHECK(rep.fits.at("chi_S21").degenerate);
}

TEST_CASE("cauchy study: periodic field decays fast, constant field is zero") {
    const coeff::CoefficientField f = loadField("cos1d");
    StudyOptions opts;
    opts.corr = fastOpts(1e-11);
    opts.useCommonGrid = true;
    opts.commonGrid = periodicGrid(1, 4.0, 256);
    report::ExperimentReport rep = cauchyStudy(f, {2.0, 4.0, 8.0, 16.0}, opts);
    CHECK(rep.constants.at("betaHat") >= 0.8);

    const coeff::CoefficientField c = loadField("const1d");
    StudyOptions copts;
    copts.corr = fastOpts();
    copts.useCommonGrid = true;
    copts.commonGrid = periodicGrid(1, 4.0, 64);
    report::ExperimentReport crep = cauchyStudy(c, {2.0, 4.0, 8.0}, copts);
    CHECK(crep.fits.at("cauchy_decay").degenerate);
}

TEST_CASE("solveCorrector enforces the box and resolution rules") {
    const coeff::CoefficientField f = loadField("quasi1d");
    CHECK_THROWS_AS(solveCorrector(f, 8.0, periodicGrid(1, 16.0, 128), fastOpts()), Error);  // 16 < 8T
    const coeff::CoefficientField p = loadField("cos1d");
    CHECK_THROWS_AS(solveCorrector(p, 4.0, periodicGrid(1, 4.0, 16), fastOpts()), Error);  // h too coarse
}

TEST_SUITE_END();
