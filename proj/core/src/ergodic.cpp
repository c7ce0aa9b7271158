#include "aphom/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aphom::ergodic {

using coeff::SamplingPlan;
using grid::DiscreteField;
using grid::Grid;

namespace {

std::array<int, 3> snapShift(const Grid& g, const Vec& y) {
    std::array<int, 3> s{0, 0, 0};
    for (int k = 0; k < g.dim; ++k) s[k] = g.wrap(static_cast<int>(std::lround(y[k] / g.h())));
    return s;
}

/// D_{y1 z1}...D_{yk zk}(g) with all shifts snapped to the torus lattice.
DiscreteField shiftDifference(const DiscreteField& u, const std::vector<std::pair<Vec, Vec>>& pairs) {
    const Grid& g = u.grid;
    const int k = static_cast<int>(pairs.size());
    const std::size_t N = g.cells();
    DiscreteField out(g, u.components);
    const std::size_t terms = std::size_t{1} << k;
    for (std::size_t mask = 0; mask < terms; ++mask) {
        Vec total{0, 0, 0};
        int picks = 0;
        for (int i = 0; i < k; ++i) {
            if (mask & (std::size_t{1} << i)) {
                total = add(total, pairs[i].first);
                ++picks;
            } else {
                total = add(total, pairs[i].second);
            }
        }
        const double sign = ((k - picks) % 2 == 0) ? 1.0 : -1.0;
        const auto off = snapShift(g, total);
        for (int c = 0; c < u.components; ++c) {
            for (std::size_t f = 0; f < N; ++f) {
                auto iv = g.unflat(f);
                for (int a = 0; a < g.dim; ++a) iv[a] = g.wrap(iv[a] + off[a]);
                out.at(c, f) += sign * u.at(c, g.flat(iv));
            }
        }
    }
    return out;
}

std::vector<Vec> torusShifts(const Grid& g, const SamplingPlan& plan) {
    std::vector<Vec> ys;
    ys.reserve(plan.shifts);
    for (int i = 0; i < plan.shifts; ++i) {
        Vec u = haltonPoint(static_cast<std::uint64_t>(i), g.dim, plan.seed + 0x9d3f6b7a2c15e41dULL);
        Vec y{0, 0, 0};
        for (int k = 0; k < g.dim; ++k) y[k] = u[k] * g.boxSide;
        ys.push_back(y);
    }
    return ys;
}

std::vector<Vec> zLattice(const Grid& g, double L, const SamplingPlan& plan, const Vec& y,
                          const std::vector<double>* periodHint) {
    std::vector<Vec> zs;
    const double spacing = L / plan.zPerAxis;
    const int range = static_cast<int>(std::floor(L / spacing + 1e-12));
    std::array<int, 3> iv{0, 0, 0};
    std::function<void(int)> rec = [&](int axis) {
        if (axis == g.dim) {
            Vec z{0, 0, 0};
            for (int k = 0; k < g.dim; ++k) z[k] = iv[k] * spacing;
            if (norm2(z) <= L + 1e-12) zs.push_back(z);
            return;
        }
        for (int i = -range; i <= range; ++i) {
            iv[axis] = i;
            rec(axis + 1);
        }
    };
    rec(0);
    if (periodHint && !periodHint->empty()) {
        Vec snap{0, 0, 0};
        for (int k = 0; k < g.dim; ++k) {
            const double pk = (*periodHint)[k];
            snap[k] = y[k] - pk * std::round(y[k] / pk);
        }
        if (norm2(snap) <= L + 1e-12) zs.push_back(snap);
    }
    return zs;
}

double omegaGridImpl(const DiscreteField& u, int k, double L, double R, const SamplingPlan& plan,
                     const std::vector<double>* periodHint) {
    if (k < 1 || k > 2) fail(ErrorKind::Config, "omega: only k in {1,2} supported");
    const Grid& g = u.grid;
    if (g.boundary != grid::Boundary::Periodic) fail(ErrorKind::Config, "omega: periodic grid functions only");
    const std::vector<Vec> ys = torusShifts(g, plan);

    std::function<double(std::vector<std::pair<Vec, Vec>>&, int)> level =
        [&](std::vector<std::pair<Vec, Vec>>& pairs, int depth) -> double {
        double sup = 0.0;
        for (const Vec& y : ys) {
            double inf = std::numeric_limits<double>::infinity();
            for (const Vec& z : zLattice(g, L, plan, y, periodHint)) {
                pairs.emplace_back(y, z);
                const double v = (depth + 1 == k) ? grid::windowedNorm(shiftDifference(u, pairs), 2.0, R)
                                                  : level(pairs, depth + 1);
                pairs.pop_back();
                inf = std::min(inf, v);
            }
            sup = std::max(sup, inf);
        }
        return sup;
    };
    std::vector<std::pair<Vec, Vec>> pairs;
    return level(pairs, 0);
}

}  // namespace

double omegaGrid(const DiscreteField& g, int k, double L, double R, const SamplingPlan& plan,
                 const std::vector<double>* periodHint) {
    return omegaGridImpl(g, k, L, R, plan, periodHint);
}

OscillationParts oscillationBound(const DiscreteField& u, double L, double R, const SamplingPlan& plan) {
    if (L > R) fail(ErrorKind::Config, "oscillationBound: requires L <= R");
    if (!(L > 0.0)) fail(ErrorKind::Config, "oscillationBound: L must be positive");
    OscillationParts parts;
    parts.lhs = grid::windowedNorm(u, 2.0, R);
    double m2 = 0.0;
    for (double mv : grid::componentMeans(u)) m2 += mv * mv;
    parts.absMean = std::sqrt(m2);
    parts.diffTerm = omegaGrid(u, 1, L, R, plan);
    parts.gradTerm = L * grid::windowedNorm(grid::gradient(u), 2.0, R);
    return parts;
}

report::ExperimentReport heatDecay(const DiscreteField& g, const HeatDecayOptions& opts) {
    report::ExperimentReport rep;
    rep.kind = "heatDecay";
    if (opts.tList.size() < 2) fail(ErrorKind::Config, "heatDecay: need at least two t values");

    double m2 = 0.0;
    for (double mv : grid::componentMeans(g)) m2 += mv * mv;
    const double scale = grid::rmsNorm(g) + 1e-300;
    if (std::sqrt(m2) > 1e-8 * scale + 1e-13) fail(ErrorKind::Config, "heatDecay: g must be mean-zero");
    for (double t : opts.tList)
        if (t < static_cast<double>(opts.k) * opts.R * opts.R - 1e-12)
            fail(ErrorKind::Config, "heatDecay: every t must satisfy t >= k R^2");

    const double om = omegaGridImpl(g, opts.k, opts.L, opts.R, opts.plan,
                                    opts.periodHint.empty() ? nullptr : &opts.periodHint);
    const double gS2R = grid::windowedNorm(g, 2.0, opts.R);

    std::vector<double> lhs, lhsGrad;
    for (double t : opts.tList) {
        const DiscreteField sm = grid::heatSmooth(g, t);
        lhs.push_back(grid::maxAbs(sm));
        lhsGrad.push_back(grid::maxAbs(grid::gradient(sm)));
    }

    // fit c from the early decay, where the exponential term dominates
    const std::size_t half = std::max<std::size_t>(2, opts.tList.size() / 2);
    std::vector<double> cEst;
    for (std::size_t i = 0; i + 1 < half; ++i) {
        const double l1 = lhs[i], l2 = lhs[i + 1];
        if (l1 > std::max(2.0 * om, 1e-13) && l2 > 1e-300 && l1 > l2) {
            const double slope = std::log(l1 / l2) / (opts.tList[i + 1] - opts.tList[i]);
            cEst.push_back(slope * opts.k * opts.L * opts.L);
        }
    }
    double c = 0.1;
    if (!cEst.empty()) {
        std::sort(cEst.begin(), cEst.end());
        c = cEst[cEst.size() / 2];
    }
    c = std::max(c, 1e-8);

    auto rhs0 = [&](double t) { return om + std::exp(-c * t / (opts.k * opts.L * opts.L)) * gS2R; };

    double C = 0.0, Cg = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
        C = std::max(C, lhs[i] / rhs0(opts.tList[i]));
        Cg = std::max(Cg, lhsGrad[i] * std::sqrt(opts.tList[i]) / rhs0(opts.tList[i]));
    }
    C *= 1.0 + 1e-9;
    Cg *= 1.0 + 1e-9;

    report::Series sLhs{"heat_lhs", "t", "||g*Phi_t||_inf", {}};
    report::Series sRhs{"heat_rhs", "t", "C (omega + exp(-c t/(k L^2)) ||g||_{S2R})", {}};
    report::Series sGrad{"heat_grad_lhs", "t", "||grad(g*Phi_t)||_inf", {}};
    bool monotone = true;
    for (std::size_t i = 0; i < opts.tList.size(); ++i) {
        const double t = opts.tList[i];
        sLhs.xy.emplace_back(t, lhs[i]);
        sRhs.xy.emplace_back(t, C * rhs0(t));
        sGrad.xy.emplace_back(t, lhsGrad[i]);
        rep.assertLE("heat_lhs_le_rhs_t" + std::to_string(i), lhs[i], C * rhs0(t) + 1e-14);
        rep.assertLE("heat_grad_le_rhs_t" + std::to_string(i), lhsGrad[i], Cg * rhs0(t) / std::sqrt(t) + 1e-14);
        if (i > 0 && lhs[i] > lhs[i - 1] + 1e-12) monotone = false;
    }
    rep.assertGE("heat_lhs_monotone_noninc", monotone ? 1.0 : 0.0, 1.0);
    rep.constants["C"] = C;
    rep.constants["Cgrad"] = Cg;
    rep.constants["c"] = c;
    rep.constants["omega_k"] = om;
    rep.constants["g_S2R"] = gS2R;
    rep.series.push_back(std::move(sLhs));
    rep.series.push_back(std::move(sRhs));
    rep.series.push_back(std::move(sGrad));
    return rep;
}

ReconstructionParts reconstructionBound(const DiscreteField& g, int k, double T, double c,
                                        const SamplingPlan& plan, int tPoints) {
    ReconstructionParts parts;
    parts.lhs = grid::windowedNorm(g, 2.0, 1.0);
    const DiscreteField grad = grid::gradient(g);

    auto lMenu = [](double t) {
        std::vector<double> Ls{1.0};
        while (Ls.back() * 2.0 <= t) Ls.push_back(Ls.back() * 2.0);
        return Ls;
    };

    double head = std::numeric_limits<double>::infinity();
    const double gT = grid::windowedNorm(g, 2.0, T);
    for (double L : lMenu(T))
        head = std::min(head, omegaGrid(g, k, L, T, plan) + std::exp(-c * T * T / (L * L)) * gT);
    parts.headTerm = head;

    parts.tGrid.resize(tPoints);
    parts.integrand.resize(tPoints);
    for (int i = 0; i < tPoints; ++i) {
        const double t = std::exp(std::log(T) * i / (tPoints - 1));  // log-spaced on [1, T]
        const double gradT = grid::windowedNorm(grad, 2.0, t);
        double best = std::numeric_limits<double>::infinity();
        for (double L : lMenu(t))
            best = std::min(best, omegaGrid(grad, k, L, t, plan) + std::exp(-c * t * t / (L * L)) * gradT);
        parts.tGrid[i] = t;
        parts.integrand[i] = best;
    }
    double integral = 0.0;
    for (int i = 0; i + 1 < tPoints; ++i)
        integral += 0.5 * (parts.integrand[i] + parts.integrand[i + 1]) * (parts.tGrid[i + 1] - parts.tGrid[i]);
    parts.integral = integral;
    return parts;
}

// ----------------------------------------------------------------------------
// Theta bound
// ----------------------------------------------------------------------------

namespace {

double rhoAt(const RhoTable& tab, int iL, double t) {
    // piecewise linear in log t, clamped at the table ends
    const std::vector<double>& ts = tab.ts;
    if (t <= ts.front()) return tab.rho[iL].front();
    if (t >= ts.back()) return tab.rho[iL].back();
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        if (t <= ts[i + 1]) {
            const double w = (std::log(t) - std::log(ts[i])) / (std::log(ts[i + 1]) - std::log(ts[i]));
            return (1.0 - w) * tab.rho[iL][i] + w * tab.rho[iL][i + 1];
        }
    }
    return tab.rho[iL].back();
}

}  // namespace

double thetaBound(const ThetaSpec& spec, std::vector<ThetaRow>* rows) {
    if (!(spec.sigma > 0.0) || spec.sigma >= 1.0)
        fail(ErrorKind::Config, "thetaBound: sigma must lie in (0,1); the sigma = 1 limit diverges");
    if (!(spec.T >= 1.0)) fail(ErrorKind::Config, "thetaBound: T must be >= 1");
    const RhoTable& tab = spec.rhoSamples;
    if (tab.Ls.empty() || tab.ts.empty()) fail(ErrorKind::Config, "thetaBound: empty rho table");
    if (tab.Ls.front() > 1.0 + 1e-9) fail(ErrorKind::Config, "thetaBound: rho table must sample L = 1");
    if (tab.ts.front() > 1.0 + 1e-9 || tab.ts.back() < spec.T - 1e-9)
        fail(ErrorKind::Config, "thetaBound: rho table does not cover [1, T]");
    for (const auto& row : tab.rho)
        for (double v : row)
            if (v < 0.0) fail(ErrorKind::Config, "thetaBound: negative rho sample");

    // integration nodes: table t values inside [1, T] plus both endpoints
    std::vector<double> nodes{1.0};
    for (double t : tab.ts)
        if (t > 1.0 + 1e-12 && t < spec.T - 1e-12) nodes.push_back(t);
    nodes.push_back(spec.T);

    auto evalNode = [&](double t) {
        ThetaRow row;
        row.t = t;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t iL = 0; iL < tab.Ls.size(); ++iL) {
            const double L = tab.Ls[iL];
            if (L > t + 1e-12 || L < 1.0 - 1e-12) continue;
            const double rhoV = rhoAt(tab, static_cast<int>(iL), t);
            const double expV = std::exp(-spec.c * t * t / (L * L));
            if (rhoV + expV < best) {
                best = rhoV + expV;
                row.Lstar = L;
                row.rho = rhoV;
                row.expTerm = expV;
            }
        }
        if (!std::isfinite(best)) {
            row.Lstar = tab.Ls[0];
            row.rho = rhoAt(tab, 0, t);
            row.expTerm = std::exp(-spec.c * t * t / (tab.Ls[0] * tab.Ls[0]));
            best = row.rho + row.expTerm;
        }
        row.integrand = best * std::pow(spec.T / t, spec.sigma);
        return row;
    };

    double theta = 0.0;
    ThetaRow prev = evalNode(nodes[0]);
    if (rows) rows->push_back(prev);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const ThetaRow cur = evalNode(nodes[i]);
        theta += 0.5 * (prev.integrand + cur.integrand) * (cur.t - prev.t);
        if (rows) rows->push_back(cur);
        prev = cur;
    }
    return theta;
}

RhoTable buildRhoTable(const coeff::CoefficientField& field, int k, const std::vector<double>& Ls,
                       const std::vector<double>& ts, const SamplingPlan& plan, double qbar) {
    RhoTable tab;
    tab.Ls = Ls;
    tab.ts = ts;
    tab.rho.assign(Ls.size(), std::vector<double>(ts.size(), 0.0));
    for (std::size_t it = 0; it < ts.size(); ++it) {
        const std::vector<double> col = coeff::rhoSweep(field, k, Ls, ts[it], plan, qbar);
        for (std::size_t iL = 0; iL < Ls.size(); ++iL) tab.rho[iL][it] = col[iL];
    }
    return tab;
}

}  // namespace aphom::ergodic
