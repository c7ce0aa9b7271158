#include "aphom/coeff.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace aphom::coeff {

using nlohmann::json;

// ----------------------------------------------------------------------------
// CoefficientField
// ----------------------------------------------------------------------------

bool CoefficientField::isScalarIsotropic() const {
    if (m != 1) return false;
    auto diagOnly = [&](const Tensor4& t) {
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                if (i != j && t(i, 0, j, 0) != 0.0) return false;
        return true;
    };
    if (!diagOnly(constTerm)) return false;
    for (const TrigMode& mo : modes)
        if (!diagOnly(mo.cosAmp) || !diagOnly(mo.sinAmp)) return false;
    return true;
}

CoefficientField CoefficientField::adjointField() const {
    CoefficientField f = *this;
    f.constTerm = constTerm.adjoint();
    for (TrigMode& mo : f.modes) {
        mo.cosAmp = mo.cosAmp.adjoint();
        mo.sinAmp = mo.sinAmp.adjoint();
    }
    return f;
}

double CoefficientField::maxFrequency() const {
    double w = 0.0;
    for (const TrigMode& mo : modes) w = std::max(w, norm2(mo.omega));
    return w;
}

double CoefficientField::longestPeriod() const {
    if (periodLattice) {
        double p = 0.0;
        for (double v : *periodLattice) p = std::max(p, v);
        return p;
    }
    double wmin = 0.0;
    for (const TrigMode& mo : modes) {
        const double w = norm2(mo.omega);
        if (w > 0.0 && (wmin == 0.0 || w < wmin)) wmin = w;
    }
    return wmin > 0.0 ? 2.0 * M_PI / wmin : 0.0;
}

std::pair<double, double> CoefficientField::ellipticityCertificate() const {
    const int n = dim * m;
    SymEig e = symmetricEigen(constTerm.symmetricPart().asMatrix(), n);
    double spread = 0.0;
    for (const TrigMode& mo : modes) spread += mo.cosAmp.spectral() + mo.sinAmp.spectral();
    return {e.values.front() - spread, e.values.back() + spread};
}

bool CoefficientField::certifiedElliptic() const {
    auto [lo, hi] = ellipticityCertificate();
    return lo >= mu - 1e-12 && hi <= 1.0 / mu + 1e-12;
}

// ----------------------------------------------------------------------------
// JSON format (External Interfaces):
// {"dim", "m", "mu", "const": nested [i][a][j][b], "modes": [...], "period"}
// ----------------------------------------------------------------------------

namespace {

json tensorToJson(const Tensor4& t) {
    const int d = t.dim(), m = t.msize();
    json ji = json::array();
    for (int i = 0; i < d; ++i) {
        json ja = json::array();
        for (int a = 0; a < m; ++a) {
            json jj = json::array();
            for (int j = 0; j < d; ++j) {
                json jb = json::array();
                for (int b = 0; b < m; ++b) jb.push_back(t(i, a, j, b));
                jj.push_back(jb);
            }
            ja.push_back(jj);
        }
        ji.push_back(ja);
    }
    return ji;
}

Tensor4 tensorFromJson(const json& j, int d, int m, const char* what) {
    Tensor4 t(d, m);
    if (!j.is_array() || static_cast<int>(j.size()) != d)
        fail(ErrorKind::Field, std::string(what) + ": expected nested [dim][m][dim][m] array");
    for (int i = 0; i < d; ++i)
        for (int a = 0; a < m; ++a)
            for (int jj = 0; jj < d; ++jj)
                for (int b = 0; b < m; ++b) {
                    const json& v = j.at(i).at(a).at(jj).at(b);
                    if (!v.is_number()) fail(ErrorKind::Field, std::string(what) + ": non-numeric entry");
                    const double x = v.get<double>();
                    if (!std::isfinite(x)) fail(ErrorKind::Field, std::string(what) + ": non-finite entry");
                    t(i, a, jj, b) = x;
                }
    return t;
}

}  // namespace

std::string CoefficientField::toJson() const {
    json j;
    j["dim"] = dim;
    j["m"] = m;
    j["mu"] = mu;
    j["const"] = tensorToJson(constTerm);
    json jm = json::array();
    for (const TrigMode& mo : modes) {
        json e;
        json om = json::array();
        for (int k = 0; k < dim; ++k) om.push_back(mo.omega[k]);
        e["omega"] = om;
        e["cos"] = tensorToJson(mo.cosAmp);
        e["sin"] = tensorToJson(mo.sinAmp);
        jm.push_back(e);
    }
    j["modes"] = jm;
    if (periodLattice) j["period"] = *periodLattice;
    return j.dump(2);
}

CoefficientField CoefficientField::fromJson(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        fail(ErrorKind::Field, std::string("field JSON parse error: ") + e.what());
    }
    CoefficientField f;
    f.dim = j.at("dim").get<int>();
    f.m = j.value("m", 1);
    f.mu = j.at("mu").get<double>();
    if (f.dim < 1 || f.dim > 3) fail(ErrorKind::Field, "dim must be 1, 2 or 3");
    if (f.m < 1 || f.m > 3) fail(ErrorKind::Field, "m must be 1, 2 or 3");
    if (!(f.mu > 0.0)) fail(ErrorKind::Field, "mu must be positive");
    f.constTerm = tensorFromJson(j.at("const"), f.dim, f.m, "const");
    if (j.contains("modes")) {
        for (const json& e : j.at("modes")) {
            TrigMode mo;
            const json& om = e.at("omega");
            if (static_cast<int>(om.size()) != f.dim) fail(ErrorKind::Field, "omega length != dim");
            for (int k = 0; k < f.dim; ++k) mo.omega[k] = om.at(k).get<double>();
            if (norm2(mo.omega) == 0.0) fail(ErrorKind::Field, "zero frequency mode (fold into const)");
            mo.cosAmp = tensorFromJson(e.at("cos"), f.dim, f.m, "cos");
            mo.sinAmp = tensorFromJson(e.at("sin"), f.dim, f.m, "sin");
            f.modes.push_back(std::move(mo));
        }
    }
    if (j.contains("period")) {
        std::vector<double> p = j.at("period").get<std::vector<double>>();
        if (static_cast<int>(p.size()) != f.dim) fail(ErrorKind::Field, "period length != dim");
        for (double v : p)
            if (!(v > 0.0)) fail(ErrorKind::Field, "period entries must be positive");
        // every mode must be commensurate with the claimed lattice
        for (const TrigMode& mo : f.modes)
            for (int k = 0; k < f.dim; ++k) {
                const double cycles = mo.omega[k] * p[k] / (2.0 * M_PI);
                if (std::abs(cycles - std::round(cycles)) > 1e-9)
                    fail(ErrorKind::Field, "period lattice incommensurate with mode frequencies");
            }
        f.periodLattice = std::move(p);
    }
    return f;
}

CoefficientField CoefficientField::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Field, "cannot open field file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return fromJson(ss.str());
}

void CoefficientField::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Config, "cannot write field file: " + path);
    out << toJson() << "\n";
}

std::string CoefficientField::hash() const { return hexHash(fnv1a(toJson())); }

// ----------------------------------------------------------------------------
// Difference operators
// ----------------------------------------------------------------------------

namespace {

/// Expansion of D_{y1 z1} ... D_{yk zk} into 2^k signed point evaluations.
struct DiffExpansion {
    std::vector<Vec> shifts;
    std::vector<double> signs;
};

DiffExpansion expandSpec(const DifferenceSpec& spec) {
    const int k = spec.order();
    if (k < 1) fail(ErrorKind::Config, "difference spec needs order >= 1");
    DiffExpansion e;
    const std::size_t count = std::size_t{1} << k;
    e.shifts.resize(count);
    e.signs.resize(count);
    for (std::size_t mask = 0; mask < count; ++mask) {
        Vec s{0, 0, 0};
        int picks = 0;
        for (int i = 0; i < k; ++i) {
            if (mask & (std::size_t{1} << i)) {
                s = add(s, spec.pairs[i].first);
                ++picks;
            } else {
                s = add(s, spec.pairs[i].second);
            }
        }
        e.shifts[mask] = s;
        e.signs[mask] = ((k - picks) % 2 == 0) ? 1.0 : -1.0;
    }
    return e;
}

}  // namespace

double difference(const std::function<double(const Vec&)>& g, const DifferenceSpec& spec, const Vec& x) {
    const DiffExpansion e = expandSpec(spec);
    double v = 0.0;
    for (std::size_t i = 0; i < e.shifts.size(); ++i) v += e.signs[i] * g(add(x, e.shifts[i]));
    return v;
}

Tensor4 difference(const CoefficientField& field, const DifferenceSpec& spec, const Vec& x) {
    const DiffExpansion e = expandSpec(spec);
    Tensor4 out(field.dim, field.m);
    for (std::size_t i = 0; i < e.shifts.size(); ++i) {
        Tensor4 t = field.evaluate(add(x, e.shifts[i]));
        t *= e.signs[i];
        out += t;
    }
    return out;
}

// ----------------------------------------------------------------------------
// S^p_R estimator
// ----------------------------------------------------------------------------

namespace {

/// Trapezoid average of |g|^p over the cube [c-R, c+R]^d, then max over centers.
double sNormOverCenters(const std::function<double(const Vec&)>& absG, double p, double R, int dim,
                        const SamplingPlan& plan, const std::vector<Vec>& centers) {
    const int q = std::max(2, plan.quadPerAxis);
    std::vector<double> w(q, 1.0);
    w.front() = w.back() = 0.5;
    double best = 0.0;
    std::array<int, 3> iv{0, 0, 0};
    for (const Vec& c : centers) {
        double sum = 0.0, wsum = 0.0;
        // tensor-product trapezoid
        std::size_t total = 1;
        for (int k = 0; k < dim; ++k) total *= static_cast<std::size_t>(q);
        for (std::size_t f = 0; f < total; ++f) {
            std::size_t rest = f;
            double wt = 1.0;
            Vec x = c;
            for (int k = dim - 1; k >= 0; --k) {
                iv[k] = static_cast<int>(rest % q);
                rest /= q;
                wt *= w[iv[k]];
                x[k] = c[k] - R + 2.0 * R * iv[k] / (q - 1);
            }
            const double v = absG(x);
            sum += wt * std::pow(v, p);
            wsum += wt;
        }
        best = std::max(best, std::pow(sum / wsum, 1.0 / p));
    }
    return best;
}

std::vector<Vec> haltonCenters(int count, int dim, double radius, std::uint64_t seed) {
    std::vector<Vec> cs;
    cs.reserve(count + 1);
    cs.push_back(Vec{0, 0, 0});
    for (int i = 0; i < count; ++i) {
        Vec u = haltonPoint(static_cast<std::uint64_t>(i), dim, seed);
        Vec c{0, 0, 0};
        for (int k = 0; k < dim; ++k) c[k] = (2.0 * u[k] - 1.0) * radius;
        cs.push_back(c);
    }
    return cs;
}

}  // namespace

double sNorm(const std::function<double(const Vec&)>& g, double p, double R, int dim, const SamplingPlan& plan) {
    if (plan.centers < 1 || plan.quadPerAxis < 2) fail(ErrorKind::Config, "sNorm: empty sampling plan");
    if (!(R > 0.0)) fail(ErrorKind::Config, "sNorm: window radius must be positive");
    auto absG = [&g](const Vec& x) { return std::abs(g(x)); };
    return sNormOverCenters(absG, p, R, dim, plan, haltonCenters(plan.centers, dim, plan.supRadius, plan.seed));
}

// ----------------------------------------------------------------------------
// rho_k and omega_k
// ----------------------------------------------------------------------------

double exponentP(int k, double qbar) {
    if (!(qbar > 2.0)) fail(ErrorKind::Config, "reverse-Holder exponent must exceed 2");
    return static_cast<double>(k) / (0.5 - 1.0 / qbar);
}

namespace {

/// z candidates: uniform lattice of the given spacing clipped to |z| <= L,
/// plus (for periodic fields) the snapped representative of y mod lattice,
/// which makes exact periodicity detectable.
std::vector<Vec> zCandidates(int dim, double L, double spacing, const Vec& y,
                             const std::vector<double>* period) {
    std::vector<Vec> zs;
    const int range = static_cast<int>(std::floor(L / spacing + 1e-12));
    std::array<int, 3> iv{0, 0, 0};
    std::function<void(int)> rec = [&](int axis) {
        if (axis == dim) {
            Vec z{0, 0, 0};
            for (int k = 0; k < dim; ++k) z[k] = iv[k] * spacing;
            if (norm2(z) <= L + 1e-12) zs.push_back(z);
            return;
        }
        for (int i = -range; i <= range; ++i) {
            iv[axis] = i;
            rec(axis + 1);
        }
    };
    rec(0);
    if (period) {
        Vec snap{0, 0, 0};
        for (int k = 0; k < dim; ++k) {
            const double pk = (*period)[k];
            snap[k] = y[k] - pk * std::round(y[k] / pk);
        }
        if (norm2(snap) <= L + 1e-12) zs.push_back(snap);
    }
    return zs;
}

std::vector<Vec> yShifts(int dim, const SamplingPlan& plan) {
    std::vector<Vec> ys;
    ys.reserve(plan.shifts);
    for (int i = 0; i < plan.shifts; ++i) {
        Vec u = haltonPoint(static_cast<std::uint64_t>(i), dim, plan.seed + 0x517cc1b727220a95ULL);
        Vec y{0, 0, 0};
        for (int k = 0; k < dim; ++k) y[k] = (2.0 * u[k] - 1.0) * plan.supRadius;
        ys.push_back(y);
    }
    return ys;
}

/// |D_{pairs} A|_F as a cheap stack-based evaluator.
double diffFro(const CoefficientField& field, const std::vector<std::pair<Vec, Vec>>& pairs, const Vec& x) {
    DifferenceSpec spec{pairs};
    const Tensor4 t = difference(field, spec, x);
    return t.frobenius();
}

double sNormDiff(const CoefficientField& field, const std::vector<std::pair<Vec, Vec>>& pairs, double p,
                 double R, const SamplingPlan& plan, const std::vector<Vec>& centers) {
    auto absG = [&](const Vec& x) { return diffFro(field, pairs, x); };
    return sNormOverCenters(absG, p, R, field.dim, plan, centers);
}

double rhoWithSpacing(const CoefficientField& field, int k, double L, double R, const SamplingPlan& plan,
                      double qbar, double spacing) {
    if (k < 1 || k > 2) fail(ErrorKind::Config, "rho: only k in {1,2} is supported");
    if (!(L > 0.0) || !(R > 0.0)) fail(ErrorKind::Config, "rho: L and R must be positive");
    if (plan.shifts < 1 || plan.zPerAxis < 1) fail(ErrorKind::Config, "rho: degenerate sampling plan");
    const double p = exponentP(k, qbar);
    const std::vector<double>* period = field.periodLattice ? &*field.periodLattice : nullptr;
    const std::vector<Vec> centers = haltonCenters(plan.centers, field.dim, plan.supRadius, plan.seed);
    const std::vector<Vec> ys = yShifts(field.dim, plan);

    if (k == 1) {
        double sup = 0.0;
        for (const Vec& y : ys) {
            double inf = std::numeric_limits<double>::infinity();
            for (const Vec& z : zCandidates(field.dim, L, spacing, y, period))
                inf = std::min(inf, sNormDiff(field, {{y, z}}, p, R, plan, centers));
            sup = std::max(sup, inf);
        }
        return sup;
    }

    // k == 2: partitions {P} and {{1},{2}}
    double sup1 = 0.0;
    for (const Vec& y1 : ys) {
        double inf1 = std::numeric_limits<double>::infinity();
        for (const Vec& z1 : zCandidates(field.dim, L, spacing, y1, period)) {
            const double first = sNormDiff(field, {{y1, z1}}, p, R, plan, centers);
            double sup2 = 0.0;
            for (const Vec& y2 : ys) {
                double inf2 = std::numeric_limits<double>::infinity();
                for (const Vec& z2 : zCandidates(field.dim, L, spacing, y2, period)) {
                    const double joint = sNormDiff(field, {{y1, z1}, {y2, z2}}, p, R, plan, centers);
                    const double second = sNormDiff(field, {{y2, z2}}, p, R, plan, centers);
                    inf2 = std::min(inf2, joint + first * second);
                }
                sup2 = std::max(sup2, inf2);
            }
            inf1 = std::min(inf1, sup2);
        }
        sup1 = std::max(sup1, inf1);
    }
    return sup1;
}

}  // namespace

double rho(const CoefficientField& field, int k, double L, double R, const SamplingPlan& plan, double qbar) {
    return rhoWithSpacing(field, k, L, R, plan, qbar, L / plan.zPerAxis);
}

std::vector<double> rhoSweep(const CoefficientField& field, int k, const std::vector<double>& Ls, double R,
                             const SamplingPlan& plan, double qbar) {
    if (Ls.empty()) return {};
    double minL = Ls.front();
    for (double L : Ls) minL = std::min(minL, L);
    const double spacing = minL / plan.zPerAxis;  // shared spacing => nested candidate sets
    std::vector<double> out;
    out.reserve(Ls.size());
    for (double L : Ls) out.push_back(rhoWithSpacing(field, k, L, R, plan, qbar, spacing));
    return out;
}

double omega(const std::function<double(const Vec&)>& g, int dim, int k, double L, double R,
             const SamplingPlan& plan, const std::vector<double>* periodHint) {
    if (k < 1 || k > 2) fail(ErrorKind::Config, "omega: only k in {1,2} is supported");
    const double spacing = L / plan.zPerAxis;
    const std::vector<Vec> centers = haltonCenters(plan.centers, dim, plan.supRadius, plan.seed);
    const std::vector<Vec> ys = yShifts(dim, plan);

    std::function<double(std::vector<std::pair<Vec, Vec>>&, int)> level =
        [&](std::vector<std::pair<Vec, Vec>>& pairs, int depth) -> double {
        double sup = 0.0;
        for (const Vec& y : ys) {
            double inf = std::numeric_limits<double>::infinity();
            for (const Vec& z : zCandidates(dim, L, spacing, y, periodHint)) {
                pairs.emplace_back(y, z);
                double v;
                if (depth + 1 == k) {
                    DifferenceSpec spec{pairs};
                    auto absG = [&](const Vec& x) { return difference(g, spec, x); };
                    v = sNormOverCenters([&](const Vec& x) { return std::abs(absG(x)); }, 2.0, R, dim, plan,
                                         centers);
                } else {
                    v = level(pairs, depth + 1);
                }
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

// ----------------------------------------------------------------------------
// Mean values
// ----------------------------------------------------------------------------

namespace {

int meanResolution(double R, double maxFreq, int base) {
    if (maxFreq <= 0.0) return std::max(base, 2);
    const double cyclesAcross = 2.0 * R * maxFreq / (2.0 * M_PI);
    const int need = static_cast<int>(std::ceil(8.0 * cyclesAcross)) + 1;
    return std::min(std::max(base, need), 20001);
}

}  // namespace

Tensor4 meanValue(const CoefficientField& field, double R, const SamplingPlan& plan) {
    const int q = meanResolution(R, field.maxFrequency(), plan.quadPerAxis);
    std::vector<double> w(q, 1.0);
    w.front() = w.back() = 0.5;
    Tensor4 acc(field.dim, field.m);
    double wsum = 0.0;
    std::array<int, 3> iv{0, 0, 0};
    std::size_t total = 1;
    for (int k = 0; k < field.dim; ++k) total *= static_cast<std::size_t>(q);
    for (std::size_t f = 0; f < total; ++f) {
        std::size_t rest = f;
        double wt = 1.0;
        Vec x{0, 0, 0};
        for (int k = field.dim - 1; k >= 0; --k) {
            iv[k] = static_cast<int>(rest % q);
            rest /= q;
            wt *= w[iv[k]];
            x[k] = -R + 2.0 * R * iv[k] / (q - 1);
        }
        Tensor4 t = field.evaluate(x);
        t *= wt;
        acc += t;
        wsum += wt;
    }
    acc *= 1.0 / wsum;
    return acc;
}

double meanValue(const std::function<double(const Vec&)>& g, double R, int dim, const SamplingPlan& plan) {
    const int q = std::max(plan.quadPerAxis, 2);
    std::vector<double> w(q, 1.0);
    w.front() = w.back() = 0.5;
    double acc = 0.0, wsum = 0.0;
    std::array<int, 3> iv{0, 0, 0};
    std::size_t total = 1;
    for (int k = 0; k < dim; ++k) total *= static_cast<std::size_t>(q);
    for (std::size_t f = 0; f < total; ++f) {
        std::size_t rest = f;
        double wt = 1.0;
        Vec x{0, 0, 0};
        for (int k = dim - 1; k >= 0; --k) {
            iv[k] = static_cast<int>(rest % q);
            rest /= q;
            wt *= w[iv[k]];
            x[k] = -R + 2.0 * R * iv[k] / (q - 1);
        }
        acc += wt * g(x);
        wsum += wt;
    }
    return acc / wsum;
}

}  // namespace aphom::coeff
