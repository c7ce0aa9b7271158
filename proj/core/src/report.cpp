#include "aphom/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "aphom/util.hpp"

namespace aphom::report {

using nlohmann::ordered_json;

FitResult fitPowerLaw(const std::vector<std::pair<double, double>>& xy) {
    if (xy.size() < 3) fail(ErrorKind::Config, "fitPowerLaw: need at least 3 points");
    std::vector<double> lx, ly;
    for (auto& [x, y] : xy) {
        if (!(x > 0.0) || !(y > 0.0)) fail(ErrorKind::Config, "fitPowerLaw: nonpositive value in series");
        lx.push_back(std::log(x));
        ly.push_back(std::log(y));
    }
    const std::size_t n = lx.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    FitResult fit;
    fit.points = static_cast<int>(n);
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssRes = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ssRes += e * e;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ssRes / syy : 1.0;
    fit.slopeStderr = n > 2 ? std::sqrt(ssRes / ((n - 2) * sxx)) : 0.0;
    return fit;
}

FitResult fitPowerLawOrDegenerate(const std::vector<std::pair<double, double>>& xy, double floor) {
    bool allTiny = true;
    for (auto& [x, y] : xy) allTiny = allTiny && std::abs(y) <= floor;
    if (allTiny || xy.size() < 3) {
        FitResult fit;
        fit.degenerate = true;
        fit.points = static_cast<int>(xy.size());
        return fit;
    }
    for (auto& [x, y] : xy)
        if (!(y > 0.0)) {
            FitResult fit;
            fit.degenerate = true;
            fit.points = static_cast<int>(xy.size());
            return fit;
        }
    return fitPowerLaw(xy);
}

bool ExperimentReport::allPass() const {
    for (const Assertion& a : assertions)
        if (!a.pass) return false;
    return true;
}

void ExperimentReport::assertLE(const std::string& id, double value, double threshold) {
    assertions.push_back({id, value <= threshold, value, threshold, "<="});
}

void ExperimentReport::assertGE(const std::string& id, double value, double threshold) {
    assertions.push_back({id, value >= threshold, value, threshold, ">="});
}

std::string formatDouble(double v) {
    // shortest round-trip representation; deterministic for a given binary
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

ordered_json fitToJson(const FitResult& f) {
    ordered_json j;
    j["slope"] = f.slope;
    j["intercept"] = f.intercept;
    j["r2"] = f.r2;
    j["slopeStderr"] = f.slopeStderr;
    j["points"] = f.points;
    j["degenerate"] = f.degenerate;
    return j;
}

ordered_json bodyJson(const ExperimentReport& r, bool withClock) {
    ordered_json j;
    j["kind"] = r.kind;
    j["fieldHash"] = r.fieldHash;
    j["config"] = r.configEcho.empty() ? ordered_json() : ordered_json::parse(r.configEcho);
    ordered_json js = ordered_json::array();
    for (const Series& s : r.series) {
        ordered_json e;
        e["name"] = s.name;
        e["x"] = s.xLabel;
        e["y"] = s.yLabel;
        ordered_json pts = ordered_json::array();
        for (auto& [x, y] : s.xy) pts.push_back(ordered_json::array({x, y}));
        e["points"] = pts;
        js.push_back(e);
    }
    j["series"] = js;
    ordered_json jf;
    for (auto& [k, v] : r.fits) jf[k] = fitToJson(v);
    j["fits"] = jf;
    ordered_json jc;
    for (auto& [k, v] : r.constants) jc[k] = v;
    j["constants"] = jc;
    ordered_json ja = ordered_json::array();
    for (const Assertion& a : r.assertions) {
        ordered_json e;
        e["id"] = a.id;
        e["pass"] = a.pass;
        e["value"] = a.value;
        e["comparison"] = a.comparison;
        e["threshold"] = a.threshold;
        ja.push_back(e);
    }
    j["assertions"] = ja;
    if (withClock) {
        ordered_json jw;
        for (auto& [k, v] : r.wallClock) jw[k] = v;
        j["wallClock"] = jw;
    }
    return j;
}

}  // namespace

std::string ExperimentReport::hash() const { return hexHash(fnv1a(bodyJson(*this, false).dump())); }

std::string ExperimentReport::toJson() const {
    ordered_json j = bodyJson(*this, true);
    j["hash"] = hash();
    return j.dump(2);
}

void ExperimentReport::write(const std::string& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream out(fs::path(dir) / "report.json");
        out << toJson() << "\n";
    }
    for (const Series& s : series) {
        std::ofstream out(fs::path(dir) / (s.name + ".csv"));
        out << "# " << s.xLabel << ", " << s.yLabel << "\n";
        for (auto& [x, y] : s.xy) out << formatDouble(x) << "," << formatDouble(y) << "\n";
    }
}

}  // namespace aphom::report
