#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace aphom::report {

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slopeStderr = 0.0;
    int points = 0;
    bool degenerate = false;  // series was all ~zero / unusable; slope not meaningful
};

/// OLS fit of log(y) vs log(x). Requires >= 3 strictly positive points.
FitResult fitPowerLaw(const std::vector<std::pair<double, double>>& xy);

/// Same, but flags (instead of throwing on) all-zero series: constant-field
/// studies produce exactly this.
FitResult fitPowerLawOrDegenerate(const std::vector<std::pair<double, double>>& xy, double floor = 1e-14);

struct Series {
    std::string name;
    std::string xLabel;  // with units
    std::string yLabel;
    std::vector<std::pair<double, double>> xy;
};

struct Assertion {
    std::string id;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string comparison;  // "<=", ">=", ...
};

/// Named scalar series, fitted exponents, calibrated constants, pass/fail
/// flags, and the provenance of all run parameters.
struct ExperimentReport {
    std::string kind;
    std::string configEcho;  // canonical JSON text of the config
    std::string fieldHash;
    std::vector<Series> series;
    std::map<std::string, FitResult> fits;
    std::map<std::string, double> constants;
    std::vector<Assertion> assertions;
    std::map<std::string, double> wallClock;  // excluded from the hash

    bool allPass() const;
    void assertLE(const std::string& id, double value, double threshold);
    void assertGE(const std::string& id, double value, double threshold);

    /// Canonical JSON (ordered keys, wall-clock fields included, hash field
    /// carries the determinism hash computed without it).
    std::string toJson() const;

    /// FNV-64 over the canonical JSON with wall-clock stripped.
    std::string hash() const;

    /// Write report.json plus one CSV per series into dir.
    void write(const std::string& dir) const;
};

std::string formatDouble(double v);

}  // namespace aphom::report
