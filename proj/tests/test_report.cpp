#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "aphom/experiment.hpp"
#include "aphom/report.hpp"
#include "aphom/util.hpp"

using namespace aphom;
using namespace aphom::report;

TEST_SUITE_BEGIN("report");

TEST_CASE("fitPowerLaw: y = x gives slope exactly 1") {
    std::vector<std::pair<double, double>> xy{{1, 1}, {2, 2}, {4, 4}, {8, 8}};
    const FitResult f = fitPowerLaw(xy);
    CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("fitPowerLaw: y = 3 x^2 gives slope 2, intercept log 3") {
    std::vector<std::pair<double, double>> xy;
    for (double x : {0.5, 1.0, 2.0, 4.0, 8.0}) xy.emplace_back(x, 3.0 * x * x);
    const FitResult f = fitPowerLaw(xy);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("fitPowerLaw: noisy sqrt with fixed seed recovers 0.5 within 0.05") {
    SplitMix64 rng(2024);
    std::vector<std::pair<double, double>> xy;
    for (int i = 0; i < 40; ++i) {
        const double x = std::pow(2.0, i % 8);
        xy.emplace_back(x, std::sqrt(x) * std::exp(0.02 * rng.normal()));
    }
    const FitResult f = fitPowerLaw(xy);
    CHECK(std::abs(f.slope - 0.5) <= 0.05);
}

TEST_CASE("fitPowerLaw rejects short and nonpositive series") {
    CHECK_THROWS_AS(fitPowerLaw({{1, 1}, {2, 2}}), Error);
    CHECK_THROWS_AS(fitPowerLaw({{1, 1}, {2, -2}, {3, 3}}), Error);
    CHECK(fitPowerLawOrDegenerate({{1, 0}, {2, 0}, {3, 0}}).degenerate);
}

TEST_CASE("experiment runs are deterministic: same config + seed, same hash") {
    const std::string cfg = R"({
        "kind": "rho",
        "field": ")" APHOM_CONFIG_DIR R"(/fields/cos1d.json",
        "seed": 3,
        "k": 1, "L": [1.0, 2.0], "R": 4.0,
        "sampling": {"centers": 8, "quadPerAxis": 17, "shifts": 8, "zPerAxis": 8, "supRadius": 8.0}
    })";
    experiment::RunOptions opts;
    const ExperimentReport a = experiment::run(cfg, opts);
    const ExperimentReport b = experiment::run(cfg, opts);
    CHECK(a.hash() == b.hash());  // wall-clock fields are excluded from the hash
}

TEST_CASE("experiment exit codes follow the contract") {
    experiment::RunOptions opts;

    // unknown kind -> config error (2)
    try {
        experiment::run(R"({"kind": "nonsense"})", opts);
        CHECK(false);
    } catch (const std::exception& e) {
        CHECK(experiment::errorExitCode(e) == experiment::ConfigError);
    }

    // invalid field -> 3
    try {
        experiment::run(R"({"kind": "rho", "field": "/nonexistent.json", "k": 1, "L": 1.0, "R": 1.0})", opts);
        CHECK(false);
    } catch (const std::exception& e) {
        CHECK(experiment::errorExitCode(e) == experiment::FieldInvalid);
    }

    // failing assertion -> report not allPass -> exit 1
    const std::string cfg = R"({
        "kind": "rho",
        "field": ")" APHOM_CONFIG_DIR R"(/fields/quasi1d.json",
        "k": 1, "L": 2.0, "R": 4.0,
        "sampling": {"centers": 4, "quadPerAxis": 9, "shifts": 4, "zPerAxis": 4, "supRadius": 4.0},
        "assert": {"rhoLE": 1e-300}
    })";
    const ExperimentReport rep = experiment::run(cfg, opts);
    CHECK_FALSE(rep.allPass());
    CHECK(experiment::exitCodeFor(rep) == experiment::AssertionFailure);
}

TEST_CASE("report artifacts: JSON + CSV written to the output directory") {
    namespace fs = std::filesystem;
    const std::string dir = (fs::temp_directory_path() / "aphom_report_test").string();
    fs::remove_all(dir);

    experiment::RunOptions opts;
    opts.outDir = dir;
    const std::string cfg = R"({
        "kind": "rho",
        "field": ")" APHOM_CONFIG_DIR R"(/fields/const1d.json",
        "k": 1, "L": [1.0, 2.0], "R": 2.0,
        "sampling": {"centers": 4, "quadPerAxis": 9, "shifts": 4, "zPerAxis": 4, "supRadius": 4.0},
        "assert": {"rhoLE": 1e-12}
    })";
    const ExperimentReport rep = experiment::run(cfg, opts);
    CHECK(rep.allPass());
    CHECK(fs::exists(fs::path(dir) / "report.json"));
    CHECK(fs::exists(fs::path(dir) / "rho.csv"));

    std::ifstream in(fs::path(dir) / "report.json");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("\"hash\"") != std::string::npos);
    CHECK(text.find(rep.hash()) != std::string::npos);
    fs::remove_all(dir);
}

TEST_SUITE_END();
