#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "aphom/experiment.hpp"
#include "test_common.hpp"

using namespace aphom;
using report::ExperimentReport;

TEST_SUITE_BEGIN("experiment");

namespace {

std::string fieldPath(const char* name) {
    return std::string(APHOM_CONFIG_DIR) + "/fields/" + name + ".json";
}

}  // namespace

TEST_CASE("profile kind: affine data gives a constant gradient profile") {
    const std::string cfg = R"({
        "kind": "profile",
        "field": ")" + fieldPath("const2d") + R"(",
        "epsilon": 1.0,
        "grid": {"ell": 1.0, "n": 64},
        "force": {"kind": "zero"},
        "boundary": {"kind": "affine", "c0": 0.0, "c": [2.0, -1.0]},
        "center": [0.5, 0.5],
        "radii": [0.1, 0.2, 0.3],
        "solver": {"tol": 1e-12},
        "assert": {"constantValue": 2.2360679774997896, "constantTol": 1e-8}
    })";
    const ExperimentReport rep = experiment::run(cfg, {});
    CHECK(rep.allPass());
}

TEST_CASE("liouville kind: decreasing interior gradient with fitted rate") {
    const std::string cfg = R"({
        "kind": "liouville",
        "field": ")" + fieldPath("const2d") + R"(",
        "sigma": 0.5,
        "R": [2.0, 4.0, 8.0],
        "rProbe": 1.0,
        "solver": {"tol": 1e-11},
        "assert": {"rateLE": -0.3}
    })";
    const ExperimentReport rep = experiment::run(cfg, {});
    CHECK(rep.allPass());
}

TEST_CASE("theta kind with a field-built rho table: periodic field reduces to the exp integral") {
    const std::string cfg = R"({
        "kind": "theta",
        "field": ")" + fieldPath("cos1d") + R"(",
        "k": 1, "sigma": 0.5, "c": 0.1, "T": 8.0,
        "rhoTable": {"kind": "field"},
        "sampling": {"centers": 6, "quadPerAxis": 17, "shifts": 8, "zPerAxis": 8, "supRadius": 8.0},
        "assert": {"thetaLE": 4.5}
    })";
    const ExperimentReport rep = experiment::run(cfg, {});
    CHECK(rep.allPass());
    // period snap makes rho vanish, so theta is the pure exponential integral
    // (3.64 densely integrated; the default dyadic t nodes overshoot to ~4.15)
    CHECK(rep.constants.at("theta") >= 3.5);
    CHECK(rep.constants.at("theta") <= 4.5);
}

TEST_CASE("rate kind with the theorem's rhs bound on a 1-D periodic field") {
    const std::string cfg = R"({
        "kind": "rate",
        "field": ")" + fieldPath("cos1d") + R"(",
        "eps": [0.125, 0.0625, 0.03125],
        "cellsPerEps": 16,
        "correctorBox": 4.0,
        "computeBound": true,
        "k": 1, "sigma": 0.5, "c": 0.1,
        "solver": {"tol": 1e-10},
        "sampling": {"centers": 6, "quadPerAxis": 17, "shifts": 8, "zPerAxis": 8, "supRadius": 8.0},
        "force": {"kind": "constant", "value": 1.0},
        "boundary": {"kind": "zero"},
        "assert": {"slopeMin": 0.9}
    })";
    const ExperimentReport rep = experiment::run(cfg, {});
    CHECK(rep.allPass());  // includes rhs_bound_dominates_eps* with the calibrated C
    REQUIRE(rep.series.size() >= 2);
    for (auto& [eps, bound] : rep.series[1].xy) CHECK(bound > 0.0);
}

TEST_CASE("rate kind: constant field reports a degenerate fit at the solver floor") {
    const std::string cfg = R"({
        "kind": "rate",
        "field": ")" + fieldPath("const1d") + R"(",
        "eps": [0.125, 0.0625, 0.03125],
        "cellsPerEps": 16,
        "correctorBox": 4.0,
        "solver": {"tol": 1e-11},
        "force": {"kind": "constant", "value": 1.0},
        "boundary": {"kind": "zero"},
        "assert": {"errMax": 1e-8, "slopeMin": 0.9}
    })";
    const ExperimentReport rep = experiment::run(cfg, {});
    CHECK(rep.allPass());
    CHECK(rep.fits.at("l2_rate").degenerate);
}

TEST_CASE("rate kind: quasi-periodic 1-D field, bound dominates with one calibrated C") {
    const std::string cfg = R"({
        "kind": "rate",
        "field": ")" + fieldPath("quasi1d") + R"(",
        "eps": [0.125, 0.0625, 0.03125],
        "cellsPerEps": 16,
        "correctorBox": 256.0,
        "computeBound": true,
        "k": 1, "sigma": 0.5, "c": 0.1,
        "solver": {"tol": 1e-9},
        "sampling": {"centers": 6, "quadPerAxis": 17, "shifts": 8, "zPerAxis": 6, "supRadius": 8.0},
        "force": {"kind": "constant", "value": 1.0},
        "boundary": {"kind": "zero"}
    })";
    const ExperimentReport rep = experiment::run(cfg, {});
    CHECK(rep.allPass());  // rhs_bound_dominates_eps* assertions
    CHECK_FALSE(rep.fits.at("l2_rate").degenerate);
    CHECK(rep.fits.at("l2_rate").slope > 0.0);
}

TEST_CASE("ergodic kind runs end to end on the periodic 1-D field") {
    const std::string cfg = R"({
        "kind": "ergodic",
        "field": ")" + fieldPath("cos1d") + R"(",
        "grid": {"ell": 8.0, "n": 128},
        "k": 1, "L": 1.0, "R": 1.0,
        "tList": [1.0, 2.0, 4.0, 8.0],
        "sweepL": [0.5, 1.0], "sweepR": [2.0, 3.0],
        "sampling": {"centers": 6, "quadPerAxis": 17, "shifts": 8, "zPerAxis": 8, "supRadius": 4.0}
    })";
    const ExperimentReport rep = experiment::run(cfg, {});
    CHECK(rep.allPass());
    CHECK(rep.constants.at("semigroupErr") <= 1e-12);
}

TEST_CASE("corrector kind writes apf dumps and a manifest") {
    namespace fs = std::filesystem;
    const std::string dir = (fs::temp_directory_path() / "aphom_corr_out").string();
    fs::remove_all(dir);
    const std::string cfg = R"({
        "kind": "corrector",
        "field": ")" + fieldPath("cos1d") + R"(",
        "T": 4.0,
        "grid": {"ell": 4.0, "n": 128},
        "solver": {"tol": 1e-10},
        "assert": {"energyLE": 5.0}
    })";
    experiment::RunOptions opts;
    opts.outDir = dir;
    const ExperimentReport rep = experiment::run(cfg, opts);
    CHECK(rep.allPass());
    CHECK(fs::exists(fs::path(dir) / "chi.apf"));
    CHECK(fs::exists(fs::path(dir) / "gradChi.apf"));
    CHECK(fs::exists(fs::path(dir) / "corrector_manifest.json"));
    const grid::DiscreteField chi = grid::loadApf((fs::path(dir) / "chi.apf").string());
    CHECK(chi.grid.n == 128);
    fs::remove_all(dir);
}

TEST_SUITE_END();
