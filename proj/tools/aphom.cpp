/// aphom: config-driven experiments for almost-periodic homogenization.
///
///   aphom run <config.json> [--out DIR] [--seed N] [--threads N]
///   aphom field-check <field.json>
///   aphom fit <series.csv>
///
/// Exit codes: 0 ok, 1 assertion failure, 2 config error, 3 invalid field,
/// 4 solver failure.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "aphom/coeff.hpp"
#include "aphom/experiment.hpp"
#include "aphom/report.hpp"

namespace {

int cmdRun(const std::string& configPath, const std::string& outDir, long long seed, bool seedSet, int threads) {
    aphom::experiment::RunOptions opts;
    opts.outDir = outDir;
    opts.threads = threads;
    if (seedSet) {
        opts.seed = static_cast<std::uint64_t>(seed);
        opts.overrideSeed = true;
    }
    const aphom::report::ExperimentReport rep = aphom::experiment::runFile(configPath, opts);
    std::cout << rep.toJson() << "\n";
    for (const auto& a : rep.assertions)
        std::cerr << (a.pass ? "PASS " : "FAIL ") << a.id << " (" << a.value << " " << a.comparison << " "
                  << a.threshold << ")\n";
    return aphom::experiment::exitCodeFor(rep);
}

int cmdFieldCheck(const std::string& fieldPath) {
    const aphom::coeff::CoefficientField f = aphom::coeff::CoefficientField::load(fieldPath);
    auto [lo, hi] = f.ellipticityCertificate();
    std::cout << "dim=" << f.dim << " m=" << f.m << " modes=" << f.modes.size() << " mu=" << f.mu << "\n";
    std::cout << "certificate: lambda in [" << lo << ", " << hi << "], required [" << f.mu << ", " << 1.0 / f.mu
              << "]\n";
    if (!f.certifiedElliptic()) {
        std::cerr << "FAIL ellipticity certificate\n";
        return aphom::experiment::FieldInvalid;
    }
    std::cout << "hash=" << f.hash() << "\n";
    return 0;
}

int cmdFit(const std::string& csvPath) {
    std::ifstream in(csvPath);
    if (!in) {
        std::cerr << "cannot open " << csvPath << "\n";
        return aphom::experiment::ConfigError;
    }
    std::vector<std::pair<double, double>> xy;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) continue;
        try {
            xy.emplace_back(std::stod(a), std::stod(b));
        } catch (...) {
            continue;  // header row
        }
    }
    const aphom::report::FitResult fit = aphom::report::fitPowerLaw(xy);
    std::cout << "slope=" << fit.slope << " intercept=" << fit.intercept << " r2=" << fit.r2
              << " stderr=" << fit.slopeStderr << " points=" << fit.points << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"almost-periodic homogenization laboratory"};
    app.require_subcommand(1);

    std::string configPath, outDir, fieldPath, csvPath;
    long long seed = 0;
    int threads = 0;
    bool seedSet = false;

    CLI::App* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", configPath, "experiment config JSON")->required();
    run->add_option("--out", outDir, "output directory for report + series");
    CLI::Option* seedOpt = run->add_option("--seed", seed, "override the config seed");
    run->add_option("--threads", threads, "worker threads (or APHOM_THREADS)");

    CLI::App* check = app.add_subcommand("field-check", "validate a coefficient field file");
    check->add_option("field", fieldPath, "field JSON")->required();

    CLI::App* fit = app.add_subcommand("fit", "log-log power-law fit of a CSV series");
    fit->add_option("csv", csvPath, "two-column CSV (x,y)");

    try {
        app.parse(argc, argv);
        seedSet = seedOpt->count() > 0;
        if (run->parsed()) return cmdRun(configPath, outDir, seed, seedSet, threads);
        if (check->parsed()) return cmdFieldCheck(fieldPath);
        if (fit->parsed()) return cmdFit(csvPath);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? aphom::experiment::ConfigError : 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return aphom::experiment::errorExitCode(e);
    }
    return 0;
}
