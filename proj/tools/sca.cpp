// Command-line front end: sweep, figure, estimate, selfcheck.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "sca/config.hpp"
#include "sca/dataset.hpp"
#include "sca/errors.hpp"
#include "sca/selfcheck.hpp"
#include "sca/sweep.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 2, kRuntimeError = 3, kSelfcheckFailed = 4 };

unsigned workers_from_env() {
    if (const char* env = std::getenv("SCA_WORKERS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
        throw sca::ConfigError("SCA_WORKERS", "must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

sca::OutputFormat parse_format(const std::string& f) {
    if (f == "csv") return sca::OutputFormat::csv;
    if (f == "json") return sca::OutputFormat::json;
    throw sca::ConfigError("format", "expected csv or json");
}

void emit(const sca::Dataset& d, const std::string& path, sca::OutputFormat f) {
    if (path.empty() || path == "-") {
        sca::write_dataset(std::cout, d, f);
    } else {
        sca::write_dataset(path, d, f);
    }
}

sca::Dataset read_dataset_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw sca::Error(path + ": cannot open");
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        try {
            return sca::from_json(nlohmann::json::parse(is));
        } catch (const nlohmann::json::exception& e) {
            throw sca::Error(path + ": " + e.what());
        }
    }
    return sca::read_csv(is, path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"State comparison amplifier simulator"};
    app.require_subcommand(1);

    std::string config_path, output, format;
    auto* sweep = app.add_subcommand("sweep", "Run an analytic and/or Monte Carlo parameter sweep");
    sweep->add_option("-c,--config", config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
    sweep->add_option("-o,--output", output, "Output path (overrides [output] path; '-' for stdout)");
    sweep->add_option("-f,--format", format, "csv or json (overrides [output] format)");

    std::string figure_id, preset = "lab";
    std::vector<double> figure_grid;
    auto* figure = app.add_subcommand("figure", "Model curves for fig3a, fig3b, fig3c, fig3d or fig4");
    figure->add_option("id", figure_id, "Figure id")->required();
    figure->add_option("--preset", preset, "Detector parameters: lab or ideal");
    figure->add_option("--alpha-sq", figure_grid, "Mean photon numbers (default 0.01..1.00)")->delimiter(',');
    figure->add_option("-o,--output", output, "Output path (default stdout)");
    figure->add_option("-f,--format", format, "csv or json");

    std::string counts_path;
    double g2a2 = sca::EstimatorParams::nan_value();
    double eta_l = sca::EstimatorParams::nan_value();
    auto* estimate = app.add_subcommand("estimate", "Fidelity estimate from a count-table file");
    estimate->add_option("--counts", counts_path, "CSV or JSON count file")->required()->check(CLI::ExistingFile);
    estimate->add_option("--g2a2", g2a2, "Mean photon number of the target state (overrides column)");
    estimate->add_option("--eta-l", eta_l, "Analysis detector efficiency times loss (overrides column)");

    auto* selfcheck = app.add_subcommand("selfcheck", "Check the model against the reference thresholds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*sweep) {
            std::ifstream is(config_path);
            if (!is) throw sca::ConfigError("config", config_path + ": cannot open");
            auto spec = sca::parse_sweep_config(is);
            if (!output.empty()) spec.output_path = output;
            if (!format.empty()) spec.output_format = parse_format(format);
            spec.workers = workers_from_env();
            const auto result = sca::run_sweep(spec);
            emit(result.rows, spec.output_path, spec.output_format);
            if (!spec.counts_path.empty() && spec.wants_montecarlo()) {
                sca::write_dataset(spec.counts_path, result.counts, sca::OutputFormat::csv);
            }
        } else if (*figure) {
            sca::FigureParams params;
            if (preset == "ideal") {
                params.detectors = sca::lab::ideal_detectors();
            } else if (preset != "lab") {
                throw sca::ConfigError("preset", "expected lab or ideal");
            }
            params.alpha_sq_grid = figure_grid;
            emit(sca::reproduce_figure(figure_id, params), output,
                 format.empty() ? sca::OutputFormat::csv : parse_format(format));
        } else if (*estimate) {
            const auto records = sca::parse_count_records(read_dataset_file(counts_path), {g2a2, eta_l});
            nlohmann::json report = nlohmann::json::array();
            for (const auto& r : records) report.push_back(sca::to_json(sca::run_estimator(r.counts, r.params)));
            std::cout << report.dump(2) << '\n';
        } else if (*selfcheck) {
            bool all = true;
            for (const auto& c : sca::run_selfcheck()) {
                std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
                all = all && c.passed;
            }
            return all ? kOk : kSelfcheckFailed;
        }
    } catch (const sca::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}
