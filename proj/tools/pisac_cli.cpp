// Command-line front end: one subcommand per experiment.
#include <fstream>
#include <iostream>
#include <optional>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pisac/errors.hpp"
#include "pisac/harness.hpp"
#include "pisac/validate.hpp"

namespace {

struct Flags {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<double> pfa;
    std::optional<std::string> scale;
    double kappa_scale = 1.0;
    std::vector<int> only;
};

pisac::ExperimentConfig make_config(const std::string& experiment, const Flags& f) {
    nlohmann::json j = nlohmann::json::object();
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw pisac::ConfigError("cannot read config " + f.config);
        try {
            j = nlohmann::json::parse(in, nullptr, true, true);
        } catch (const nlohmann::json::parse_error& e) {
            throw pisac::ConfigError("config " + f.config + ": " + e.what());
        }
    }
    if (j.contains("experiment") && j["experiment"] != experiment)
        throw pisac::ConfigError("config is for experiment '" + j["experiment"].get<std::string>() + "'");
    j["experiment"] = experiment;
    if (f.scale) j["scale"] = *f.scale;

    auto c = pisac::ExperimentConfig::from_json(j);
    if (f.out) c.output_dir = *f.out;
    if (f.seed) c.seed = *f.seed;
    if (f.pfa) c.pfa = *f.pfa;
    if (f.trials) {
        c.n_detection = *f.trials;
        c.heatmap.n_trials = *f.trials;
        c.contour.mc_trials = *f.trials;
    }
    return c;
}

int run(const std::string& experiment, const Flags& f) {
    const auto config = make_config(experiment, f);
    if (config.experiment == pisac::Experiment::validate) {
        pisac::ValidateOptions options;
        options.seed = config.seed;
        options.kappa_scale = f.kappa_scale;
        options.only = f.only;
        const auto results = pisac::run_validate_criteria(options);
        bool all = true;
        for (const auto& r : results) {
            std::cout << pisac::format_criterion(r) << '\n';
            all = all && r.pass;
        }
        return all ? 0 : 1;
    }
    const auto tables = pisac::run_experiment(config);
    for (const auto& t : tables)
        std::cout << config.output_dir << '/' << t.name << ".csv (" << t.rows.size() << " rows)\n";
    std::cout << "run id " << pisac::run_id(config) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Passive ISAC detection experiments"};
    app.require_subcommand(1);
    Flags f;
    std::string chosen;
    const std::vector<std::pair<const char*, const char*>> commands{
        {"calibrate", "H0 thresholds per scheme against the asymptotic threshold"},
        {"roc", "P_d versus P_fa for each scheme"},
        {"tradeoff", "P_d versus the SINR target"},
        {"contour", "P_d surfaces over (SNR_t, SNR_d) and their 0.9 contours"},
        {"sweep", "P_d versus RCS or transmit power"},
        {"beampattern", "transmit beampatterns of each scheme"},
        {"heatmap", "GLRT statistic over a position grid"},
        {"validate", "acceptance criteria, one PASS/FAIL line each"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--out", f.out, "output directory");
        sub->add_option("--seed", f.seed, "master seed");
        sub->add_option("--trials", f.trials, "Monte Carlo trials under H1");
        sub->add_option("--pfa", f.pfa, "false-alarm rate");
        sub->add_option("--scale", f.scale, "trial-count preset")->check(CLI::IsMember({"desk", "paper"}));
        if (std::string(name) == "validate") {
            sub->add_option("--kappa-scale", f.kappa_scale, "multiply library kappa values (fault injection)");
            sub->add_option("--only", f.only, "criterion ids to run");
        }
        sub->callback([&chosen, name] { chosen = name; });
    }
    CLI11_PARSE(app, argc, argv);

    try {
        return run(chosen, f);
    } catch (const pisac::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const pisac::Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return 2;
    } catch (const pisac::DegenerateGeometry& e) {
        std::cerr << "degenerate geometry: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
