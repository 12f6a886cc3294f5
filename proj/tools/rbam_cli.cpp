#include "rbam/commands.hpp"
#include "rbam/run_config.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Flags {
    std::string config_path;
    std::string mu;
    std::string model;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string budgets = "4:4,8:8,16:16";
    bool compare = false;
    bool gnuplot = false;
};

rbam::RunConfig resolve_config(const Flags& flags) {
    rbam::RunConfig config = flags.config_path.empty() ? rbam::RunConfig{} : rbam::load_run_config(flags.config_path);
    if (flags.seed) config.sampling.seed = *flags.seed;
    if (!flags.out.empty()) config.io.output_dir = flags.out;
    if (!flags.model.empty()) config.io.model_path = flags.model;
    config.validate();
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reduced basis pipeline for American put options"};
    app.require_subcommand(1);
    Flags flags;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config_path, "JSON run configuration");
        sub->add_option("--out", flags.out, "output directory (overrides io.output_dir)");
        sub->add_option("--seed", flags.seed, "sampling seed (overrides sampling.seed)");
        sub->add_flag("--gnuplot", flags.gnuplot, "print a gnuplot script for the artifacts instead of running");
    };

    CLI::App* truth = app.add_subcommand("truth", "full-order trajectory at one parameter");
    common(truth);
    truth->add_option("--mu", flags.mu, "K,R,Q,SIGMA")->required();

    CLI::App* offline = app.add_subcommand("offline", "build and save a reduced model");
    common(offline);
    offline->add_option("--model", flags.model, "model file (overrides io.model_path)");

    CLI::App* online = app.add_subcommand("online", "reduced trajectory from a saved model");
    common(online);
    online->add_option("--mu", flags.mu, "K,R,Q,SIGMA")->required();
    online->add_option("--model", flags.model, "model file (overrides io.model_path)");
    online->add_flag("--compare", flags.compare, "also run the full-order solver and report err_N");

    CLI::App* study = app.add_subcommand("study", "ErrLinf for a list of basis budgets");
    common(study);
    study->add_option("--budgets", flags.budgets, "comma-separated NV_TILDE:NW pairs")->capture_default_str();

    CLI::App* validate = app.add_subcommand("validate", "re-check a saved model");
    common(validate);
    validate->add_option("--model", flags.model, "model file (overrides io.model_path)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : rbam::kExitConfig;
    }

    CLI::App* chosen = app.get_subcommands().front();
    return rbam::run_command(
        [&] {
            const rbam::RunConfig config = resolve_config(flags);
            if (flags.gnuplot) {
                std::cout << rbam::gnuplot_script(chosen->get_name(), config);
                return;
            }
            if (chosen == truth) {
                rbam::cmd_truth(config, rbam::parse_mu(flags.mu), std::cout);
            } else if (chosen == offline) {
                rbam::cmd_offline(config, std::cout);
            } else if (chosen == online) {
                rbam::cmd_online(config, {rbam::parse_mu(flags.mu), flags.compare}, std::cout);
            } else if (chosen == study) {
                rbam::cmd_study(config, rbam::parse_budgets(flags.budgets), std::cout);
            } else {
                rbam::cmd_validate(config, std::cout);
            }
        },
        std::cerr);
}
