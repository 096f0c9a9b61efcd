#include <CLI11.hpp>

#include <string>
#include <vector>

#include "ebsde/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "Ergodic BSDE laboratory: builds the triple (lambda, v, zeta) for "
        "weakly dissipative one-dimensional diffusions and checks it against "
        "simulation, finite-horizon solves, and control values."};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> subs = {
        {"validate", "check declared model bounds and smallness gates"},
        {"simulate", "sample paths and a horizon moment"},
        {"contraction", "fit the synchronous-coupling decay rate"},
        {"solve-finite", "finite-horizon backward solve (optional MC check)"},
        {"solve-discounted", "discounted stationary solve (optional MC check)"},
        {"ergodic", "vanishing-discount construction of (lambda, v, zeta)"},
        {"large-time", "horizon profile against lambda T + v"},
        {"control", "optimal feedback policy and policy costs"},
        {"verify-all", "fast end-to-end consistency pass"},
    };

    std::string config_path;
    for (const auto& [name, description] : subs) {
        auto* sub = app.add_subcommand(name, description);
        sub->add_option("config", config_path, "config file (key = value)")
            ->required();
    }

    CLI11_PARSE(app, argc, argv);
    return ebsde::cli::run(app.get_subcommands().front()->get_name(),
                           config_path);
}
