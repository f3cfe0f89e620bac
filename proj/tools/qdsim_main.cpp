#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "qdsim/commands.hpp"
#include "qdsim/errors.hpp"
#include "qdsim/runconfig.hpp"

#ifndef QDSIM_PRESET_DIR
#define QDSIM_PRESET_DIR "presets"
#endif

namespace {

std::string preset_path(const std::string& name) {
    const char* env = std::getenv("QDSIM_PRESET_DIR");
    const std::string dir = env && *env ? env : QDSIM_PRESET_DIR;
    return dir + "/" + name + ".cfg";
}

struct CommonArgs {
    std::string config;
    std::string preset;
    std::string out = "out";
    long long seed = -1;
    int jobs = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    auto* cfg = cmd->add_option("--config", args.config, "run configuration file");
    auto* pre = cmd->add_option("--preset", args.preset, "named in-repo preset");
    cfg->excludes(pre);
    pre->excludes(cfg);
    cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--seed", args.seed, "override [run] seed");
    cmd->add_option("--jobs", args.jobs, "override [run] jobs (worker pool size)");
}

qd::RunConfig load_config(const CommonArgs& args) {
    std::string path = args.config;
    if (path.empty()) {
        if (args.preset.empty())
            throw qd::SchemaError("one of --config or --preset is required");
        path = preset_path(args.preset);
    }
    qd::RunConfig rc = qd::RunConfig::from_doc(qd::ConfigDoc::load(path));
    if (args.seed >= 0) rc.run.seed = static_cast<std::uint64_t>(args.seed);
    if (args.jobs > 0) rc.run.jobs = args.jobs;
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum-dot dark-exciton correlation simulator"};
    app.require_subcommand(1);

    CommonArgs spectrum_args, g2_args, fit_args, mc_args;
    std::vector<std::string> fit_data;

    CLI::App* spectrum = app.add_subcommand(
        "spectrum", "Zeeman splittings and qubit eigensystems over the B sweep");
    add_common(spectrum, spectrum_args);

    CLI::App* g2 =
        app.add_subcommand("g2", "polarization-resolved g2/DCP curves per B value");
    add_common(g2, g2_args);

    CLI::App* fit = app.add_subcommand("fit", "least-squares fits of curve CSVs");
    add_common(fit, fit_args);
    fit->add_option("data", fit_data, "curve CSV files")->required();

    CLI::App* mc = app.add_subcommand(
        "mc", "quantum-jump oracle histograms vs the regression-theorem curves");
    add_common(mc, mc_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help/--version exit 0 through app.exit; any usage error is a
        // configuration failure and maps onto the config exit code.
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(qd::ExitCode::config);
    }

    try {
        if (spectrum->parsed()) return qd::cmd_spectrum(load_config(spectrum_args),
                                                        spectrum_args.out);
        if (g2->parsed()) return qd::cmd_g2(load_config(g2_args), g2_args.out);
        if (fit->parsed()) return qd::cmd_fit(load_config(fit_args), fit_data, fit_args.out);
        if (mc->parsed()) return qd::cmd_mc(load_config(mc_args), mc_args.out);
    } catch (const qd::ParamValidationError& e) {
        for (const auto& v : e.violations())
            std::cerr << "config error: " << v.kind << " in field '" << v.field << "'\n";
        return e.exit_code();
    } catch (const qd::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
