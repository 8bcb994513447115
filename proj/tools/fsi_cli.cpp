#include "fsi/harness.hpp"
#include "fsi/io.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace fsi;

namespace {

struct Common {
    std::string config;
    std::string out = "out";
    int jobs = 1;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
    auto* opt = cmd->add_option("--config", c.config, "configuration file (flat JSON)");
    if (needs_config) opt->required();
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--jobs", c.jobs, "concurrent sweep points")->check(CLI::PositiveNumber);
    cmd->add_option("--override", c.overrides, "key=value, repeatable")->take_all();
}

ExperimentConfig load(const Common& c, bool check_physics = true) {
    std::string text = read_file(c.config);
    return config_with_overrides(text, c.overrides, check_physics);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Periodic fluid-structure interaction laboratory"};
    app.require_subcommand(1);
    Common opts;
    const std::vector<std::string> commands = {"simulate",  "find-periodic", "sweep-frequency", "sweep-radius",
                                               "sweep-eta", "verify",        "symmetric-mode",  "report"};
    std::map<std::string, CLI::App*> sub;
    for (const auto& name : commands) {
        sub[name] = app.add_subcommand(name);
        add_common(sub[name], opts, name != "report");
    }
    CLI11_PARSE(app, argc, argv);

    HarnessContext ctx;
    ctx.out = opts.out;
    ctx.jobs = opts.jobs;
    ctx.log = &std::cerr;

    try {
        if (sub["report"]->parsed()) {
            std::cout << run_report(ctx);
            return exit_ok;
        }
        if (sub["verify"]->parsed()) {
            VerifyReport r = run_verify(load(opts, false), ctx);
            std::cout << r.text();
            return r.all_pass() ? exit_ok : exit_verification;
        }
        ExperimentConfig cfg = load(opts);
        if (sub["simulate"]->parsed()) {
            SimulateResult r = run_simulate(cfg, ctx);
            std::cout << "samples " << r.series.samples.size() << "\nbalance_sum_abs "
                      << format_double(r.balance.sum_abs) << "\n";
        } else if (sub["find-periodic"]->parsed()) {
            OrbitResult r = run_find_periodic(cfg, ctx);
            std::cout << "converged after " << r.orbit.iterations << " iterations, residual "
                      << format_double(r.orbit.residual) << "\n";
        } else if (sub["symmetric-mode"]->parsed()) {
            SymmetricReport r = run_symmetric_mode(cfg, ctx);
            std::cout << r.text();
            return r.quiescent ? exit_ok : exit_verification;
        } else {
            SweepTable t = sub["sweep-frequency"]->parsed() ? run_sweep_frequency(cfg, ctx)
                           : sub["sweep-radius"]->parsed()  ? run_sweep_radius(cfg, ctx)
                                                            : run_sweep_eta(cfg, ctx);
            std::cout << t.csv();
            for (const auto& row : t.rows)
                if (row.failed || !row.converged) return exit_numerical;
        }
        return exit_ok;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const InvalidMode& e) {
        std::cerr << "invalid mode: " << e.what() << "\n";
        return exit_config;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return exit_config;
    } catch (const StepRejected& e) {
        std::cerr << "step rejected: " << e.what() << " (admissible dt " << e.admissible_dt << ")\n";
        return exit_numerical;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << " after " << e.iterations << " iterations\n";
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    }
}
