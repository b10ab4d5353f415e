// figbo: run experiment suites, plot regret curves, summarize acquisition timing.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "figbo/benchmarks.hpp"
#include "figbo/harness/config.hpp"
#include "figbo/harness/plot.hpp"
#include "figbo/harness/runner.hpp"
#include "figbo/harness/timing.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int cmd_run(const std::string& config_path, int workers, const std::string& out_dir)
{
    using namespace figbo::harness;
    ExperimentConfig cfg = load_config(config_path);
    apply_environment(cfg);
    if (workers >= 0)
        cfg.workers = workers;
    if (!out_dir.empty())
        cfg.output_dir = out_dir;
    cfg.validate();

    std::cerr << "running " << cfg.cells.size() << " cell(s) x " << cfg.reps << " rep(s), N=" << cfg.N
              << ", eta=" << cfg.resolved_eta() << ", L=" << cfg.L << ", seed=" << cfg.seed << ", workers="
              << cfg.resolved_workers() << " -> " << cfg.output_dir << '\n';
    SuiteOptions opt;
    opt.progress = &std::cerr;
    const SuiteResult res = run_suite(cfg, opt);
    for (const auto& w : res.warnings)
        std::cerr << "warning: " << w << '\n';
    std::cout << "wrote " << res.output_dir.string() << '\n';
    return kExitOk;
}

int cmd_plot(const std::string& in_dir, const std::string& out_file)
{
    using namespace figbo::harness;
    const PlotInput in = collect_aggregates(in_dir);
    for (const auto& s : in.skipped)
        std::cerr << "skipped " << s << ": no aggregate CSV\n";
    std::ofstream out(out_file);
    if (!out)
        throw figbo::InputError("plot: cannot write '" + out_file + "'");
    out << render_svg(in.curves);
    std::cout << "wrote " << out_file << " (" << in.curves.size() << " curves)\n";
    return kExitOk;
}

int cmd_timing(const std::string& in_dir, int max_iter)
{
    using namespace figbo::harness;
    std::cout << format_timing_table(collect_timing(in_dir, max_iter));
    return kExitOk;
}

int cmd_tasks_list()
{
    for (const auto& id : figbo::task_ids()) {
        const auto preset = id.rfind("gp-prior-", 0) == 0 ? figbo::gp_prior_preset(std::stoi(id.substr(9)))
                                                           : std::nullopt;
        if (preset) {
            std::cout << id << "  d=" << preset->dim << " box=[0,1]^" << preset->dim << " noise_var="
                      << preset->noise_variance << " lengthscale=" << preset->length_scale
                      << " signal_var=" << preset->signal_variance << '\n';
        } else {
            const auto t = figbo::make_task(id);
            std::cout << id << "  d=" << t.dim() << " noise_var=" << t.noise_variance << " true_min=" << t.true_min
                      << '\n';
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bayesian optimization with a global information-gain look-ahead term"};
    app.require_subcommand(1);

    std::string config_path, out_dir, in_dir, svg_path;
    int workers = -1, max_iter = 0;

    auto* run = app.add_subcommand("run", "Run an experiment suite from a JSON config");
    run->add_option("--config", config_path, "Experiment config (or a previous run's manifest.json)")->required();
    run->add_option("--workers", workers, "Worker threads for repetitions (default: available cores)")
        ->check(CLI::NonNegativeNumber);
    run->add_option("--out", out_dir, "Override the output directory");

    auto* plot = app.add_subcommand("plot", "Plot mean log regret curves from aggregate CSVs");
    plot->add_option("--in", in_dir, "Directory with aggregate CSVs")->required();
    plot->add_option("--out", svg_path, "Output SVG file")->required();

    auto* timing = app.add_subcommand("timing", "Acquisition time table from run CSVs");
    timing->add_option("--in", in_dir, "Directory with run CSVs")->required();
    timing->add_option("--max-iter", max_iter, "Only iterations 1..K");

    auto* tasks = app.add_subcommand("tasks", "Benchmark task registry");
    tasks->require_subcommand(1);
    auto* list = tasks->add_subcommand("list", "List registered task ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run)
            return cmd_run(config_path, workers, out_dir);
        if (*plot)
            return cmd_plot(in_dir, svg_path);
        if (*timing)
            return cmd_timing(in_dir, max_iter);
        if (*list)
            return cmd_tasks_list();
    } catch (const figbo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const figbo::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const figbo::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitOk;
}
