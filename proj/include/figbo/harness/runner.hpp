#ifndef FIGBO_HARNESS_RUNNER_HPP
#define FIGBO_HARNESS_RUNNER_HPP

#include <json.hpp>

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "figbo/bo_engine.hpp"
#include "figbo/harness/config.hpp"
#include "figbo/harness/csv.hpp"

namespace figbo::harness {

struct SuiteResult {
    std::filesystem::path output_dir;
    std::map<std::pair<std::string, std::string>, std::vector<RunRecord>> records; // (task, acq) -> reps
    std::vector<std::string> warnings;
};

struct SuiteOptions {
    std::ostream* progress = nullptr;
    /// Restricts execution to these repetition indices; empty runs all of them.
    std::vector<int> only_reps;
};

namespace detail {

// Without building the task, which is costly for sampled ones.
inline double task_noise_variance(const std::string& id)
{
    for (const auto& p : kGpPriorPresets)
        if (id == "gp-prior-" + std::to_string(p.dim) + "d")
            return p.noise_variance;
    return make_task(id).noise_variance;
}

inline nlohmann::json manifest_json(const ExperimentConfig& cfg)
{
    nlohmann::json m;
    m["config"] = to_json(cfg);
    m["seeds"] = nlohmann::json::array();
    for (int r = 0; r < cfg.reps; ++r)
        m["seeds"].push_back({{"rep", r},
                              {"run_seed", cfg.rep_seed(r)},
                              {"task_seed", stream_seed(cfg.rep_seed(r), Stream::Task)}});
    m["cells"] = nlohmann::json::array();
    for (const auto& cell : cfg.cells) {
        const AcquisitionSpec spec = parse_variant(cell.acq);
        nlohmann::json cj{{"task", cell.task},
                          {"acq", cell.acq},
                          {"eta", cfg.resolved_eta()},
                          {"L", cfg.L},
                          {"aggregate", aggregate_file_name(cell.task, cell.acq)}};
        if (spec.base == BaseAcquisition::PI)
            cj["pi_xi"] = cfg.pi_xi ? *cfg.pi_xi : std::sqrt(task_noise_variance(cell.task));
        if (spec.base == BaseAcquisition::UCB)
            cj["ucb_delta"] = cfg.ucb_delta;
        m["cells"].push_back(cj);
    }
    return m;
}

} // namespace detail

/// Runs every (cell, repetition) pair on a pool of worker threads. Outputs do not depend on the
/// worker count: seeds come from the repetition index only, and every repetition writes its own
/// file as soon as it finishes. Throws NumericalError after the barrier if any run failed.
inline SuiteResult run_suite(const ExperimentConfig& cfg, const SuiteOptions& opt = {})
{
    cfg.validate();
    SuiteResult result;
    result.output_dir = cfg.output_dir;
    std::filesystem::create_directories(result.output_dir);

    write_file_atomically(result.output_dir / "manifest.json",
                          [&](std::ostream& out) { out << detail::manifest_json(cfg).dump(2) << '\n'; });

    std::vector<std::string> task_ids;
    for (const auto& c : cfg.cells)
        if (std::find(task_ids.begin(), task_ids.end(), c.task) == task_ids.end())
            task_ids.push_back(c.task);
    std::vector<int> reps = opt.only_reps;
    if (reps.empty())
        for (int r = 0; r < cfg.reps; ++r)
            reps.push_back(r);
    for (int r : reps)
        if (r < 0 || r >= cfg.reps)
            throw ConfigError("reps", "repetition index " + std::to_string(r) + " out of range");

    // one job per (task, repetition): the task is built once and shared by its cells
    struct Job {
        std::string task;
        int rep;
    };
    std::vector<Job> jobs;
    for (const auto& t : task_ids)
        for (int r : reps)
            jobs.push_back({t, r});

    for (const auto& c : cfg.cells)
        result.records[{c.task, c.acq}].resize(reps.size());

    std::mutex mu;
    std::atomic<std::size_t> next{0};
    std::atomic<int> done{0};
    std::vector<std::string> errors;
    const int total = static_cast<int>(jobs.size() * cfg.cells.size() / task_ids.size());

    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= jobs.size())
                return;
            const Job& job = jobs[k];
            const auto slot = static_cast<std::size_t>(std::find(reps.begin(), reps.end(), job.rep) - reps.begin());
            std::optional<BenchmarkTask> task;
            try {
                task = make_task(job.task, stream_seed(cfg.rep_seed(job.rep), Stream::Task));
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mu);
                errors.push_back(job.task + " rep " + std::to_string(job.rep) + ": " + e.what());
                continue;
            }
            for (const auto& cell : cfg.cells) {
                if (cell.task != job.task)
                    continue;
                try {
                    RunRecord rec = run_bo(cfg.run_config(cell, job.rep, *task), *task);
                    rec.variant = cell.acq;
                    write_file_atomically(result.output_dir / run_file_name(cell.task, cell.acq, job.rep),
                                          [&](std::ostream& out) { write_run_csv(out, rec); });
                    std::lock_guard<std::mutex> lock(mu);
                    for (const auto& w : rec.warnings)
                        result.warnings.push_back(cell.task + "/" + cell.acq + " rep " + std::to_string(job.rep) +
                                                  ": " + w);
                    result.records[{cell.task, cell.acq}][slot] = std::move(rec);
                    const int d = ++done;
                    if (opt.progress)
                        *opt.progress << "[" << d << "/" << total << "] " << cell.task << " " << cell.acq << " rep "
                                      << job.rep << '\n'
                                      << std::flush;
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(mu);
                    errors.push_back(cell.task + "/" + cell.acq + " rep " + std::to_string(job.rep) + ": " +
                                     e.what());
                }
            }
        }
    };

    const int nthreads = std::max(1, std::min<int>(cfg.resolved_workers(), static_cast<int>(jobs.size())));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nthreads; ++i)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }

    if (!errors.empty()) {
        std::sort(errors.begin(), errors.end());
        std::string msg = std::to_string(errors.size()) + " run(s) failed";
        for (const auto& e : errors)
            msg += "\n  " + e;
        throw NumericalError(msg);
    }

    if (opt.only_reps.empty()) {
        for (const auto& cell : cfg.cells) {
            const auto& recs = result.records[{cell.task, cell.acq}];
            const AggregateCurve agg = aggregate(recs, Metric::LogRegret);
            if (!agg.warning.empty())
                result.warnings.push_back(cell.task + "/" + cell.acq + ": " + agg.warning);
            write_file_atomically(result.output_dir / aggregate_file_name(cell.task, cell.acq),
                                  [&](std::ostream& out) { write_aggregate_csv(out, agg); });
        }
    }
    std::sort(result.warnings.begin(), result.warnings.end());
    return result;
}

} // namespace figbo::harness

#endif // FIGBO_HARNESS_RUNNER_HPP
