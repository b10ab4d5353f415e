#ifndef FIGBO_HARNESS_CONFIG_HPP
#define FIGBO_HARNESS_CONFIG_HPP

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "figbo/bo_engine.hpp"
#include "figbo/errors.hpp"

namespace figbo::harness {

struct Cell {
    std::string task;
    std::string acq;
};

/// A suite of (task, acquisition) cells sharing one protocol.
struct ExperimentConfig {
    std::vector<Cell> cells;
    int N = 200;
    int reps = 20;
    int M = 0;                      // 0: 2d
    std::optional<double> eta;      // unset: "auto" = N/10
    int L = 100;
    std::uint64_t seed = 0;
    std::string output_dir = "runs";
    int workers = 0;                // 0: available parallelism
    HyperMode hypers = HyperMode::Mle;
    KernelFamily kernel = KernelFamily::SquaredExponential;
    double ucb_delta = 0.1;
    std::optional<double> pi_xi;    // unset: observation noise standard deviation
    bool gamma_normalize = false;
    bool timing = true;
    OptimBudget budget;
    int mle_restarts = 8;
    int mle_full_every = 10;

    double resolved_eta() const { return eta ? *eta : N / 10.0; }

    int resolved_workers() const
    {
        if (workers > 0)
            return workers;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? static_cast<int>(hw) : 1;
    }

    void validate() const
    {
        if (cells.empty())
            throw ConfigError("cells", "at least one (task, acquisition) cell is required");
        std::set<std::pair<std::string, std::string>> seen;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto field = "cells[" + std::to_string(i) + "]";
            if (!task_exists(cells[i].task))
                throw ConfigError(field + ".task", "unknown task '" + cells[i].task + "'");
            try {
                parse_variant(cells[i].acq);
            } catch (const InputError& e) {
                throw ConfigError(field + ".acq", e.what());
            }
            if (!seen.insert({cells[i].task, cells[i].acq}).second)
                throw ConfigError(field, "duplicate cell " + cells[i].task + "/" + cells[i].acq);
        }
        if (N < 1)
            throw ConfigError("N", "must be >= 1");
        if (reps < 1)
            throw ConfigError("reps", "must be >= 1");
        if (M < 0)
            throw ConfigError("M", "must be >= 1 (or 0 for the 2d default)");
        if (!(resolved_eta() > 0.0) || !std::isfinite(resolved_eta()))
            throw ConfigError("eta", "must be positive or \"auto\"");
        if (L < 1)
            throw ConfigError("L", "must be >= 1");
        if (workers < 0)
            throw ConfigError("workers", "must be >= 0");
        if (!(ucb_delta > 0.0 && ucb_delta < 1.0))
            throw ConfigError("ucb_delta", "must lie in (0, 1)");
        if (pi_xi && !(*pi_xi >= 0.0))
            throw ConfigError("pi_xi", "must be nonnegative");
        if (budget.top_k < 1 || budget.raw_candidates < budget.top_k)
            throw ConfigError("budget", "need raw_candidates >= top_k >= 1");
        if (budget.local_evals < 0)
            throw ConfigError("budget.local_evals", "must be >= 0");
        if (mle_restarts < 1)
            throw ConfigError("mle.restarts", "must be >= 1");
        if (mle_full_every < 1)
            throw ConfigError("mle.full_every", "must be >= 1");
        if (output_dir.empty())
            throw ConfigError("output_dir", "must not be empty");
    }

    /// Engine configuration for one cell and repetition.
    RunConfig run_config(const Cell& cell, int rep, const BenchmarkTask& task) const
    {
        RunConfig rc;
        rc.task_id = cell.task;
        rc.acquisition = parse_variant(cell.acq);
        rc.acquisition.eta = resolved_eta();
        rc.acquisition.mc_samples = L;
        rc.acquisition.ucb_delta = ucb_delta;
        rc.acquisition.pi_xi = pi_xi ? *pi_xi : std::sqrt(task.noise_variance);
        rc.acquisition.gamma_normalize = gamma_normalize;
        rc.iterations = N;
        rc.initial_size = M;
        rc.seed = rep_seed(rep);
        rc.hypers = hypers;
        rc.kernel = kernel;
        rc.budget = budget;
        rc.mle_restarts = mle_restarts;
        rc.mle_full_every = mle_full_every;
        rc.record_timing = timing;
        return rc;
    }

    std::uint64_t rep_seed(int rep) const { return mix_seed(seed, static_cast<std::uint64_t>(rep)); }
};

namespace detail {

template <typename T>
T get_field(const nlohmann::json& j, const std::string& key, const std::string& field)
{
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(field, std::string("invalid value: ") + e.what());
    }
}

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where)
{
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError(where + it.key(), "unknown field");
}

} // namespace detail

/// Parses the JSON config schema (see README). A manifest written by a previous run is accepted
/// as well: its "config" member is used.
inline ExperimentConfig parse_config(const nlohmann::json& root)
{
    if (!root.is_object())
        throw ConfigError("<root>", "config must be a JSON object");
    const nlohmann::json& j = root.contains("config") ? root.at("config") : root;
    if (!j.is_object())
        throw ConfigError("config", "must be a JSON object");
    detail::reject_unknown(j,
                           {"cells", "tasks", "acquisitions", "N", "reps", "M", "eta", "L", "seed", "output_dir",
                            "workers", "hypers", "kernel", "ucb_delta", "pi_xi", "gamma_normalize", "timing",
                            "budget", "mle"},
                           "");
    ExperimentConfig c;
    using detail::get_field;

    if (j.contains("cells")) {
        if (j.contains("tasks") || j.contains("acquisitions"))
            throw ConfigError("cells", "give either cells or tasks x acquisitions, not both");
        const auto& arr = j.at("cells");
        if (!arr.is_array())
            throw ConfigError("cells", "must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto field = "cells[" + std::to_string(i) + "]";
            if (!arr[i].is_object())
                throw ConfigError(field, "must be an object with task and acq");
            detail::reject_unknown(arr[i], {"task", "acq"}, field + ".");
            c.cells.push_back({get_field<std::string>(arr[i], "task", field + ".task"),
                               get_field<std::string>(arr[i], "acq", field + ".acq")});
        }
    } else {
        if (!j.contains("tasks") || !j.contains("acquisitions"))
            throw ConfigError("cells", "missing: give cells, or tasks and acquisitions");
        const auto tasks = get_field<std::vector<std::string>>(j, "tasks", "tasks");
        const auto acqs = get_field<std::vector<std::string>>(j, "acquisitions", "acquisitions");
        for (const auto& t : tasks)
            for (const auto& a : acqs)
                c.cells.push_back({t, a});
    }

    if (j.contains("N"))
        c.N = get_field<int>(j, "N", "N");
    if (j.contains("reps"))
        c.reps = get_field<int>(j, "reps", "reps");
    if (j.contains("M"))
        c.M = get_field<int>(j, "M", "M");
    if (j.contains("eta")) {
        const auto& e = j.at("eta");
        if (e.is_string()) {
            if (e.get<std::string>() != "auto")
                throw ConfigError("eta", "must be a number or \"auto\"");
        } else if (e.is_number()) {
            c.eta = e.get<double>();
        } else {
            throw ConfigError("eta", "must be a number or \"auto\"");
        }
    }
    if (j.contains("L"))
        c.L = get_field<int>(j, "L", "L");
    if (j.contains("seed"))
        c.seed = get_field<std::uint64_t>(j, "seed", "seed");
    if (j.contains("output_dir"))
        c.output_dir = get_field<std::string>(j, "output_dir", "output_dir");
    if (j.contains("workers"))
        c.workers = get_field<int>(j, "workers", "workers");
    if (j.contains("hypers")) {
        const auto h = get_field<std::string>(j, "hypers", "hypers");
        if (h == "mle")
            c.hypers = HyperMode::Mle;
        else if (h == "fixed")
            c.hypers = HyperMode::Fixed;
        else
            throw ConfigError("hypers", "must be \"mle\" or \"fixed\"");
    }
    if (j.contains("kernel")) {
        try {
            c.kernel = kernel_family_from_string(get_field<std::string>(j, "kernel", "kernel"));
        } catch (const InputError& e) {
            throw ConfigError("kernel", e.what());
        }
    }
    if (j.contains("ucb_delta"))
        c.ucb_delta = get_field<double>(j, "ucb_delta", "ucb_delta");
    if (j.contains("pi_xi") && !j.at("pi_xi").is_null())
        c.pi_xi = get_field<double>(j, "pi_xi", "pi_xi");
    if (j.contains("gamma_normalize"))
        c.gamma_normalize = get_field<bool>(j, "gamma_normalize", "gamma_normalize");
    if (j.contains("timing"))
        c.timing = get_field<bool>(j, "timing", "timing");
    if (j.contains("budget")) {
        const auto& b = j.at("budget");
        if (!b.is_object())
            throw ConfigError("budget", "must be an object");
        detail::reject_unknown(b, {"raw_candidates", "top_k", "local_evals"}, "budget.");
        if (b.contains("raw_candidates"))
            c.budget.raw_candidates = get_field<int>(b, "raw_candidates", "budget.raw_candidates");
        if (b.contains("top_k"))
            c.budget.top_k = get_field<int>(b, "top_k", "budget.top_k");
        if (b.contains("local_evals"))
            c.budget.local_evals = get_field<int>(b, "local_evals", "budget.local_evals");
    }
    if (j.contains("mle")) {
        const auto& m = j.at("mle");
        if (!m.is_object())
            throw ConfigError("mle", "must be an object");
        detail::reject_unknown(m, {"restarts", "full_every"}, "mle.");
        if (m.contains("restarts"))
            c.mle_restarts = get_field<int>(m, "restarts", "mle.restarts");
        if (m.contains("full_every"))
            c.mle_full_every = get_field<int>(m, "full_every", "mle.full_every");
    }
    return c;
}

/// FIGBO_SEED, when set, replaces the seed from the file.
inline void apply_environment(ExperimentConfig& c)
{
    const char* env = std::getenv("FIGBO_SEED");
    if (!env || !*env)
        return;
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(env, &pos);
        if (pos != std::string(env).size())
            throw std::invalid_argument("trailing characters");
        c.seed = v;
    } catch (const std::exception&) {
        throw ConfigError("FIGBO_SEED", "must be a nonnegative integer, got '" + std::string(env) + "'");
    }
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("--config", "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("--config", std::string("JSON parse error: ") + e.what());
    }
    return parse_config(j);
}

/// Every setting with its defaults filled in.
inline nlohmann::json to_json(const ExperimentConfig& c)
{
    nlohmann::json j;
    j["cells"] = nlohmann::json::array();
    for (const auto& cell : c.cells)
        j["cells"].push_back({{"task", cell.task}, {"acq", cell.acq}});
    j["N"] = c.N;
    j["reps"] = c.reps;
    j["M"] = c.M;
    j["eta"] = c.resolved_eta();
    j["L"] = c.L;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["workers"] = c.workers;
    j["hypers"] = c.hypers == HyperMode::Mle ? "mle" : "fixed";
    j["kernel"] = std::string(to_string(c.kernel));
    j["ucb_delta"] = c.ucb_delta;
    j["pi_xi"] = c.pi_xi ? nlohmann::json(*c.pi_xi) : nlohmann::json(nullptr);
    j["gamma_normalize"] = c.gamma_normalize;
    j["timing"] = c.timing;
    j["budget"] = {{"raw_candidates", c.budget.raw_candidates},
                   {"top_k", c.budget.top_k},
                   {"local_evals", c.budget.local_evals}};
    j["mle"] = {{"restarts", c.mle_restarts}, {"full_every", c.mle_full_every}};
    return j;
}

} // namespace figbo::harness

#endif // FIGBO_HARNESS_CONFIG_HPP
