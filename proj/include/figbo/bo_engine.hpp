#ifndef FIGBO_BO_ENGINE_HPP
#define FIGBO_BO_ENGINE_HPP

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "figbo/acq_optim.hpp"
#include "figbo/acquisition.hpp"
#include "figbo/benchmarks.hpp"
#include "figbo/errors.hpp"
#include "figbo/global_gain.hpp"
#include "figbo/gp.hpp"
#include "figbo/rng.hpp"

namespace figbo {

enum class HyperMode { Mle, Fixed };

struct RunConfig {
    std::string task_id = "branin";
    AcquisitionSpec acquisition;
    int iterations = 200;   // N, acquisition steps after the initial design
    int initial_size = 0;   // M; 0 resolves to 2d
    std::uint64_t seed = 0;
    HyperMode hypers = HyperMode::Mle;
    KernelFamily kernel = KernelFamily::SquaredExponential;
    OptimBudget budget;
    int mle_restarts = 8;
    int mle_full_every = 10; // full multi-start MLE cadence; warm-started single start otherwise
    bool record_timing = true;

    void validate() const
    {
        if (iterations < 1)
            throw ConfigError("N", "must be >= 1");
        if (initial_size < 0)
            throw ConfigError("M", "must be >= 1");
        if (!task_exists(task_id))
            throw ConfigError("task", "unknown task '" + task_id + "'");
        if (mle_restarts < 1)
            throw ConfigError("mle_restarts", "must be >= 1");
        if (mle_full_every < 1)
            throw ConfigError("mle_full_every", "must be >= 1");
        try {
            acquisition.validate();
            budget.validate();
        } catch (const InputError& e) {
            throw ConfigError("acquisition", e.what());
        }
    }

    int resolved_initial_size(Eigen::Index d) const
    {
        return initial_size > 0 ? initial_size : static_cast<int>(2 * d);
    }
};

struct RunRow {
    int iter = 0;
    Eigen::VectorXd x;
    double y = 0.0;
    double best_y = 0.0;     // best noisy observation so far
    double regret = 0.0;     // best noiseless value among queried points minus the optimum
    double log_regret = 0.0;
    double acq_time_s = 0.0;
};

struct RunRecord {
    std::string task;
    std::string variant;
    std::uint64_t seed = 0;
    Eigen::Index dim = 0;
    std::vector<RunRow> rows;
    Eigen::VectorXd x_star; // argmin of the noisy observations
    std::vector<std::string> warnings;
};

inline constexpr double kRegretFloor = 1e-10;

inline double log_regret(double best_y, double true_min)
{
    return std::log10(std::max(best_y - true_min, kRegretFloor));
}

/// M points of a digitally shifted Sobol sequence inside the box (rows).
inline Eigen::MatrixXd initial_design(const Box& box, int count, std::uint64_t seed)
{
    if (count < 1)
        throw InputError("initial_design: M must be >= 1");
    const Eigen::MatrixXd U = scrambled_sobol(box.dim(), count, seed);
    Eigen::MatrixXd X(count, box.dim());
    for (Eigen::Index i = 0; i < count; ++i)
        X.row(i) = box.from_unit(U.row(i).transpose()).transpose();
    return X;
}

namespace detail {

struct ScoreWorkspace {
    PosteriorProbe probe;
    GammaWorkspace gamma;
};

inline bool near_duplicate(const Eigen::MatrixXd& X, Eigen::Index n, const Eigen::VectorXd& x, const Box& box)
{
    const Eigen::ArrayXd w = box.width().array();
    for (Eigen::Index i = 0; i < n; ++i)
        if (((X.row(i).transpose().array() - x.array()) / w).matrix().norm() <= 1e-9)
            return true;
    return false;
}

} // namespace detail

/// One acquisition step's surrogate targets. EI sees mean-centred targets; UCB and PI see
/// targets shifted by the incumbent so that the best observation sits at 0.
struct SurrogateTargets {
    Eigen::VectorXd values;
    double f_star = 0.0;
};

inline SurrogateTargets surrogate_targets(const AcquisitionSpec& acq, const Eigen::Ref<const Eigen::VectorXd>& y)
{
    const double best = y.minCoeff();
    if (acq.base == BaseAcquisition::EI) {
        const double m = y.mean();
        return {(y.array() - m).matrix(), best - m};
    }
    return {figbo_variant_shift(y, best), 0.0};
}

/// Runs N acquisition iterations after an M-point initial design.
inline RunRecord run_bo(const RunConfig& cfg, const BenchmarkTask& task)
{
    cfg.validate();
    using clock = std::chrono::steady_clock;
    const Box& box = task.bounds;
    const Eigen::Index d = box.dim();
    const int M = cfg.resolved_initial_size(d);
    const int N = cfg.iterations;
    const AcquisitionSpec& acq = cfg.acquisition;

    RunRecord rec;
    rec.task = task.name;
    rec.variant = acq.variant();
    rec.seed = cfg.seed;
    rec.dim = d;
    rec.rows.reserve(static_cast<std::size_t>(N));

    Eigen::MatrixXd X(M + N, d);
    Eigen::VectorXd y(M + N);
    Rng noise_rng(stream_seed(cfg.seed, Stream::Noise));
    std::normal_distribution<double> nd;
    const double noise_sd = std::sqrt(task.noise_variance);

    double best_true = std::numeric_limits<double>::infinity();
    auto observe = [&](Eigen::Index row, const Eigen::VectorXd& x) {
        const double f = task.evaluate(x);
        X.row(row) = x.transpose();
        y[row] = f + noise_sd * nd(noise_rng);
        best_true = std::min(best_true, f);
    };

    const Eigen::MatrixXd design = initial_design(box, M, stream_seed(cfg.seed, Stream::Design));
    for (int i = 0; i < M; ++i)
        observe(i, design.row(i).transpose());

    std::optional<KernelSpec> kernel;
    if (cfg.hypers == HyperMode::Fixed && task.reference_kernel && cfg.kernel == task.reference_kernel->family)
        kernel = task.reference_kernel;
    bool frozen = kernel.has_value();
    const NoiseSpec noise(task.noise_variance);
    detail::ScoreWorkspace ws;

    for (int n = 1; n <= N; ++n) {
        const Eigen::Index count = M + n - 1;
        const auto targets = surrogate_targets(acq, y.head(count));
        const Dataset data(X.topRows(count), targets.values);

        std::optional<FittedGP> gp;
        try {
            if (!frozen) {
                MleOptions mo;
                mo.family = cfg.kernel;
                mo.noise = noise;
                mo.box = box;
                mo.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(n));
                const bool full = !kernel || (n - 1) % cfg.mle_full_every == 0;
                mo.restarts = full ? cfg.mle_restarts : 1;
                mo.initial = kernel;
                if (data.size() >= 2) {
                    const MleResult mr = mle_fit(data, mo);
                    if (mr.fallback)
                        rec.warnings.push_back("iteration " + std::to_string(n) + ": " + mr.warning);
                    kernel = mr.kernel;
                } else {
                    kernel = KernelSpec(cfg.kernel, median_distance_lengthscales(data, box), 1.0);
                }
                if (cfg.hypers == HyperMode::Fixed)
                    frozen = true;
            }
            gp = fit_gp(data, *kernel, noise);
        } catch (const NumericalError& e) {
            rec.warnings.push_back("iteration " + std::to_string(n) + ": GP fit failed (" + e.what() +
                                   "); querying a random point");
        }

        Eigen::VectorXd x_next;
        double acq_time = 0.0;
        if (gp) {
            const auto t0 = clock::now();
            std::optional<GammaCache> cache;
            if (acq.figbo_enabled)
                cache = build_cache(*gp, draw_mc_samples(box, acq.mc_samples,
                                                         stream_seed(cfg.seed, Stream::MonteCarlo,
                                                                     static_cast<std::uint64_t>(n))));
            const double lambda = acq.figbo_enabled ? lambda_coeff(acq.eta, n) : 0.0;
            const double beta = acq.base == BaseAcquisition::UCB ? beta_schedule(n, static_cast<int>(d), acq.ucb_delta)
                                                                 : 0.0;
            const double gamma_scale = acq.gamma_normalize ? 1.0 / gp->kernel().signal_variance : 1.0;
            auto score = [&](const Eigen::VectorXd& x) {
                probe_into(*gp, x, ws.probe);
                const double base = base_score(acq, ws.probe.mean, ws.probe.variance, targets.f_star, beta);
                if (!cache)
                    return base;
                const double g = detail::gamma_from_border(*cache, x, ws.probe.cross, ws.probe.solved, ws.gamma);
                return figbo_score(base, lambda, gamma_scale * g);
            };
            const OptimResult res = optimize_acquisition(
                score, box, cfg.budget, stream_seed(cfg.seed, Stream::AcqOptim, static_cast<std::uint64_t>(n)),
                acq.variant());
            x_next = res.x;
            if (cfg.record_timing)
                acq_time = std::chrono::duration<double>(clock::now() - t0).count();
        } else {
            Rng fb(stream_seed(cfg.seed, Stream::Fallback, static_cast<std::uint64_t>(n)));
            x_next.resize(d);
            for (Eigen::Index j = 0; j < d; ++j)
                x_next[j] = box.lower[j] + uniform01(fb) * (box.upper[j] - box.lower[j]);
        }

        if (detail::near_duplicate(X, count, x_next, box)) {
            Rng jr(stream_seed(cfg.seed, Stream::Duplicate, static_cast<std::uint64_t>(n)));
            for (Eigen::Index j = 0; j < d; ++j)
                x_next[j] += (2.0 * uniform01(jr) - 1.0) * 1e-6 * (box.upper[j] - box.lower[j]);
            x_next = box.clip(x_next);
        }

        observe(count, x_next);
        RunRow row;
        row.iter = n;
        row.x = x_next;
        row.y = y[count];
        row.best_y = y.head(count + 1).minCoeff();
        row.regret = best_true - task.true_min;
        row.log_regret = log_regret(best_true, task.true_min);
        row.acq_time_s = acq_time;
        rec.rows.push_back(std::move(row));
    }

    Eigen::Index arg = 0;
    y.minCoeff(&arg);
    rec.x_star = X.row(arg).transpose();
    return rec;
}

inline RunRecord run_bo(const RunConfig& cfg)
{
    cfg.validate();
    return run_bo(cfg, make_task(cfg.task_id, stream_seed(cfg.seed, Stream::Task)));
}

struct AggregateCurve {
    std::vector<double> mean;
    std::vector<double> std_error;
    int reps = 0;
    std::string warning;
};

enum class Metric { LogRegret, Regret, BestY };

inline double metric_value(const RunRow& r, Metric m)
{
    switch (m) {
    case Metric::LogRegret: return r.log_regret;
    case Metric::Regret: return r.regret;
    case Metric::BestY: return r.best_y;
    }
    return 0.0;
}

/// Per-iteration mean and standard error (sample std / sqrt(reps)).
inline AggregateCurve aggregate(const std::vector<RunRecord>& records, Metric metric = Metric::LogRegret)
{
    AggregateCurve out;
    if (records.empty())
        throw InputError("aggregate: no records");
    const std::size_t len = records.front().rows.size();
    for (const auto& r : records)
        if (r.rows.size() != len)
            throw InputError("aggregate: records have different lengths");
    out.reps = static_cast<int>(records.size());
    out.mean.assign(len, 0.0);
    out.std_error.assign(len, 0.0);
    if (records.size() < 2)
        out.warning = "aggregate: fewer than 2 repetitions; standard error reported as 0";
    const double reps = static_cast<double>(records.size());
    for (std::size_t i = 0; i < len; ++i) {
        double s = 0.0;
        for (const auto& r : records)
            s += metric_value(r.rows[i], metric);
        const double m = s / reps;
        out.mean[i] = m;
        if (records.size() >= 2) {
            double ss = 0.0;
            for (const auto& r : records) {
                const double dv = metric_value(r.rows[i], metric) - m;
                ss += dv * dv;
            }
            out.std_error[i] = std::sqrt(ss / (reps - 1.0)) / std::sqrt(reps);
        }
    }
    return out;
}

} // namespace figbo

#endif // FIGBO_BO_ENGINE_HPP
