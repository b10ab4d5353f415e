#ifndef FIGBO_TEST_REFERENCE_LOOP_HPP
#define FIGBO_TEST_REFERENCE_LOOP_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "figbo/bo_engine.hpp"

namespace figbo::test {

// Plain myopic BO loop assembled from the building blocks, with no look-ahead machinery at
// all. Consumes the same random streams as the engine, so traces can be compared bitwise.
inline RunRecord reference_myopic_run(const RunConfig& cfg, const BenchmarkTask& task)
{
    const Box& box = task.bounds;
    const Eigen::Index d = box.dim();
    const int M = cfg.initial_size > 0 ? cfg.initial_size : static_cast<int>(2 * d);
    const AcquisitionSpec& acq = cfg.acquisition;

    Rng noise_rng(stream_seed(cfg.seed, Stream::Noise));
    std::normal_distribution<double> nd;
    const double sd = std::sqrt(task.noise_variance);

    std::vector<Eigen::VectorXd> xs;
    std::vector<double> ys;
    double best_true = std::numeric_limits<double>::infinity();
    auto observe = [&](const Eigen::VectorXd& x) {
        const double f = task.objective(x);
        xs.push_back(x);
        ys.push_back(f + sd * nd(noise_rng));
        best_true = std::min(best_true, f);
    };
    const Eigen::MatrixXd U = scrambled_sobol(d, M, stream_seed(cfg.seed, Stream::Design));
    for (int i = 0; i < M; ++i)
        observe(box.from_unit(U.row(i).transpose()));

    RunRecord rec;
    rec.task = task.name;
    rec.variant = acq.variant();
    rec.seed = cfg.seed;
    rec.dim = d;
    std::optional<KernelSpec> kernel;
    if (cfg.hypers == HyperMode::Fixed && task.reference_kernel && cfg.kernel == task.reference_kernel->family)
        kernel = task.reference_kernel;
    bool frozen = kernel.has_value();

    for (int n = 1; n <= cfg.iterations; ++n) {
        const auto count = static_cast<Eigen::Index>(xs.size());
        Eigen::MatrixXd X(count, d);
        Eigen::VectorXd y(count);
        for (Eigen::Index i = 0; i < count; ++i) {
            X.row(i) = xs[static_cast<std::size_t>(i)].transpose();
            y[i] = ys[static_cast<std::size_t>(i)];
        }
        const double incumbent = y.minCoeff();
        Eigen::VectorXd t;
        double f_star = 0.0;
        if (acq.base == BaseAcquisition::EI) {
            t = (y.array() - y.mean()).matrix();
            f_star = incumbent - y.mean();
        } else {
            t = (y.array() - incumbent).matrix();
        }
        const Dataset data(X, t);
        if (!frozen) {
            MleOptions mo;
            mo.family = cfg.kernel;
            mo.noise = NoiseSpec(task.noise_variance);
            mo.box = box;
            mo.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(n));
            mo.restarts = (!kernel || (n - 1) % cfg.mle_full_every == 0) ? cfg.mle_restarts : 1;
            mo.initial = kernel;
            kernel = mle_fit(data, mo).kernel;
            frozen = cfg.hypers == HyperMode::Fixed;
        }
        const FittedGP gp = fit_gp(data, *kernel, NoiseSpec(task.noise_variance));
        const double beta = acq.base == BaseAcquisition::UCB ? beta_schedule(n, static_cast<int>(d), acq.ucb_delta) : 0.0;
        auto score = [&](const Eigen::VectorXd& x) {
            const PosteriorProbe p = probe(gp, x);
            return base_score(acq, p.mean, p.variance, f_star, beta);
        };
        Eigen::VectorXd x = optimize_acquisition(score, box, cfg.budget,
                                                 stream_seed(cfg.seed, Stream::AcqOptim, static_cast<std::uint64_t>(n)))
                                .x;
        bool dup = false;
        for (const auto& q : xs)
            dup = dup || ((q - x).array() / box.width().array()).matrix().norm() <= 1e-9;
        if (dup) {
            Rng jr(stream_seed(cfg.seed, Stream::Duplicate, static_cast<std::uint64_t>(n)));
            for (Eigen::Index j = 0; j < d; ++j)
                x[j] += (2.0 * uniform01(jr) - 1.0) * 1e-6 * box.width()[j];
            x = box.clip(x);
        }
        observe(x);
        RunRow row;
        row.iter = n;
        row.x = x;
        row.y = ys.back();
        row.best_y = std::min(incumbent, ys.back());
        row.regret = best_true - task.true_min;
        row.log_regret = std::log10(std::max(row.regret, 1e-10));
        rec.rows.push_back(row);
    }
    return rec;
}

} // namespace figbo::test

#endif
