#ifndef FIGBO_BENCHMARKS_HPP
#define FIGBO_BENCHMARKS_HPP

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "figbo/acq_optim.hpp"
#include "figbo/box.hpp"
#include "figbo/errors.hpp"
#include "figbo/kernel.hpp"
#include "figbo/rng.hpp"

namespace figbo {

namespace detail {

inline void require_in_box(const char* name, const Box& box, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    if (x.size() != box.dim())
        throw InputError(std::string(name) + ": expected a " + std::to_string(box.dim()) + "-vector, got " +
                         std::to_string(x.size()));
    if (!box.contains(x, 1e-12))
        throw InputError(std::string(name) + ": input outside the search box");
}

inline Box make_box(std::initializer_list<std::pair<double, double>> sides)
{
    Eigen::VectorXd lo(static_cast<Eigen::Index>(sides.size())), hi(static_cast<Eigen::Index>(sides.size()));
    Eigen::Index i = 0;
    for (const auto& [a, b] : sides) {
        lo[i] = a;
        hi[i] = b;
        ++i;
    }
    return Box(lo, hi);
}

} // namespace detail

inline Box branin_box() { return detail::make_box({{-5.0, 10.0}, {0.0, 15.0}}); }
inline Box levy4_box() { return detail::make_box({{-10.0, 5.0}, {-10.0, 10.0}, {-5.0, 10.0}, {-1.0, 10.0}}); }
inline Box hartmann6_box() { return Box::unit(6); }

// Known optimal values of the analytic functions.
inline constexpr double kBraninMin = 10.0 / (8.0 * std::numbers::pi);
inline constexpr double kLevyMin = 0.0;
inline constexpr double kHartmann6Min = -3.32236801141551;

/// Branin-Hoo with a = 1, b = 5.1/(4 pi^2), c = 5/pi, r = 6, s = 10, t = 1/(8 pi).
inline double branin(const Eigen::Ref<const Eigen::VectorXd>& x)
{
    detail::require_in_box("branin", branin_box(), x);
    constexpr double pi = std::numbers::pi;
    constexpr double b = 5.1 / (4.0 * pi * pi), c = 5.0 / pi, r = 6.0, s = 10.0, t = 1.0 / (8.0 * pi);
    const double u = x[1] - b * x[0] * x[0] + c * x[0] - r;
    return u * u + s * (1.0 - t) * std::cos(x[0]) + s;
}

/// Levy function; global minimum 0 at the all-ones point.
inline double levy(const Eigen::Ref<const Eigen::VectorXd>& x)
{
    detail::require_in_box("levy", levy4_box(), x);
    constexpr double pi = std::numbers::pi;
    const Eigen::Index d = x.size();
    auto w = [&](Eigen::Index i) { return 1.0 + (x[i] - 1.0) / 4.0; };
    const double s0 = std::sin(pi * w(0));
    double f = s0 * s0;
    for (Eigen::Index i = 0; i + 1 < d; ++i) {
        const double wi = w(i);
        const double si = std::sin(pi * wi + 1.0);
        f += (wi - 1.0) * (wi - 1.0) * (1.0 + 10.0 * si * si);
    }
    const double wd = w(d - 1);
    const double sd = std::sin(2.0 * pi * wd);
    f += (wd - 1.0) * (wd - 1.0) * (1.0 + sd * sd);
    return f;
}

/// Six-dimensional Hartmann function on [0,1]^6.
inline double hartmann6(const Eigen::Ref<const Eigen::VectorXd>& x)
{
    detail::require_in_box("hartmann6", hartmann6_box(), x);
    static constexpr std::array<double, 4> alpha{1.0, 1.2, 3.0, 3.2};
    static constexpr double A[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                                       {0.05, 10, 17, 0.1, 8, 14},
                                       {3, 3.5, 1.7, 10, 17, 8},
                                       {17, 8, 0.05, 10, 0.1, 14}};
    static constexpr double P[4][6] = {{1312, 1696, 5569, 124, 8283, 5886},
                                       {2329, 4135, 8307, 3736, 1004, 9991},
                                       {2348, 1451, 3522, 2883, 3047, 6650},
                                       {4047, 8828, 8732, 5743, 1091, 381}};
    double f = 0.0;
    for (int i = 0; i < 4; ++i) {
        double inner = 0.0;
        for (int j = 0; j < 6; ++j) {
            const double dx = x[j] - 1e-4 * P[i][j];
            inner += A[i][j] * dx * dx;
        }
        f -= alpha[i] * std::exp(-inner);
    }
    return f;
}

/// A function drawn approximately from a zero-mean SE-kernel GP prior on [0,1]^d via random
/// Fourier features: f(x) = amp * sum_i w_i cos(omega_i . x + phase_i).
class RffSampler {
public:
    RffSampler(Eigen::Index d, double length_scale, double signal_variance, int num_features, std::uint64_t seed)
        : seed_(seed)
    {
        if (d < 1 || num_features < 1 || !(length_scale > 0.0) || !(signal_variance > 0.0))
            throw InputError("RffSampler: invalid configuration");
        Rng rng(seed);
        std::normal_distribution<double> nd;
        frequencies_.resize(num_features, d);
        for (Eigen::Index i = 0; i < num_features; ++i)
            for (Eigen::Index j = 0; j < d; ++j)
                frequencies_(i, j) = nd(rng) / length_scale;
        phases_.resize(num_features);
        for (Eigen::Index i = 0; i < num_features; ++i)
            phases_[i] = 2.0 * std::numbers::pi * uniform01(rng);
        weights_.resize(num_features);
        for (Eigen::Index i = 0; i < num_features; ++i)
            weights_[i] = nd(rng);
        amplitude_ = std::sqrt(2.0 * signal_variance / static_cast<double>(num_features));
    }

    Eigen::Index dim() const { return frequencies_.cols(); }
    Eigen::Index num_features() const { return frequencies_.rows(); }
    double amplitude() const { return amplitude_; }
    std::uint64_t seed() const { return seed_; }
    void rescale(double factor) { amplitude_ *= factor; }

    double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const
    {
        const Eigen::ArrayXd arg = (frequencies_ * x).array() + phases_.array();
        return amplitude_ * (arg.cos() * weights_.array()).sum();
    }

    /// Values at the rows of X.
    Eigen::VectorXd evaluate_rows(const Eigen::Ref<const Eigen::MatrixXd>& X) const
    {
        Eigen::VectorXd out(X.rows());
        const Eigen::Index block = 512;
        for (Eigen::Index s = 0; s < X.rows(); s += block) {
            const Eigen::Index m = std::min(block, X.rows() - s);
            Eigen::ArrayXXd arg = frequencies_ * X.middleRows(s, m).transpose(); // D x m
            arg.colwise() += phases_.array();
            out.segment(s, m) = amplitude_ * (arg.cos().matrix().transpose() * weights_);
        }
        return out;
    }

private:
    Eigen::MatrixXd frequencies_;
    Eigen::VectorXd phases_;
    Eigen::VectorXd weights_;
    double amplitude_ = 1.0;
    std::uint64_t seed_ = 0;
};

struct BenchmarkTask {
    std::string name;
    Box bounds;
    double noise_variance = 0.0;
    double true_min = 0.0;
    std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)> objective; // noiseless
    std::optional<KernelSpec> reference_kernel; // generating kernel, when known

    Eigen::Index dim() const { return bounds.dim(); }

    double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const
    {
        detail::require_in_box(name.c_str(), bounds, x);
        return objective(x);
    }
};

/// y = f(x) + eps with eps ~ N(0, noise_variance), drawn from the caller's stream.
inline double noisy_observe(const BenchmarkTask& task, const Eigen::Ref<const Eigen::VectorXd>& x, Rng& rng)
{
    const double f = task.evaluate(x);
    std::normal_distribution<double> nd;
    return f + std::sqrt(task.noise_variance) * nd(rng);
}

struct GpPriorPreset {
    int dim;
    double length_scale;
    double signal_variance;
    double noise_variance;
    double half_range; // declared output range is [-half_range, half_range]
};

inline constexpr std::array<GpPriorPreset, 4> kGpPriorPresets{{
    {2, 0.1, 10.0, 0.01, 9.0},
    {4, 0.2, 10.0, 0.01, 11.0},
    {6, 0.3, 10.0, 0.01, 13.0},
    {12, 0.6, 10.0, 0.01, 18.0},
}};

inline std::optional<GpPriorPreset> gp_prior_preset(int d)
{
    for (const auto& p : kGpPriorPresets)
        if (p.dim == d)
            return p;
    return std::nullopt;
}

struct GpPriorOptions {
    int num_features = 1024;
    int audit_points = 100000;
    int refine_top = 20;
    int refine_evals = 600;
    double range_tolerance = 0.10; // audited half-span kept within this fraction of the declared one
};

struct GpPriorAudit {
    double audit_min = 0.0;
    double audit_max = 0.0;
    double scale_applied = 1.0;
};

/// GP-prior sample task on [0,1]^d. The audited output half-span is pulled into the declared
/// half-range +-10% by rescaling; the optimum is estimated by random search over the audit
/// points and simplex refinement of the best ones.
inline BenchmarkTask sample_gp_prior_task(const GpPriorPreset& preset, std::uint64_t seed,
                                          const GpPriorOptions& opt = {}, GpPriorAudit* audit_out = nullptr)
{
    const Eigen::Index d = preset.dim;
    auto sampler = std::make_shared<RffSampler>(d, preset.length_scale, preset.signal_variance, opt.num_features,
                                                mix_seed(seed, 0x52FF));
    Rng rng(mix_seed(seed, 0xA0D1));
    Eigen::MatrixXd probes(opt.audit_points, d);
    for (Eigen::Index i = 0; i < probes.rows(); ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            probes(i, j) = uniform01(rng);
    Eigen::VectorXd values = sampler->evaluate_rows(probes);

    GpPriorAudit audit;
    const double half_span = 0.5 * (values.maxCoeff() - values.minCoeff());
    const double target = std::clamp(half_span, (1.0 - opt.range_tolerance) * preset.half_range,
                                     (1.0 + opt.range_tolerance) * preset.half_range);
    if (half_span > 0.0 && target != half_span) {
        audit.scale_applied = target / half_span;
        sampler->rescale(audit.scale_applied);
        values *= audit.scale_applied;
    }
    audit.audit_min = values.minCoeff();
    audit.audit_max = values.maxCoeff();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
    for (Eigen::Index i = 0; i < values.size(); ++i)
        order[static_cast<std::size_t>(i)] = i;
    const auto top = std::min<std::size_t>(static_cast<std::size_t>(opt.refine_top), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                      [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });

    const Box box = Box::unit(d);
    double best = values.minCoeff();
    auto neg = [&](const Eigen::VectorXd& x) { return -(*sampler)(x); };
    for (std::size_t k = 0; k < top; ++k) {
        int evals = 0;
        const Eigen::VectorXd start = probes.row(order[k]).transpose();
        auto [xr, vr] = detail::simplex_refine(neg, box, start, -values[order[k]], opt.refine_evals, evals);
        best = std::min(best, -vr);
    }
    if (audit_out)
        *audit_out = audit;

    BenchmarkTask task;
    task.name = "gp-prior-" + std::to_string(d) + "d";
    task.bounds = box;
    task.noise_variance = preset.noise_variance;
    task.true_min = best;
    task.objective = [sampler](const Eigen::Ref<const Eigen::VectorXd>& x) { return (*sampler)(x); };
    task.reference_kernel = KernelSpec::isotropic(KernelFamily::SquaredExponential, d, preset.length_scale,
                                                  preset.signal_variance * audit.scale_applied * audit.scale_applied);
    return task;
}

inline BenchmarkTask sample_gp_prior_task(int d, std::uint64_t seed, const GpPriorOptions& opt = {})
{
    const auto preset = gp_prior_preset(d);
    if (!preset)
        throw InputError("sample_gp_prior_task: no preset for dimension " + std::to_string(d) +
                         "; pass a GpPriorPreset");
    return sample_gp_prior_task(*preset, seed, opt);
}

inline const std::vector<std::string>& task_ids()
{
    static const std::vector<std::string> ids{"branin",      "levy4",       "hartmann6",   "gp-prior-2d",
                                              "gp-prior-4d", "gp-prior-6d", "gp-prior-12d"};
    return ids;
}

inline bool task_exists(const std::string& id)
{
    const auto& ids = task_ids();
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

/// Builds a registered task. The seed only matters for GP-prior tasks.
inline BenchmarkTask make_task(const std::string& id, std::uint64_t seed = 0)
{
    BenchmarkTask t;
    t.name = id;
    t.noise_variance = 0.01;
    if (id == "branin") {
        t.bounds = branin_box();
        t.true_min = kBraninMin;
        t.objective = [](const Eigen::Ref<const Eigen::VectorXd>& x) { return branin(x); };
        return t;
    }
    if (id == "levy4") {
        t.bounds = levy4_box();
        t.true_min = kLevyMin;
        t.objective = [](const Eigen::Ref<const Eigen::VectorXd>& x) { return levy(x); };
        return t;
    }
    if (id == "hartmann6") {
        t.bounds = hartmann6_box();
        t.true_min = kHartmann6Min;
        t.objective = [](const Eigen::Ref<const Eigen::VectorXd>& x) { return hartmann6(x); };
        return t;
    }
    for (const auto& p : kGpPriorPresets)
        if (id == "gp-prior-" + std::to_string(p.dim) + "d")
            return sample_gp_prior_task(p, seed);
    throw InputError("unknown task '" + id + "'");
}

} // namespace figbo

#endif // FIGBO_BENCHMARKS_HPP
