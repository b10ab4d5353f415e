#ifndef FIGBO_GP_HPP
#define FIGBO_GP_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "figbo/box.hpp"
#include "figbo/detail/box_qn.hpp"
#include "figbo/errors.hpp"
#include "figbo/kernel.hpp"
#include "figbo/rng.hpp"

namespace figbo {

inline constexpr double kLog2Pi = 1.83787706640934548356;

struct Dataset {
    Eigen::MatrixXd X; // n x d, one observation per row
    Eigen::VectorXd y;

    Dataset() = default;
    Dataset(Eigen::MatrixXd inputs, Eigen::VectorXd targets) : X(std::move(inputs)), y(std::move(targets))
    {
        validate();
    }

    Eigen::Index size() const { return X.rows(); }
    Eigen::Index dim() const { return X.cols(); }

    void validate() const
    {
        if (X.rows() != y.size())
            throw InputError("dataset: " + std::to_string(X.rows()) + " input rows but " +
                             std::to_string(y.size()) + " targets");
        if (X.cols() < 1)
            throw InputError("dataset: input dimension must be >= 1");
        if (!X.allFinite() || !y.allFinite())
            throw InputError("dataset: non-finite entries");
    }

    void validate(const Box& box) const
    {
        validate();
        if (box.dim() != dim())
            throw InputError("dataset: dimension does not match the search box");
        for (Eigen::Index i = 0; i < size(); ++i)
            if (!box.contains(X.row(i).transpose(), 1e-12))
                throw InputError("dataset: row " + std::to_string(i) + " lies outside the search box");
    }
};

/// Immutable GP posterior for fixed hyperparameters.
///
/// Stores the Cholesky factor of A = K_n + (noise + jitter) I, the weights A^{-1} y and the
/// explicit inverse A^{-1}. All read operations are const and safe to share across threads.
class FittedGP {
public:
    const Dataset& dataset() const { return data_; }
    const KernelSpec& kernel() const { return kernel_; }
    const NoiseSpec& noise() const { return noise_; }
    double jitter() const { return jitter_; }
    /// Diagonal term actually added to K_n.
    double diagonal_term() const { return noise_.variance + jitter_; }

    Eigen::Index size() const { return data_.size(); }
    Eigen::Index dim() const { return kernel_.dim(); }

    Eigen::MatrixXd chol() const { return llt_.matrixL(); }
    const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }
    const Eigen::VectorXd& weights() const { return alpha_; }
    const Eigen::MatrixXd& inv_gram() const { return inv_gram_; }

    /// Cross-kernel vector k_n(x); no dimension check.
    Eigen::VectorXd cross(const Eigen::Ref<const Eigen::VectorXd>& x) const
    {
        Eigen::VectorXd b(size());
        for (Eigen::Index i = 0; i < size(); ++i)
            b[i] = detail::kernel_unchecked(kernel_, data_.X.row(i), x);
        return b;
    }

private:
    friend FittedGP fit_gp(const Dataset&, const KernelSpec&, const NoiseSpec&);

    Dataset data_;
    KernelSpec kernel_;
    NoiseSpec noise_;
    double jitter_ = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;
    Eigen::MatrixXd inv_gram_;
};

namespace detail {

inline double condition_estimate(const Eigen::MatrixXd& A)
{
    if (A.rows() == 0)
        return 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

inline bool factor_ok(const Eigen::LLT<Eigen::MatrixXd>& llt)
{
    if (llt.info() != Eigen::Success)
        return false;
    const auto& L = llt.matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i)
        if (!(L(i, i) > 0.0) || !std::isfinite(L(i, i)))
            return false;
    return true;
}

} // namespace detail

/// Fits the GP posterior. On Cholesky failure the diagonal jitter escalates from
/// 1e-10 sf2 by factors of 10 up to 1e-4 sf2; beyond that a NumericalError is thrown.
inline FittedGP fit_gp(const Dataset& dataset, const KernelSpec& kernel, const NoiseSpec& noise)
{
    dataset.validate();
    kernel.validate();
    if (dataset.dim() != kernel.dim())
        throw InputError("fit_gp: dataset dimension " + std::to_string(dataset.dim()) +
                         " does not match kernel dimension " + std::to_string(kernel.dim()));

    FittedGP gp;
    gp.data_ = dataset;
    gp.kernel_ = kernel;
    gp.noise_ = noise;
    const Eigen::Index n = dataset.size();

    Eigen::MatrixXd A = gram_matrix(kernel, dataset.X);
    A.diagonal().array() += noise.variance;

    double jitter = 0.0;
    const double first = 1e-10 * kernel.signal_variance;
    const double last = 1e-4 * kernel.signal_variance * (1.0 + 1e-9);
    for (;;) {
        Eigen::MatrixXd Aj = A;
        Aj.diagonal().array() += jitter;
        gp.llt_.compute(Aj);
        if (detail::factor_ok(gp.llt_))
            break;
        const double next = jitter == 0.0 ? first : jitter * 10.0;
        if (next > last) {
            std::ostringstream msg;
            msg << "fit_gp: Cholesky failed at maximum jitter " << jitter << " (n=" << n
                << ", condition estimate " << detail::condition_estimate(Aj) << ")";
            throw NumericalError(msg.str());
        }
        jitter = next;
    }
    gp.jitter_ = jitter;
    gp.alpha_ = gp.llt_.solve(dataset.y);
    gp.inv_gram_ = gp.llt_.solve(Eigen::MatrixXd::Identity(n, n));
    gp.inv_gram_ = 0.5 * (gp.inv_gram_ + gp.inv_gram_.transpose()).eval();
    return gp;
}

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
};

/// Posterior mean and variance through the Cholesky factor; variance is clamped to [0, k(x,x)].
inline Posterior posterior(const FittedGP& gp, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    if (x.size() != gp.dim())
        throw InputError("posterior: point dimension does not match the GP");
    const double prior = gp.kernel().signal_variance;
    if (gp.size() == 0)
        return {0.0, prior};
    const Eigen::VectorXd b = gp.cross(x);
    const Eigen::VectorXd v = gp.llt().matrixL().solve(b);
    const double var = prior - v.squaredNorm();
    return {b.dot(gp.weights()), std::clamp(var, 0.0, prior)};
}

/// Posterior pieces computed through the explicit inverse, sharing k_n(x) and A^{-1} k_n(x)
/// with the global-gain fast path.
struct PosteriorProbe {
    Eigen::VectorXd cross;  // k_n(x)
    Eigen::VectorXd solved; // A^{-1} k_n(x)
    double prior_variance = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

inline void probe_into(const FittedGP& gp, const Eigen::Ref<const Eigen::VectorXd>& x, PosteriorProbe& out)
{
    const Eigen::Index n = gp.size();
    out.prior_variance = gp.kernel().signal_variance;
    out.cross.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
        out.cross[i] = detail::kernel_unchecked(gp.kernel(), gp.dataset().X.row(i), x);
    out.solved.noalias() = gp.inv_gram() * out.cross;
    out.mean = out.cross.dot(gp.weights());
    out.variance = std::clamp(out.prior_variance - out.cross.dot(out.solved), 0.0, out.prior_variance);
}

inline PosteriorProbe probe(const FittedGP& gp, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    if (x.size() != gp.dim())
        throw InputError("probe: point dimension does not match the GP");
    PosteriorProbe p;
    probe_into(gp, x, p);
    return p;
}

/// Hyperparameter vector layout: [log l_1 .. log l_d, log sf2, log noise].
struct LogHypers {
    static Eigen::VectorXd pack(const KernelSpec& k, const NoiseSpec& nz)
    {
        Eigen::VectorXd t(k.dim() + 2);
        t.head(k.dim()) = k.length_scales.array().log();
        t[k.dim()] = std::log(k.signal_variance);
        t[k.dim() + 1] = nz.variance > 0.0 ? std::log(nz.variance) : -std::numeric_limits<double>::infinity();
        return t;
    }
};

struct LmlResult {
    double value = 0.0;
    Eigen::VectorXd gradient; // w.r.t. LogHypers layout
};

/// Log marginal likelihood of the GP's own targets and its gradient in log-hyperparameters.
inline LmlResult log_marginal_likelihood(const FittedGP& gp)
{
    const Eigen::Index n = gp.size();
    const Eigen::Index d = gp.dim();
    const auto& X = gp.dataset().X;
    const auto& k = gp.kernel();
    const Eigen::VectorXd& alpha = gp.weights();

    LmlResult r;
    const auto& L = gp.llt().matrixLLT();
    r.value = -0.5 * gp.dataset().y.dot(alpha) - L.diagonal().array().log().sum() - 0.5 * n * kLog2Pi;

    // W = alpha alpha^T - A^{-1}; dLML/dtheta = 1/2 tr(W dA/dtheta)
    r.gradient = Eigen::VectorXd::Zero(d + 2);
    Eigen::VectorXd dk(d);
    double g_sf2 = 0.0;
    double trace_w = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double wii = alpha[i] * alpha[i] - gp.inv_gram()(i, i);
        trace_w += wii;
        g_sf2 += 0.5 * wii * k.signal_variance;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double wij = alpha[i] * alpha[j] - gp.inv_gram()(i, j);
            kernel_grad_log_lengthscales(k, X.row(i), X.row(j), dk);
            r.gradient.head(d) += wij * dk; // symmetric pair counted once, times 2, times 1/2
            g_sf2 += wij * detail::kernel_unchecked(k, X.row(i), X.row(j));
        }
    }
    r.gradient[d] = g_sf2;
    r.gradient[d + 1] = 0.5 * gp.noise().variance * trace_w;
    return r;
}

/// Draws y ~ N(0, K + noise I) at the rows of X.
inline Eigen::VectorXd sample_gp_values(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                        const KernelSpec& kernel,
                                        double noise_variance,
                                        Rng& rng)
{
    Eigen::MatrixXd K = gram_matrix(kernel, X);
    K.diagonal().array() += noise_variance + 1e-8 * kernel.signal_variance;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success)
        throw NumericalError("sample_gp_values: covariance not positive definite");
    std::normal_distribution<double> nd;
    Eigen::VectorXd z(X.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i)
        z[i] = nd(rng);
    return llt.matrixL() * z;
}

struct HyperBounds {
    Eigen::VectorXd lower; // LogHypers layout
    Eigen::VectorXd upper;
};

namespace detail {

inline double target_scale(const Eigen::VectorXd& y)
{
    if (y.size() < 2)
        return 1.0;
    const double m = y.mean();
    const double v = (y.array() - m).square().sum() / static_cast<double>(y.size() - 1);
    return v > 1e-12 ? v : 1.0;
}

inline Eigen::VectorXd input_ranges(const Dataset& data, const std::optional<Box>& box)
{
    Eigen::VectorXd range = box ? box->width()
                                : Eigen::VectorXd(data.X.colwise().maxCoeff() - data.X.colwise().minCoeff());
    for (Eigen::Index j = 0; j < range.size(); ++j)
        if (!(range[j] > 0.0))
            range[j] = 1.0;
    return range;
}

} // namespace detail

/// Default log-space box: length scales in [1e-3, 1e3] x input range, sf2 in
/// [1e-3, 1e3] x sample variance of y, learnable noise in [1e-8, 1] x sample variance.
inline HyperBounds default_hyper_bounds(const Dataset& data, const std::optional<Box>& box)
{
    const Eigen::Index d = data.dim();
    const Eigen::VectorXd range = detail::input_ranges(data, box);
    const double v = detail::target_scale(data.y);
    HyperBounds b{Eigen::VectorXd(d + 2), Eigen::VectorXd(d + 2)};
    b.lower.head(d) = (range.array() * 1e-3).log();
    b.upper.head(d) = (range.array() * 1e3).log();
    b.lower[d] = std::log(1e-3 * v);
    b.upper[d] = std::log(1e3 * v);
    b.lower[d + 1] = std::log(std::max(1e-8 * v, 1e-12));
    b.upper[d + 1] = std::log(v);
    return b;
}

/// Per-dimension median of pairwise absolute differences; falls back to the input range.
inline Eigen::VectorXd median_distance_lengthscales(const Dataset& data, const std::optional<Box>& box)
{
    const Eigen::Index n = data.size();
    const Eigen::Index d = data.dim();
    const Eigen::VectorXd range = detail::input_ranges(data, box);
    Eigen::VectorXd ls(d);
    std::vector<double> diffs;
    for (Eigen::Index j = 0; j < d; ++j) {
        diffs.clear();
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = 0; b < a; ++b)
                diffs.push_back(std::abs(data.X(a, j) - data.X(b, j)));
        double med = range[j];
        if (!diffs.empty()) {
            auto mid = diffs.begin() + static_cast<std::ptrdiff_t>(diffs.size() / 2);
            std::nth_element(diffs.begin(), mid, diffs.end());
            med = *mid;
        }
        ls[j] = std::clamp(med, 1e-3 * range[j], 1e3 * range[j]);
    }
    return ls;
}

struct MleOptions {
    KernelFamily family = KernelFamily::SquaredExponential;
    NoiseSpec noise;                         // fixed value, or starting value when learnable
    int restarts = 8;
    std::uint64_t seed = 0;
    std::optional<Box> box;                  // input range normalization
    std::optional<HyperBounds> bounds;       // overrides default_hyper_bounds
    std::optional<KernelSpec> initial;       // first restart starts here when given
    detail::BoxQnOptions local;
};

struct MleResult {
    KernelSpec kernel;
    NoiseSpec noise;
    double lml = -std::numeric_limits<double>::infinity();
    std::vector<double> initial_lml; // LML at each restart's starting point (-inf if it failed)
    bool fallback = false;
    std::string warning;
};

/// Maximum-likelihood hyperparameters by multi-start projected quasi-Newton in log space.
inline MleResult mle_fit(const Dataset& data, const MleOptions& opt)
{
    data.validate();
    if (data.size() < 2)
        throw InputError("mle_fit: needs at least 2 observations");
    if (opt.restarts < 1)
        throw InputError("mle_fit: restarts must be >= 1");

    const Eigen::Index d = data.dim();
    const bool learn_noise = opt.noise.learnable;
    const HyperBounds hb = opt.bounds ? *opt.bounds : default_hyper_bounds(data, opt.box);
    const Eigen::Index p = learn_noise ? d + 2 : d + 1;
    const Eigen::VectorXd lo = hb.lower.head(p);
    const Eigen::VectorXd hi = hb.upper.head(p);

    auto unpack = [&](const Eigen::VectorXd& t, KernelSpec& k, NoiseSpec& nz) {
        k.family = opt.family;
        k.length_scales = t.head(d).array().exp();
        k.signal_variance = std::exp(t[d]);
        nz = opt.noise;
        if (learn_noise)
            nz.variance = std::exp(t[d + 1]);
    };

    auto objective = [&](const Eigen::VectorXd& t, Eigen::VectorXd& g) -> double {
        KernelSpec k;
        NoiseSpec nz;
        unpack(t, k, nz);
        try {
            const FittedGP gp = fit_gp(data, k, nz);
            const LmlResult r = log_marginal_likelihood(gp);
            g = -r.gradient.head(p);
            return -r.value;
        } catch (const NumericalError&) {
            g = Eigen::VectorXd::Zero(p);
            return std::numeric_limits<double>::infinity();
        }
    };

    const double v = detail::target_scale(data.y);
    const Eigen::VectorXd range = detail::input_ranges(data, opt.box);
    Rng rng(stream_seed(opt.seed, Stream::Hyper));

    MleResult best;
    Eigen::VectorXd best_t;
    for (int r = 0; r < opt.restarts; ++r) {
        Eigen::VectorXd t0(p);
        if (r == 0) {
            if (opt.initial && opt.initial->dim() == d) {
                t0.head(d) = opt.initial->length_scales.array().log();
                t0[d] = std::log(opt.initial->signal_variance);
            } else {
                t0.head(d) = median_distance_lengthscales(data, opt.box).array().log();
                t0[d] = std::log(v);
            }
        } else {
            for (Eigen::Index j = 0; j < d; ++j)
                t0[j] = std::log(range[j]) + std::log(1e-2) + uniform01(rng) * std::log(1e3);
            t0[d] = std::log(v) + (uniform01(rng) * 2.0 - 1.0) * std::log(10.0);
        }
        if (learn_noise)
            t0[d + 1] = std::log(std::max(opt.noise.variance, 1e-6 * v));
        t0 = t0.cwiseMax(lo).cwiseMin(hi);

        Eigen::VectorXd g0(p);
        const double f0 = objective(t0, g0);
        best.initial_lml.push_back(std::isfinite(f0) ? -f0 : -std::numeric_limits<double>::infinity());
        if (!std::isfinite(f0))
            continue;

        const auto res = detail::minimize_box(objective, t0, lo, hi, opt.local);
        if (std::isfinite(res.value) && -res.value > best.lml) {
            best.lml = -res.value;
            best_t = res.x;
        }
    }

    if (best_t.size() == 0) {
        best.fallback = true;
        best.warning = "mle_fit: all restarts failed; using median-distance length scales";
        best.kernel = KernelSpec(opt.family, median_distance_lengthscales(data, opt.box), v);
        best.noise = opt.noise;
        try {
            best.lml = log_marginal_likelihood(fit_gp(data, best.kernel, best.noise)).value;
        } catch (const NumericalError&) {
            best.lml = -std::numeric_limits<double>::infinity();
        }
        return best;
    }
    unpack(best_t, best.kernel, best.noise);
    return best;
}

} // namespace figbo

#endif // FIGBO_GP_HPP
