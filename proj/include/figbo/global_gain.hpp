#ifndef FIGBO_GLOBAL_GAIN_HPP
#define FIGBO_GLOBAL_GAIN_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "figbo/acq_optim.hpp"
#include "figbo/box.hpp"
#include "figbo/errors.hpp"
#include "figbo/gp.hpp"
#include "figbo/kernel.hpp"
#include "figbo/rng.hpp"

namespace figbo {

/// Monte-Carlo integration points, uniform over the search box.
struct McSampleSet {
    Eigen::MatrixXd Z; // L x d
    std::uint64_t seed = 0;

    Eigen::Index size() const { return Z.rows(); }
};

inline McSampleSet draw_mc_samples(const Box& box, int count, std::uint64_t seed)
{
    box.require_nondegenerate("draw_mc_samples");
    if (count < 1)
        throw InputError("draw_mc_samples: L must be >= 1");
    McSampleSet s;
    s.seed = seed;
    s.Z.resize(count, box.dim());
    Rng rng(seed);
    for (Eigen::Index i = 0; i < count; ++i)
        for (Eigen::Index j = 0; j < box.dim(); ++j)
            s.Z(i, j) = box.lower[j] + uniform01(rng) * (box.upper[j] - box.lower[j]);
    return s;
}

/// Per-iteration precomputation for the global gain of any candidate.
///
/// Rows of Z are stored in lexicographic order so that the accumulated value does not depend
/// on the order in which the samples were supplied.
class GammaCache {
public:
    const FittedGP& gp() const { return *gp_; }
    const Eigen::MatrixXd& samples() const { return Z_; }
    const Eigen::MatrixXd& cross() const { return C_; }     // L x n, rows c_l = k(z_l, X)
    const Eigen::MatrixXd& solved() const { return U_; }    // L x n, rows A^{-1} c_l
    const Eigen::VectorXd& quad() const { return q_; }      // q_l = c_l^T A^{-1} c_l
    const Eigen::VectorXd& prior_diag() const { return prior_diag_; }
    Eigen::Index mc_count() const { return Z_.rows(); }

    /// n-independent upper bound on Gamma: mean of k(z_l, z_l).
    double prior_cap() const { return prior_diag_.mean(); }

private:
    friend GammaCache build_cache(const FittedGP&, const McSampleSet&);

    const FittedGP* gp_ = nullptr;
    Eigen::MatrixXd Z_;
    Eigen::MatrixXd C_;
    Eigen::MatrixXd U_;
    Eigen::VectorXd q_;
    Eigen::VectorXd prior_diag_;
};

/// The cache references `gp`, which must outlive it.
inline GammaCache build_cache(const FittedGP& gp, const McSampleSet& mc)
{
    if (mc.Z.cols() != gp.dim())
        throw InputError("build_cache: MC sample dimension does not match the GP");
    if (mc.size() < 1)
        throw InputError("build_cache: empty MC sample set");

    const Eigen::Index L = mc.size();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(L));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index j = 0; j < mc.Z.cols(); ++j)
            if (mc.Z(a, j) != mc.Z(b, j))
                return mc.Z(a, j) < mc.Z(b, j);
        return false;
    });

    GammaCache c;
    c.gp_ = &gp;
    c.Z_.resize(L, gp.dim());
    for (Eigen::Index l = 0; l < L; ++l)
        c.Z_.row(l) = mc.Z.row(idx[static_cast<std::size_t>(l)]);

    c.prior_diag_.resize(L);
    for (Eigen::Index l = 0; l < L; ++l)
        c.prior_diag_[l] = detail::kernel_unchecked(gp.kernel(), c.Z_.row(l), c.Z_.row(l));

    const Eigen::Index n = gp.size();
    if (n == 0) {
        c.C_.resize(L, 0);
        c.U_.resize(L, 0);
        c.q_ = Eigen::VectorXd::Zero(L);
        return c;
    }
    c.C_ = cross_kernel(gp.kernel(), c.Z_, gp.dataset().X);
    c.U_ = gp.llt().solve(c.C_.transpose()).transpose();
    c.q_ = (c.C_.array() * c.U_.array()).rowwise().sum().matrix();
    return c;
}

namespace detail {

inline constexpr double kBorderFloor = 1e-12;

/// Scratch buffers for repeated evaluation; one per thread.
struct GammaWorkspace {
    Eigen::VectorXd proj; // C w
};

/// Gamma given the candidate's cross-kernel vector b = k_n(x) and w = A^{-1} b.
inline double gamma_from_border(const GammaCache& cache, const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::VectorXd& b, const Eigen::VectorXd& w, GammaWorkspace& ws)
{
    const FittedGP& gp = cache.gp();
    const KernelSpec& k = gp.kernel();
    const double kxx = detail::kernel_unchecked(k, x, x);
    const double border = std::max(kxx + gp.diagonal_term() - b.dot(w), kBorderFloor);
    const Eigen::Index L = cache.mc_count();
    const auto& Z = cache.samples();
    const auto& q = cache.quad();

    if (gp.size() > 0)
        ws.proj.noalias() = cache.cross() * w;
    else
        ws.proj = Eigen::VectorXd::Zero(L);

    double acc = 0.0;
    for (Eigen::Index l = 0; l < L; ++l) {
        const double t = detail::kernel_unchecked(k, Z.row(l), x);
        const double r = ws.proj[l] - t;
        acc += q[l] + r * r / border;
    }
    return acc / static_cast<double>(L);
}

} // namespace detail

/// Monte-Carlo global gain of adding candidate x: mean over samples z_l of
/// k_{n+1}(z_l)^T (K_{n+1} + noise I)^{-1} k_{n+1}(z_l), via the bordered-inverse identity.
inline double gamma(const Eigen::Ref<const Eigen::VectorXd>& x, const GammaCache& cache)
{
    const FittedGP& gp = cache.gp();
    if (x.size() != gp.dim())
        throw InputError("gamma: candidate dimension does not match the GP");
    const Eigen::VectorXd b = gp.cross(x);
    const Eigen::VectorXd w = gp.size() > 0 ? Eigen::VectorXd(gp.inv_gram() * b) : Eigen::VectorXd();
    detail::GammaWorkspace ws;
    return detail::gamma_from_border(cache, x, b, w, ws);
}

/// Border scalar k(x,x) + noise - b^T A^{-1} b before clamping.
inline double gamma_border(const Eigen::Ref<const Eigen::VectorXd>& x, const FittedGP& gp)
{
    const Eigen::VectorXd b = gp.cross(x);
    const double kxx = detail::kernel_unchecked(gp.kernel(), x, x);
    if (gp.size() == 0)
        return kxx + gp.diagonal_term();
    return kxx + gp.diagonal_term() - b.dot(gp.llt().solve(b));
}

/// Reference Gamma through explicit assembly and dense inversion of the (n+1) x (n+1)
/// Gram matrix. O(n^3) per candidate; meant for verification.
inline double gamma_direct(const Eigen::Ref<const Eigen::VectorXd>& x, const McSampleSet& mc, const FittedGP& gp)
{
    if (x.size() != gp.dim() || mc.Z.cols() != gp.dim())
        throw InputError("gamma_direct: dimension mismatch");
    const Eigen::Index n = gp.size();
    Eigen::MatrixXd Xa(n + 1, gp.dim());
    Xa.topRows(n) = gp.dataset().X;
    Xa.row(n) = x.transpose();

    Eigen::MatrixXd A = gram_matrix(gp.kernel(), Xa);
    A.diagonal().array() += gp.diagonal_term();
    Eigen::LLT<Eigen::MatrixXd> check(A);
    if (check.info() != Eigen::Success)
        throw NumericalError("gamma_direct: augmented Gram matrix is not positive definite");
    const Eigen::MatrixXd Ainv = A.inverse();

    const Eigen::MatrixXd Kz = cross_kernel(gp.kernel(), mc.Z, Xa); // L x (n+1)
    double acc = 0.0;
    for (Eigen::Index l = 0; l < mc.size(); ++l) {
        const Eigen::VectorXd v = Kz.row(l).transpose();
        acc += v.dot(Ainv * v);
    }
    return acc / static_cast<double>(mc.size());
}

/// 1/2 log|I + K / noise| over the point set, in nats.
inline double information_gain(const Eigen::Ref<const Eigen::MatrixXd>& XA, const KernelSpec& kernel,
                               double noise_variance)
{
    if (!(noise_variance > 0.0))
        throw InputError("information_gain: noise variance must be positive");
    if (XA.rows() == 0)
        return 0.0;
    Eigen::MatrixXd M = gram_matrix(kernel, XA) / noise_variance;
    M.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
        throw NumericalError("information_gain: I + K/noise not positive definite");
    return llt.matrixLLT().diagonal().array().log().sum();
}

/// Greedy maximum-variance query: approximately argmax of s_n(x) over the box.
inline Eigen::VectorXd max_variance_point(const FittedGP& gp, const Box& box, const OptimBudget& budget,
                                          std::uint64_t seed)
{
    if (box.dim() != gp.dim())
        throw InputError("max_variance_point: box dimension does not match the GP");
    auto score = [&gp](const Eigen::VectorXd& x) { return posterior(gp, x).variance; };
    return optimize_acquisition(score, box, budget, seed, "posterior variance").x;
}

} // namespace figbo

#endif // FIGBO_GLOBAL_GAIN_HPP
