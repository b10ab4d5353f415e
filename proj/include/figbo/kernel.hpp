#ifndef FIGBO_KERNEL_HPP
#define FIGBO_KERNEL_HPP

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <string_view>

#include "figbo/errors.hpp"

namespace figbo {

enum class KernelFamily { SquaredExponential, Matern52 };

inline std::string_view to_string(KernelFamily f)
{
    return f == KernelFamily::SquaredExponential ? "se" : "matern52";
}

inline KernelFamily kernel_family_from_string(std::string_view s)
{
    if (s == "se" || s == "squared_exponential")
        return KernelFamily::SquaredExponential;
    if (s == "matern52")
        return KernelFamily::Matern52;
    throw InputError("unknown kernel family '" + std::string(s) + "'");
}

/// Stationary ARD kernel: one length scale per input dimension, shared signal variance.
struct KernelSpec {
    KernelFamily family = KernelFamily::SquaredExponential;
    Eigen::VectorXd length_scales;
    double signal_variance = 1.0;

    KernelSpec() = default;
    KernelSpec(KernelFamily fam, Eigen::VectorXd ls, double sf2)
        : family(fam), length_scales(std::move(ls)), signal_variance(sf2)
    {
        validate();
    }

    static KernelSpec isotropic(KernelFamily fam, Eigen::Index d, double ell, double sf2)
    {
        return KernelSpec(fam, Eigen::VectorXd::Constant(d, ell), sf2);
    }

    Eigen::Index dim() const { return length_scales.size(); }

    void validate() const
    {
        if (length_scales.size() < 1)
            throw InputError("kernel needs at least one length scale");
        if (!(length_scales.array() > 0.0).all() || !length_scales.allFinite())
            throw InputError("kernel length scales must be positive and finite");
        if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
            throw InputError("kernel signal variance must be positive and finite");
    }
};

struct NoiseSpec {
    double variance = 0.0;
    bool learnable = false;

    NoiseSpec() = default;
    explicit NoiseSpec(double var, bool learn = false) : variance(var), learnable(learn)
    {
        if (!(variance >= 0.0) || !std::isfinite(variance))
            throw InputError("noise variance must be nonnegative and finite");
    }
};

namespace detail {

inline constexpr double kSqrt5 = 2.23606797749978969641;

// Scaled squared distance sum_j ((a_j - b_j)/l_j)^2; no dimension checks.
template <typename A, typename B>
inline double scaled_sqdist(const KernelSpec& k, const A& a, const B& b)
{
    double r2 = 0.0;
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        const double t = (a[j] - b[j]) / k.length_scales[j];
        r2 += t * t;
    }
    return r2;
}

inline double kernel_from_r2(const KernelSpec& k, double r2)
{
    if (k.family == KernelFamily::SquaredExponential)
        return k.signal_variance * std::exp(-0.5 * r2);
    const double r = std::sqrt(r2);
    return k.signal_variance * (1.0 + kSqrt5 * r + (5.0 / 3.0) * r2) * std::exp(-kSqrt5 * r);
}

// Unchecked kernel evaluation for hot loops.
template <typename A, typename B>
inline double kernel_unchecked(const KernelSpec& k, const A& a, const B& b)
{
    return kernel_from_r2(k, scaled_sqdist(k, a, b));
}

} // namespace detail

/// k(x, x'). Throws InputError when either point does not match the kernel dimension.
inline double kernel_eval(const KernelSpec& spec,
                          const Eigen::Ref<const Eigen::VectorXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& xp)
{
    if (x.size() != spec.dim() || xp.size() != spec.dim())
        throw InputError("kernel_eval: point dimension " + std::to_string(x.size()) + "/" +
                         std::to_string(xp.size()) + " does not match kernel dimension " +
                         std::to_string(spec.dim()));
    return detail::kernel_unchecked(spec, x, xp);
}

/// Gram matrix over the rows of X (no noise term).
inline Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& X)
{
    if (X.cols() != spec.dim())
        throw InputError("gram_matrix: input dimension does not match kernel");
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = spec.signal_variance;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = detail::kernel_unchecked(spec, X.row(i), X.row(j));
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

/// Cross-covariance matrix with entry (i, j) = k(A_i, B_j).
inline Eigen::MatrixXd cross_kernel(const KernelSpec& spec,
                                    const Eigen::Ref<const Eigen::MatrixXd>& A,
                                    const Eigen::Ref<const Eigen::MatrixXd>& B)
{
    if (A.cols() != spec.dim() || B.cols() != spec.dim())
        throw InputError("cross_kernel: input dimension does not match kernel");
    Eigen::MatrixXd C(A.rows(), B.rows());
    for (Eigen::Index j = 0; j < B.rows(); ++j)
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            C(i, j) = detail::kernel_unchecked(spec, A.row(i), B.row(j));
    return C;
}

/// Derivative of k(a, b) with respect to log l_j, for every j. Written into `out`.
template <typename A, typename B>
inline void kernel_grad_log_lengthscales(const KernelSpec& k, const A& a, const B& b,
                                         Eigen::Ref<Eigen::VectorXd> out)
{
    double r2 = 0.0;
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        const double t = (a[j] - b[j]) / k.length_scales[j];
        out[j] = t * t;
        r2 += t * t;
    }
    if (k.family == KernelFamily::SquaredExponential) {
        out *= k.signal_variance * std::exp(-0.5 * r2);
    } else {
        // dk/dlog l_j = sf2 * (5/3) (1 + sqrt5 r) exp(-sqrt5 r) * t_j^2
        const double r = std::sqrt(r2);
        out *= k.signal_variance * (5.0 / 3.0) * (1.0 + detail::kSqrt5 * r) * std::exp(-detail::kSqrt5 * r);
    }
}

} // namespace figbo

#endif // FIGBO_KERNEL_HPP
