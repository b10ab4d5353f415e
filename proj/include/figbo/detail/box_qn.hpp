#ifndef FIGBO_DETAIL_BOX_QN_HPP
#define FIGBO_DETAIL_BOX_QN_HPP

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <limits>

namespace figbo::detail {

struct BoxQnOptions {
    int max_iterations = 100;
    int max_evaluations = 250;
    double gradient_tolerance = 1e-5; // on the projected gradient, relative to max(1, |f|)
    double value_tolerance = 1e-10;
};

struct BoxQnResult {
    Eigen::VectorXd x;
    double value = std::numeric_limits<double>::infinity();
    int evaluations = 0;
    bool converged = false;
};

/// Objective returns f(x) and fills the gradient. Non-finite values are treated as rejected steps.
using ValueAndGradient = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Projected BFGS for min f(x) subject to lo <= x <= hi.
///
/// Variables sitting on a bound with the gradient pushing outward are frozen for the step;
/// the search direction on the rest comes from a dense BFGS inverse-Hessian estimate, and
/// the step is accepted by Armijo backtracking along the projected path. The returned
/// value never exceeds f(clip(x0)).
inline BoxQnResult minimize_box(const ValueAndGradient& f,
                                const Eigen::VectorXd& x0,
                                const Eigen::VectorXd& lo,
                                const Eigen::VectorXd& hi,
                                const BoxQnOptions& opt = {})
{
    const Eigen::Index n = x0.size();
    auto project = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return v.cwiseMax(lo).cwiseMin(hi); };

    BoxQnResult res;
    res.x = project(x0);
    Eigen::VectorXd g(n);
    res.value = f(res.x, g);
    res.evaluations = 1;
    if (!std::isfinite(res.value) || !g.allFinite())
        return res;

    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    bool h_fresh = true; // H is the identity and steps along -g are capped at unit length
    Eigen::VectorXd g_new(n);
    const double bound_eps = 1e-12;
    auto steepest = [&](const Eigen::Array<bool, Eigen::Dynamic, 1>& active) {
        Eigen::VectorXd d = -g;
        for (Eigen::Index i = 0; i < n; ++i)
            if (active[i])
                d[i] = 0.0;
        const double m = d.cwiseAbs().maxCoeff();
        if (m > 1.0)
            d /= m;
        return d;
    };

    for (int it = 0; it < opt.max_iterations && res.evaluations < opt.max_evaluations; ++it) {
        Eigen::Array<bool, Eigen::Dynamic, 1> active(n);
        double pg_norm = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            active[i] = (res.x[i] <= lo[i] + bound_eps && g[i] > 0.0) ||
                        (res.x[i] >= hi[i] - bound_eps && g[i] < 0.0);
            if (!active[i])
                pg_norm = std::max(pg_norm, std::abs(g[i]));
        }
        if (pg_norm < opt.gradient_tolerance * std::max(1.0, std::abs(res.value))) {
            res.converged = true;
            break;
        }

        Eigen::VectorXd d;
        if (h_fresh) {
            d = steepest(active);
        } else {
            d = -(H * g);
            for (Eigen::Index i = 0; i < n; ++i)
                if (active[i])
                    d[i] = 0.0;
            if (d.dot(g) >= 0.0) {
                H.setIdentity();
                h_fresh = true;
                d = steepest(active);
            }
        }

        double t = 1.0;
        bool accepted = false;
        Eigen::VectorXd x_new;
        double f_new = 0.0;
        for (int ls = 0; ls < 20 && res.evaluations < opt.max_evaluations; ++ls) {
            x_new = project(res.x + t * d);
            const Eigen::VectorXd step = x_new - res.x;
            if (step.cwiseAbs().maxCoeff() < 1e-10 * (1.0 + res.x.cwiseAbs().maxCoeff()))
                break;
            f_new = f(x_new, g_new);
            ++res.evaluations;
            if (std::isfinite(f_new) && g_new.allFinite() && f_new <= res.value + 1e-4 * g.dot(step)) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            if (!h_fresh) {
                H.setIdentity();
                h_fresh = true;
                continue;
            }
            break;
        }

        const Eigen::VectorXd s = x_new - res.x;
        const Eigen::VectorXd y = g_new - g;
        const double improvement = res.value - f_new;
        res.x = x_new;
        res.value = f_new;
        g = g_new;

        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (h_fresh) {
                H = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
                h_fresh = false;
            }
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
            H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        if (improvement < opt.value_tolerance * (1.0 + std::abs(res.value))) {
            res.converged = true;
            break;
        }
    }
    return res;
}

} // namespace figbo::detail

#endif // FIGBO_DETAIL_BOX_QN_HPP
