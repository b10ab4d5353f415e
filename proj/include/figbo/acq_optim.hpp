#ifndef FIGBO_ACQ_OPTIM_HPP
#define FIGBO_ACQ_OPTIM_HPP

#include <Eigen/Core>
#include <boost/random/sobol.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "figbo/box.hpp"
#include "figbo/errors.hpp"
#include "figbo/rng.hpp"

namespace figbo {

struct OptimBudget {
    int raw_candidates = 1024;
    int top_k = 10;
    int local_evals = 100; // per start

    void validate() const
    {
        if (top_k < 1 || raw_candidates < top_k)
            throw InputError("optim budget: need raw_candidates >= top_k >= 1");
        if (local_evals < 0)
            throw InputError("optim budget: local_evals must be >= 0");
    }
};

/// `count` points of a Sobol sequence in [0,1)^d with a random digital shift.
/// The all-zero first point of the unshifted sequence is skipped.
inline Eigen::MatrixXd scrambled_sobol(Eigen::Index d, Eigen::Index count, std::uint64_t seed)
{
    if (d < 1)
        throw InputError("scrambled_sobol: dimension must be >= 1");
    boost::random::sobol engine(static_cast<std::size_t>(d));
    engine.discard(static_cast<std::uintmax_t>(d));
    Rng rng(seed);
    std::vector<std::uint64_t> shift(static_cast<std::size_t>(d));
    for (auto& s : shift)
        s = rng();
    Eigen::MatrixXd U(count, d);
    for (Eigen::Index i = 0; i < count; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const std::uint64_t v = static_cast<std::uint64_t>(engine()) ^ shift[static_cast<std::size_t>(j)];
            U(i, j) = static_cast<double>(v >> 11) * 0x1.0p-53;
        }
    }
    return U;
}

struct OptimResult {
    Eigen::VectorXd x;
    double score = -std::numeric_limits<double>::infinity();
    double raw_best = -std::numeric_limits<double>::infinity();
    int evaluations = 0;
};

namespace detail {

// Maximizes score inside the box with a Nelder-Mead simplex whose vertices are always
// projected into the box. Returns the best vertex seen.
template <typename Score>
std::pair<Eigen::VectorXd, double> simplex_refine(Score& score, const Box& box, const Eigen::VectorXd& start,
                                                  double start_value, int max_evals, int& evals)
{
    const Eigen::Index d = start.size();
    auto value = [&](const Eigen::VectorXd& x) {
        const double v = score(x);
        ++evals;
        return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
    };

    std::vector<Eigen::VectorXd> vert(static_cast<std::size_t>(d + 1));
    std::vector<double> f(static_cast<std::size_t>(d + 1));
    vert[0] = start;
    f[0] = std::isfinite(start_value) ? -start_value : std::numeric_limits<double>::infinity();
    int used = 0;
    const Eigen::VectorXd w = box.width();
    for (Eigen::Index j = 0; j < d && used < max_evals; ++j) {
        Eigen::VectorXd v = start;
        const double step = 0.05 * w[j];
        v[j] = (v[j] + step <= box.upper[j]) ? v[j] + step : v[j] - step;
        vert[static_cast<std::size_t>(j + 1)] = box.clip(v);
        f[static_cast<std::size_t>(j + 1)] = value(vert[static_cast<std::size_t>(j + 1)]);
        ++used;
    }
    if (used < d)
        return {start, start_value};

    std::vector<std::size_t> order(vert.size());
    while (used < max_evals) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
        if (std::abs(f[worst] - f[best]) <= 1e-12 * (1.0 + std::abs(f[best])) &&
            (vert[worst] - vert[best]).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + w.maxCoeff()))
            break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
        for (std::size_t i = 0; i < vert.size(); ++i)
            if (i != worst)
                centroid += vert[i];
        centroid /= static_cast<double>(d);

        const Eigen::VectorXd xr = box.clip(centroid + (centroid - vert[worst]));
        const double fr = value(xr);
        ++used;
        if (fr < f[best]) {
            if (used >= max_evals) {
                vert[worst] = xr;
                f[worst] = fr;
                break;
            }
            const Eigen::VectorXd xe = box.clip(centroid + 2.0 * (centroid - vert[worst]));
            const double fe = value(xe);
            ++used;
            if (fe < fr) {
                vert[worst] = xe;
                f[worst] = fe;
            } else {
                vert[worst] = xr;
                f[worst] = fr;
            }
        } else if (fr < f[second]) {
            vert[worst] = xr;
            f[worst] = fr;
        } else {
            const bool outside = fr < f[worst];
            const Eigen::VectorXd xc = outside ? box.clip(centroid + 0.5 * (xr - centroid))
                                               : box.clip(centroid + 0.5 * (vert[worst] - centroid));
            const double fc = value(xc);
            ++used;
            if (fc < std::min(fr, f[worst])) {
                vert[worst] = xc;
                f[worst] = fc;
            } else {
                // shrink towards the best vertex
                for (std::size_t i = 0; i < vert.size() && used < max_evals; ++i) {
                    if (i == best)
                        continue;
                    vert[i] = box.clip(vert[best] + 0.5 * (vert[i] - vert[best]));
                    f[i] = value(vert[i]);
                    ++used;
                }
            }
        }
    }
    std::size_t arg = 0;
    for (std::size_t i = 1; i < vert.size(); ++i)
        if (f[i] < f[arg])
            arg = i;
    return {vert[arg], std::isfinite(f[arg]) ? -f[arg] : -std::numeric_limits<double>::infinity()};
}

} // namespace detail

/// Maximizes `score` over the box: scrambled Sobol sweep of raw candidates, then simplex
/// refinement from the top_k of them. The result is never worse than the best raw candidate;
/// ties resolve to the earliest candidate.
template <typename Score>
OptimResult optimize_acquisition(Score&& score, const Box& box, const OptimBudget& budget, std::uint64_t seed,
                                 const std::string& name = "acquisition")
{
    box.require_nondegenerate("optimize_acquisition");
    budget.validate();
    const Eigen::Index d = box.dim();
    const Eigen::MatrixXd U = scrambled_sobol(d, budget.raw_candidates, seed);

    OptimResult out;
    std::vector<double> values(static_cast<std::size_t>(budget.raw_candidates));
    std::vector<Eigen::VectorXd> points(values.size());
    int non_finite = 0;
    for (Eigen::Index i = 0; i < budget.raw_candidates; ++i) {
        points[static_cast<std::size_t>(i)] = box.from_unit(U.row(i).transpose());
        const double v = score(points[static_cast<std::size_t>(i)]);
        ++out.evaluations;
        if (!std::isfinite(v)) {
            ++non_finite;
            values[static_cast<std::size_t>(i)] = -std::numeric_limits<double>::infinity();
        } else {
            values[static_cast<std::size_t>(i)] = v;
        }
    }
    if (2 * non_finite > budget.raw_candidates)
        throw NumericalError(name + ": score is non-finite at " + std::to_string(non_finite) + " of " +
                             std::to_string(budget.raw_candidates) + " raw candidates");

    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    out.x = points[order.front()];
    out.score = values[order.front()];
    out.raw_best = out.score;

    for (int k = 0; k < budget.top_k && budget.local_evals > 0; ++k) {
        const std::size_t idx = order[static_cast<std::size_t>(k)];
        if (!std::isfinite(values[idx]))
            break;
        auto [xr, vr] = detail::simplex_refine(score, box, points[idx], values[idx], budget.local_evals,
                                               out.evaluations);
        if (vr > out.score) {
            out.x = xr;
            out.score = vr;
        }
    }
    return out;
}

} // namespace figbo

#endif // FIGBO_ACQ_OPTIM_HPP
