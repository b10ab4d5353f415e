#ifndef FIGBO_BOX_HPP
#define FIGBO_BOX_HPP

#include <Eigen/Core>

#include <string>

#include "figbo/errors.hpp"

namespace figbo {

/// Axis-aligned search box [lower, upper] in input units.
struct Box {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Box() = default;
    Box(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi))
    {
        if (lower.size() != upper.size())
            throw InputError("box bounds have different dimensions");
        if (lower.size() < 1)
            throw InputError("box must have dimension >= 1");
        for (Eigen::Index i = 0; i < lower.size(); ++i) {
            if (!(lower[i] <= upper[i]))
                throw InputError("box lower bound exceeds upper bound in dimension " + std::to_string(i));
        }
    }

    static Box unit(Eigen::Index d)
    {
        return Box(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d));
    }

    Eigen::Index dim() const { return lower.size(); }
    Eigen::VectorXd width() const { return upper - lower; }

    bool degenerate() const { return (width().array() <= 0.0).any(); }

    bool contains(const Eigen::Ref<const Eigen::VectorXd>& x, double slack = 0.0) const
    {
        if (x.size() != dim())
            return false;
        return ((x.array() >= lower.array() - slack) && (x.array() <= upper.array() + slack)).all();
    }

    Eigen::VectorXd clip(const Eigen::Ref<const Eigen::VectorXd>& x) const
    {
        return x.cwiseMax(lower).cwiseMin(upper);
    }

    /// Maps a point of the unit cube onto the box.
    Eigen::VectorXd from_unit(const Eigen::Ref<const Eigen::VectorXd>& u) const
    {
        return lower + u.cwiseProduct(width());
    }

    void require_nondegenerate(const char* who) const
    {
        if (degenerate())
            throw InputError(std::string(who) + ": search box has zero width in some dimension");
    }
};

} // namespace figbo

#endif // FIGBO_BOX_HPP
