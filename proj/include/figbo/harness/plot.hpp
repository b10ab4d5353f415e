#ifndef FIGBO_HARNESS_PLOT_HPP
#define FIGBO_HARNESS_PLOT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "figbo/harness/csv.hpp"

namespace figbo::harness {

struct CellName {
    std::string task;
    std::string acq;
    std::string tail; // "aggregate" or the repetition index
};

/// Splits "{task}_{acq}_{tail}.csv"; nullopt for any other file name.
inline std::optional<CellName> parse_cell_file(const std::filesystem::path& p)
{
    if (p.extension() != ".csv")
        return std::nullopt;
    const std::string stem = p.stem().string();
    const auto a = stem.find('_');
    const auto b = stem.rfind('_');
    if (a == std::string::npos || a == b)
        return std::nullopt;
    CellName c{stem.substr(0, a), stem.substr(a + 1, b - a - 1), stem.substr(b + 1)};
    if (c.task.empty() || c.acq.empty() || c.tail.empty())
        return std::nullopt;
    if (c.tail != "aggregate" && !std::all_of(c.tail.begin(), c.tail.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
        return std::nullopt;
    return c;
}

struct PlotCurve {
    std::string task;
    std::string acq;
    AggregateCurve curve;
};

struct PlotInput {
    std::vector<PlotCurve> curves;   // sorted by task, then variant
    std::vector<std::string> skipped; // cells with runs but no aggregate
};

inline PlotInput collect_aggregates(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir))
        throw InputError("plot: '" + dir.string() + "' is not a directory");
    std::set<std::pair<std::string, std::string>> with_runs, with_agg;
    std::map<std::pair<std::string, std::string>, std::filesystem::path> agg_paths;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (!e.is_regular_file())
            continue;
        const auto c = parse_cell_file(e.path());
        if (!c)
            continue;
        if (c->tail == "aggregate") {
            with_agg.insert({c->task, c->acq});
            agg_paths[{c->task, c->acq}] = e.path();
        } else {
            with_runs.insert({c->task, c->acq});
        }
    }
    PlotInput in;
    for (const auto& key : with_runs)
        if (!with_agg.count(key))
            in.skipped.push_back(key.first + "/" + key.second);
    for (const auto& [key, path] : agg_paths)
        in.curves.push_back({key.first, key.second, read_aggregate_csv(path)});
    if (in.curves.empty())
        throw InputError("plot: no aggregate CSVs in '" + dir.string() + "'");
    return in;
}

namespace detail {

inline constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                     "#9467bd", "#8c564b", "#e377c2", "#17becf"};

inline std::string fmt_coord(double v)
{
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(2);
    s << v;
    return s.str();
}

} // namespace detail

/// Mean log10 regret per iteration with a +-1 standard error band; one panel per task and one
/// curve per variant. Each curve's exact values are kept in its data-y attribute.
inline std::string render_svg(const std::vector<PlotCurve>& curves)
{
    std::vector<std::string> tasks;
    for (const auto& c : curves)
        if (std::find(tasks.begin(), tasks.end(), c.task) == tasks.end())
            tasks.push_back(c.task);

    const double W = 760, H = 360, left = 70, right = 170, top = 40, bottom = 50;
    const double pw = W - left - right, ph = H - top - bottom;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H * static_cast<double>(tasks.size())
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const double oy = H * static_cast<double>(t);
        double lo = INFINITY, hi = -INFINITY;
        std::size_t len = 1;
        for (const auto& c : curves) {
            if (c.task != tasks[t])
                continue;
            len = std::max(len, c.curve.mean.size());
            for (std::size_t i = 0; i < c.curve.mean.size(); ++i) {
                lo = std::min(lo, c.curve.mean[i] - c.curve.std_error[i]);
                hi = std::max(hi, c.curve.mean[i] + c.curve.std_error[i]);
            }
        }
        if (!(hi > lo)) {
            lo -= 0.5;
            hi += 0.5;
        }
        auto X = [&](double it) { return left + pw * (len > 1 ? (it - 1.0) / static_cast<double>(len - 1) : 0.5); };
        auto Y = [&](double v) { return oy + top + ph * (hi - v) / (hi - lo); };

        svg << "<g class=\"panel\" data-task=\"" << tasks[t] << "\">\n";
        svg << "<text x=\"" << detail::fmt_coord(left + pw / 2) << "\" y=\"" << detail::fmt_coord(oy + 22)
            << "\" text-anchor=\"middle\" font-size=\"14\">" << tasks[t] << "</text>\n";
        svg << "<rect x=\"" << left << "\" y=\"" << detail::fmt_coord(oy + top) << "\" width=\"" << pw
            << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#444\"/>\n";
        for (int k = 0; k <= 4; ++k) {
            const double v = lo + (hi - lo) * k / 4.0;
            svg << "<text x=\"" << left - 6 << "\" y=\"" << detail::fmt_coord(Y(v) + 4)
                << "\" text-anchor=\"end\">" << detail::fmt_coord(v) << "</text>\n";
            const double it = 1.0 + (static_cast<double>(len) - 1.0) * k / 4.0;
            svg << "<text x=\"" << detail::fmt_coord(X(it)) << "\" y=\"" << detail::fmt_coord(oy + top + ph + 16)
                << "\" text-anchor=\"middle\">" << static_cast<long>(std::lround(it)) << "</text>\n";
        }
        svg << "<text x=\"" << detail::fmt_coord(left + pw / 2) << "\" y=\"" << detail::fmt_coord(oy + H - 10)
            << "\" text-anchor=\"middle\">iteration</text>\n";
        svg << "<text transform=\"translate(16," << detail::fmt_coord(oy + top + ph / 2)
            << ") rotate(-90)\" text-anchor=\"middle\">mean log10 regret</text>\n";

        std::size_t ci = 0;
        for (const auto& c : curves) {
            if (c.task != tasks[t])
                continue;
            const char* color = detail::kPalette[ci % detail::kPalette.size()];
            const auto& m = c.curve.mean;
            const auto& se = c.curve.std_error;
            std::ostringstream band, line, data;
            for (std::size_t i = 0; i < m.size(); ++i)
                band << (i ? " " : "") << detail::fmt_coord(X(static_cast<double>(i + 1))) << ","
                     << detail::fmt_coord(Y(m[i] + se[i]));
            for (std::size_t i = m.size(); i-- > 0;)
                band << " " << detail::fmt_coord(X(static_cast<double>(i + 1))) << "," << detail::fmt_coord(Y(m[i] - se[i]));
            for (std::size_t i = 0; i < m.size(); ++i) {
                line << (i ? " L" : "M") << detail::fmt_coord(X(static_cast<double>(i + 1))) << ","
                     << detail::fmt_coord(Y(m[i]));
                data << (i ? " " : "") << format_double(m[i]);
            }
            svg << "<polygon class=\"band\" data-variant=\"" << c.acq << "\" points=\"" << band.str() << "\" fill=\""
                << color << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
            svg << "<path class=\"curve\" data-task=\"" << c.task << "\" data-variant=\"" << c.acq << "\" data-y=\""
                << data.str() << "\" d=\"" << line.str() << "\" fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\"/>\n";
            const double ly = oy + top + 14 + 18 * static_cast<double>(ci);
            svg << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << detail::fmt_coord(ly - 4) << "\" x2=\""
                << left + pw + 32 << "\" y2=\"" << detail::fmt_coord(ly - 4) << "\" stroke=\"" << color
                << "\" stroke-width=\"2\"/>\n";
            svg << "<text x=\"" << left + pw + 38 << "\" y=\"" << detail::fmt_coord(ly) << "\">" << c.acq
                << "</text>\n";
            ++ci;
        }
        svg << "</g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace figbo::harness

#endif // FIGBO_HARNESS_PLOT_HPP
