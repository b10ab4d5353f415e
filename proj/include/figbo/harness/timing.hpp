#ifndef FIGBO_HARNESS_TIMING_HPP
#define FIGBO_HARNESS_TIMING_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "figbo/harness/csv.hpp"
#include "figbo/harness/plot.hpp"

namespace figbo::harness {

struct TimingStat {
    double mean = 0.0;
    double std = 0.0; // sample standard deviation over iterations
    long count = 0;
};

struct TimingTable {
    std::vector<std::string> tasks;
    std::vector<std::string> variants;
    std::map<std::pair<std::string, std::string>, TimingStat> cells;
};

inline TimingStat timing_stat(const std::vector<double>& v)
{
    TimingStat s;
    s.count = static_cast<long>(v.size());
    if (v.empty())
        return s;
    for (double x : v)
        s.mean += x;
    s.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v)
            ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return s;
}

/// Per-iteration acquisition time over every run CSV in dir, optionally only iterations
/// 1..max_iter.
inline TimingTable collect_timing(const std::filesystem::path& dir, int max_iter = 0)
{
    if (!std::filesystem::is_directory(dir))
        throw InputError("timing: '" + dir.string() + "' is not a directory");
    std::map<std::pair<std::string, std::string>, std::vector<double>> samples;
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file())
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        const auto c = parse_cell_file(p);
        if (!c || c->tail == "aggregate")
            continue;
        const RunRecord rec = read_run_csv(p);
        auto& v = samples[{c->task, c->acq}];
        for (const auto& r : rec.rows)
            if (max_iter <= 0 || r.iter <= max_iter)
                v.push_back(r.acq_time_s);
    }
    if (samples.empty())
        throw InputError("timing: no run CSVs in '" + dir.string() + "'");
    TimingTable t;
    for (const auto& [key, v] : samples) {
        if (std::find(t.tasks.begin(), t.tasks.end(), key.first) == t.tasks.end())
            t.tasks.push_back(key.first);
        if (std::find(t.variants.begin(), t.variants.end(), key.second) == t.variants.end())
            t.variants.push_back(key.second);
        t.cells[key] = timing_stat(v);
    }
    std::sort(t.variants.begin(), t.variants.end());
    return t;
}

/// Markdown table: one row per task, one column per variant, "mean ± std" seconds.
inline std::string format_timing_table(const TimingTable& t)
{
    std::ostringstream out;
    out << "| task |";
    for (const auto& v : t.variants)
        out << ' ' << v << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < t.variants.size(); ++i)
        out << "---|";
    out << '\n';
    char buf[64];
    for (const auto& task : t.tasks) {
        out << "| " << task << " |";
        for (const auto& v : t.variants) {
            const auto it = t.cells.find({task, v});
            if (it == t.cells.end()) {
                out << " - |";
                continue;
            }
            std::snprintf(buf, sizeof buf, " %.4f ± %.4f |", it->second.mean, it->second.std);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

} // namespace figbo::harness

#endif // FIGBO_HARNESS_TIMING_HPP
