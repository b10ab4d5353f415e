#ifndef FIGBO_HARNESS_CSV_HPP
#define FIGBO_HARNESS_CSV_HPP

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "figbo/bo_engine.hpp"
#include "figbo/errors.hpp"

namespace figbo::harness {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& where)
{
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw InputError(where + ": not a number '" + s + "'");
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string run_csv_header(Eigen::Index d)
{
    std::string h = "iter";
    for (Eigen::Index j = 0; j < d; ++j)
        h += ",x" + std::to_string(j);
    return h + ",y,best_y,regret,log_regret,acq_time_s";
}

inline void write_run_csv(std::ostream& out, const RunRecord& rec)
{
    out << run_csv_header(rec.dim) << '\n';
    for (const auto& r : rec.rows) {
        out << r.iter;
        for (Eigen::Index j = 0; j < r.x.size(); ++j)
            out << ',' << format_double(r.x[j]);
        out << ',' << format_double(r.y) << ',' << format_double(r.best_y) << ',' << format_double(r.regret) << ','
            << format_double(r.log_regret) << ',' << format_double(r.acq_time_s) << '\n';
    }
}

/// Rows of a run CSV. Task and variant are not stored in the file and stay empty.
inline RunRecord read_run_csv(std::istream& in, const std::string& name = "run csv")
{
    std::string line;
    if (!std::getline(in, line))
        throw InputError(name + ": empty file");
    const auto head = split_csv_line(line);
    const auto ncol = head.size();
    if (ncol < 7 || head.front() != "iter")
        throw InputError(name + ": unexpected header");
    RunRecord rec;
    rec.dim = static_cast<Eigen::Index>(ncol - 6);
    if (line != run_csv_header(rec.dim))
        throw InputError(name + ": unexpected header '" + line + "'");
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const auto f = split_csv_line(line);
        const auto where = name + ":" + std::to_string(lineno);
        if (f.size() != ncol)
            throw InputError(where + ": expected " + std::to_string(ncol) + " fields");
        RunRow r;
        r.iter = static_cast<int>(parse_double(f[0], where));
        r.x.resize(rec.dim);
        for (Eigen::Index j = 0; j < rec.dim; ++j)
            r.x[j] = parse_double(f[static_cast<std::size_t>(1 + j)], where);
        const auto base = static_cast<std::size_t>(1 + rec.dim);
        r.y = parse_double(f[base], where);
        r.best_y = parse_double(f[base + 1], where);
        r.regret = parse_double(f[base + 2], where);
        r.log_regret = parse_double(f[base + 3], where);
        r.acq_time_s = parse_double(f[base + 4], where);
        rec.rows.push_back(std::move(r));
    }
    return rec;
}

inline RunRecord read_run_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open '" + path.string() + "'");
    return read_run_csv(in, path.string());
}

inline const char* kAggregateHeader = "iter,mean_log_regret,stderr_log_regret,reps";

inline void write_aggregate_csv(std::ostream& out, const AggregateCurve& agg)
{
    out << kAggregateHeader << '\n';
    for (std::size_t i = 0; i < agg.mean.size(); ++i)
        out << (i + 1) << ',' << format_double(agg.mean[i]) << ',' << format_double(agg.std_error[i]) << ','
            << agg.reps << '\n';
}

inline AggregateCurve read_aggregate_csv(std::istream& in, const std::string& name = "aggregate csv")
{
    std::string line;
    if (!std::getline(in, line) || line != kAggregateHeader)
        throw InputError(name + ": unexpected header");
    AggregateCurve agg;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const auto f = split_csv_line(line);
        const auto where = name + ":" + std::to_string(lineno);
        if (f.size() != 4)
            throw InputError(where + ": expected 4 fields");
        agg.mean.push_back(parse_double(f[1], where));
        agg.std_error.push_back(parse_double(f[2], where));
        agg.reps = static_cast<int>(parse_double(f[3], where));
    }
    return agg;
}

inline AggregateCurve read_aggregate_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open '" + path.string() + "'");
    return read_aggregate_csv(in, path.string());
}

inline std::string run_file_name(const std::string& task, const std::string& acq, int rep)
{
    return task + "_" + acq + "_" + std::to_string(rep) + ".csv";
}

inline std::string aggregate_file_name(const std::string& task, const std::string& acq)
{
    return task + "_" + acq + "_aggregate.csv";
}

/// Writes through a temporary file so that a reader never sees a half-written CSV.
template <typename Writer>
void write_file_atomically(const std::filesystem::path& path, Writer&& writer)
{
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw InputError("cannot write '" + tmp.string() + "'");
        writer(out);
        out.flush();
        if (!out)
            throw InputError("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

} // namespace figbo::harness

#endif // FIGBO_HARNESS_CSV_HPP
