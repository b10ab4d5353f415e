// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
//   figbo_acceptance [--out DIR] [--only 1,2,...] [--reps R] [--workers K]

#include <CLI11.hpp>

#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../reference_loop.hpp"
#include "../test_support.hpp"
#include "figbo/acquisition.hpp"
#include "figbo/global_gain.hpp"
#include "figbo/gp.hpp"
#include "figbo/harness/config.hpp"
#include "figbo/harness/csv.hpp"
#include "figbo/harness/runner.hpp"
#include "figbo/harness/timing.hpp"

using namespace figbo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0)
{
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(double v, const char* spec = "%.3g")
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

FittedGP random_gp(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d, KernelFamily fam, double noise)
{
    const KernelSpec k(fam, test::random_vector(rng, d, 0.15, 0.8), test::random_vector(rng, 1, 0.5, 4.0)[0]);
    return fit_gp(Dataset(test::random_points(rng, n, d), test::random_vector(rng, n)), k, NoiseSpec(noise));
}

// Gamma from the closed-form kernel and a dense LU solve of the augmented system.
double gamma_oracle(const Eigen::VectorXd& x, const McSampleSet& mc, const FittedGP& gp)
{
    const Eigen::Index n = gp.size();
    Eigen::MatrixXd Xa(n + 1, gp.dim());
    Xa.topRows(n) = gp.dataset().X;
    Xa.row(n) = x.transpose();
    Eigen::MatrixXd A = test::oracle_gram(gp.kernel(), Xa, Xa);
    A.diagonal().array() += gp.diagonal_term();
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    const Eigen::MatrixXd Kz = test::oracle_gram(gp.kernel(), mc.Z, Xa);
    double acc = 0.0;
    for (Eigen::Index l = 0; l < mc.size(); ++l) {
        const Eigen::VectorXd v = Kz.row(l).transpose();
        acc += v.dot(lu.solve(v));
    }
    return acc / static_cast<double>(mc.size());
}

Outcome criterion_gamma_oracle()
{
    const auto t0 = clock_type::now();
    std::mt19937_64 rng(20240601);
    const int Ls[3] = {1, 5, 100};
    double worst = 0.0, worst_ind = 0.0;
    int cases = 0;
    for (int c = 0; c < 200; ++c) {
        const Eigen::Index n = c % 16, d = 1 + (c / 3) % 4;
        const auto fam = c % 2 ? KernelFamily::Matern52 : KernelFamily::SquaredExponential;
        const double noise = test::random_vector(rng, 1, 1e-3, 1e-1)[0];
        const auto gp = random_gp(rng, n, d, fam, noise);
        const auto mc = draw_mc_samples(Box::unit(d), Ls[c % 3], rng());
        const auto cache = build_cache(gp, mc);
        const Eigen::VectorXd x = test::random_vector(rng, d, 0.0, 1.0);
        const double fast = gamma(x, cache);
        worst = std::max(worst, test::rel_err(fast, gamma_direct(x, mc, gp)));
        worst_ind = std::max(worst_ind, test::rel_err(fast, gamma_oracle(x, mc, gp)));
        ++cases;
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = cases == 200 && worst <= 1e-8 && worst_ind <= 1e-8 && secs < 10.0;
    o.detail = std::to_string(cases) + " cases, max rel err " + fmt(worst) + " (direct), " + fmt(worst_ind) +
               " (independent LU), " + fmt(secs, "%.2f") + " s";
    return o;
}

Outcome criterion_gp()
{
    const auto t0 = clock_type::now();
    std::mt19937_64 rng(77);
    double post_err = 0.0, interp_err = 0.0, grad_err = 0.0;
    for (int trial = 0; trial < 40; ++trial) {
        const Eigen::Index n = 1 + trial % 20, d = 1 + trial % 3;
        const auto fam = trial % 2 ? KernelFamily::Matern52 : KernelFamily::SquaredExponential;
        const KernelSpec k(fam, test::random_vector(rng, d, 0.2, 1.0), test::random_vector(rng, 1, 0.5, 3.0)[0]);
        const double noise = test::random_vector(rng, 1, 1e-3, 1e-1)[0];
        const Dataset data(test::random_points(rng, n, d), test::random_vector(rng, n));
        const auto gp = fit_gp(data, k, NoiseSpec(noise));
        Eigen::MatrixXd A = test::oracle_gram(k, data.X, data.X);
        A.diagonal().array() += gp.diagonal_term();
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        for (int p = 0; p < 10; ++p) {
            const Eigen::VectorXd x = test::random_vector(rng, d, 0.0, 1.0);
            const Eigen::VectorXd kx = test::oracle_gram(k, x.transpose(), data.X).transpose();
            const double m = kx.dot(lu.solve(data.y));
            const double v = test::oracle_kernel(k, x, x) - kx.dot(lu.solve(kx));
            const auto post = posterior(gp, x);
            post_err = std::max({post_err, std::abs(post.mean - m) / std::max(1.0, std::abs(m)),
                                 std::abs(post.variance - v) / std::max(1.0, std::abs(v))});
        }

        // noiseless interpolation on well-separated inputs
        Eigen::MatrixXd Xs(n, d);
        for (Eigen::Index i = 0; i < n; ++i)
            Xs.row(i) = Eigen::RowVectorXd::Constant(d, static_cast<double>(i) / 20.0);
        const KernelSpec ks(fam, Eigen::VectorXd::Constant(d, 0.05), 1.0);
        const Dataset exact(Xs, test::random_vector(rng, n));
        const auto gp0 = fit_gp(exact, ks, NoiseSpec(0.0));
        for (Eigen::Index i = 0; i < n; ++i)
            interp_err = std::max(interp_err, std::abs(posterior(gp0, Xs.row(i).transpose()).mean - exact.y[i]));

        // log marginal likelihood gradient against central differences
        const auto gpl = fit_gp(data, k, NoiseSpec(noise, true));
        const auto lml = log_marginal_likelihood(gpl);
        Eigen::VectorXd theta(d + 2);
        theta << k.length_scales.array().log(), std::log(k.signal_variance), std::log(noise);
        for (Eigen::Index j = 0; j < d + 2; ++j) {
            auto at = [&](double h) {
                Eigen::VectorXd t = theta;
                t[j] += h;
                const KernelSpec kk(fam, t.head(d).array().exp(), std::exp(t[d]));
                return log_marginal_likelihood(fit_gp(data, kk, NoiseSpec(std::exp(t[d + 1]), true))).value;
            };
            const double h = 1e-5;
            const double fd = (at(h) - at(-h)) / (2 * h);
            grad_err = std::max(grad_err, std::abs(lml.gradient[j] - fd) / std::max(1.0, std::abs(fd)));
        }
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = post_err <= 1e-8 && interp_err <= 1e-9 && grad_err <= 1e-4 && secs < 10.0;
    o.detail = "posterior err " + fmt(post_err) + ", interpolation err " + fmt(interp_err) + ", LML gradient err " +
               fmt(grad_err) + ", " + fmt(secs, "%.2f") + " s";
    return o;
}

Outcome criterion_ei_mc()
{
    const auto t0 = clock_type::now();
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> um(-2.0, 2.0), us(0.1, 2.0);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const double mu = um(rng), sd = us(rng), f_star = um(rng);
        std::normal_distribution<double> nd(mu, sd);
        double acc = 0.0;
        for (int i = 0; i < 1000000; ++i)
            acc += std::max(f_star - nd(rng), 0.0);
        worst = std::max(worst, std::abs(ei_score(mu, sd, f_star) - acc / 1e6));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-2 && secs < 30.0,
            "50 triples x 1e6 draws, max abs err " + fmt(worst) + ", " + fmt(secs, "%.2f") + " s"};
}

Outcome criterion_decay()
{
    const auto t0 = clock_type::now();
    const double eta = 20.0;
    std::mt19937_64 rng(99);
    const KernelSpec k = KernelSpec::isotropic(KernelFamily::SquaredExponential, 2, 0.2, 1.0);
    const auto mc = draw_mc_samples(Box::unit(2), 100, 5);
    const Eigen::MatrixXd cands = test::random_points(rng, 1000, 2);
    bool ok = true;
    double cap = 0.0;
    std::string detail;
    for (int n : {1, 10, 100, 1000}) {
        const Eigen::MatrixXd X = test::random_points(rng, n, 2);
        const auto gp = fit_gp(Dataset(X, test::random_vector(rng, n)), k, NoiseSpec(0.01));
        const auto cache = build_cache(gp, mc);
        cap = cache.prior_cap();
        double gmax = 0.0;
        for (Eigen::Index i = 0; i < cands.rows(); ++i)
            gmax = std::max(gmax, gamma(cands.row(i).transpose(), cache));
        const double term = lambda_coeff(eta, n) * gmax;
        const double bound = eta * cap / n;
        ok = ok && term <= bound * (1.0 + 1e-12);
        detail += "n=" + std::to_string(n) + ": " + fmt(term) + "<=" + fmt(bound) + "; ";
    }
    const double secs = seconds_since(t0);
    ok = ok && secs < 60.0;
    return {ok, detail + "cap " + fmt(cap) + ", " + fmt(secs, "%.2f") + " s"};
}

Outcome criterion_reduction()
{
    const auto t0 = clock_type::now();
    int traces = 0, identical = 0;
    for (const char* v : {"ei", "ucb", "pi"}) {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            RunConfig cfg;
            cfg.task_id = "branin";
            cfg.acquisition = parse_variant(v);
            cfg.acquisition.pi_xi = 0.1;
            cfg.iterations = 15;
            cfg.seed = seed;
            cfg.record_timing = false;
            const auto task = make_task("branin");
            const auto a = run_bo(cfg, task);
            const auto b = test::reference_myopic_run(cfg, task);
            bool same = a.rows.size() == b.rows.size();
            for (std::size_t i = 0; same && i < a.rows.size(); ++i)
                same = a.rows[i].x == b.rows[i].x && a.rows[i].y == b.rows[i].y &&
                       a.rows[i].best_y == b.rows[i].best_y && a.rows[i].regret == b.rows[i].regret;
            ++traces;
            identical += same;
        }
    }
    const double secs = seconds_since(t0);
    return {identical == traces && secs < 60.0, std::to_string(identical) + "/" + std::to_string(traces) +
                                                    " traces bit-identical to a plain myopic loop, " +
                                                    fmt(secs, "%.1f") + " s"};
}

harness::ExperimentConfig suite(const std::vector<harness::Cell>& cells, int reps, const fs::path& dir, bool timing,
                                int workers)
{
    harness::ExperimentConfig c;
    c.cells = cells;
    c.N = 200;
    c.reps = reps;
    c.L = 100;
    c.seed = 2025;
    c.output_dir = dir.string();
    c.timing = timing;
    c.workers = workers;
    return c;
}

double final_regret(const RunRecord& r)
{
    return r.rows.back().regret;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance checks"};
    std::string out = "acceptance_runs", only;
    int reps = 20, workers = 1;
    app.add_option("--out", out, "Directory for suite outputs");
    app.add_option("--only", only, "Comma-separated criterion numbers");
    app.add_option("--reps", reps, "Repetitions for the suite criteria (20 gates)");
    app.add_option("--workers", workers, "Worker threads for the suites");
    CLI11_PARSE(app, argc, argv);

    std::set<int> selected;
    {
        std::stringstream ss(only);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty())
                selected.insert(std::stoi(tok));
    }
    auto want = [&](int c) { return selected.empty() || selected.count(c); };
    const std::string note = reps == 20 ? "" : " [reduced reps: " + std::to_string(reps) + "]";

    int failures = 0;
    auto report = [&](int id, const std::string& name, const Outcome& o) {
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << name << ": " << o.detail << '\n'
                  << std::flush;
        failures += !o.pass;
    };
    auto guarded = [&](int id, const std::string& name, const std::function<Outcome()>& fn) {
        if (!want(id))
            return;
        try {
            report(id, name, fn());
        } catch (const std::exception& e) {
            report(id, name, {false, std::string("exception: ") + e.what()});
        }
    };

    guarded(1, "global gain fast path vs dense oracle", criterion_gamma_oracle);
    guarded(2, "GP posterior, interpolation and likelihood gradient", criterion_gp);
    guarded(3, "expected improvement vs Monte-Carlo oracle", criterion_ei_mc);
    guarded(4, "look-ahead term decays as 1/n", criterion_decay);
    guarded(5, "disabled look-ahead reproduces myopic traces", criterion_reduction);

    const fs::path root(out);
    const fs::path branin_dir = root / "branin", prior_dir = root / "gp-prior-2d";
    std::optional<harness::SuiteResult> branin, prior;
    std::string branin_error, prior_error;

    if (want(6) || want(9) || want(10)) {
        const auto t0 = clock_type::now();
        try {
            branin = harness::run_suite(suite({{"branin", "ei"},
                                               {"branin", "figbo-ei"},
                                               {"branin", "pi"},
                                               {"branin", "figbo-pi"},
                                               {"branin", "ucb"},
                                               {"branin", "figbo-ucb"}},
                                              reps, branin_dir, false, workers));
        } catch (const std::exception& e) {
            branin_error = e.what();
        }
        std::cerr << "branin suite: " << fmt(seconds_since(t0), "%.0f") << " s\n";
    }
    auto medians = [&](const std::string& acq) {
        std::vector<double> v;
        for (const auto& r : branin->records.at({"branin", acq}))
            v.push_back(final_regret(r));
        return median(v);
    };

    guarded(6, "Branin: look-ahead EI median final regret", [&]() -> Outcome {
        if (!branin)
            return {false, "suite failed: " + branin_error};
        const double f = medians("figbo-ei"), e = medians("ei");
        return {f <= e && f <= 1e-2, "median final regret figbo-ei " + fmt(f) + " vs ei " + fmt(e) + " (limit 1e-2)" + note};
    });

    if (want(7) || want(8) || want(10)) {
        const auto t0 = clock_type::now();
        try {
            prior = harness::run_suite(
                suite({{"gp-prior-2d", "ei"}, {"gp-prior-2d", "figbo-ei"}}, reps, prior_dir, true, workers));
        } catch (const std::exception& e) {
            prior_error = e.what();
        }
        std::cerr << "gp-prior-2d suite: " << fmt(seconds_since(t0), "%.0f") << " s\n";
    }

    guarded(7, "2D GP prior: look-ahead EI area under log-regret curve", [&]() -> Outcome {
        if (!prior)
            return {false, "suite failed: " + prior_error};
        const auto& a = prior->records.at({"gp-prior-2d", "figbo-ei"});
        const auto& b = prior->records.at({"gp-prior-2d", "ei"});
        int wins = 0;
        for (std::size_t r = 0; r < a.size(); ++r) {
            double sa = 0.0, sb = 0.0;
            for (const auto& row : a[r].rows)
                sa += row.log_regret;
            for (const auto& row : b[r].rows)
                sb += row.log_regret;
            wins += sa <= sb;
        }
        const int need = (12 * static_cast<int>(a.size()) + 19) / 20;
        return {wins >= need, "figbo-ei area <= ei area in " + std::to_string(wins) + "/" + std::to_string(a.size()) +
                                  " seeds (need " + std::to_string(need) + ")" + note};
    });

    guarded(8, "acquisition time overhead ratio at n <= 50", [&]() -> Outcome {
        if (!prior)
            return {false, "suite failed: " + prior_error};
        const auto t = harness::collect_timing(prior_dir, 50);
        const double f = t.cells.at({"gp-prior-2d", "figbo-ei"}).mean, e = t.cells.at({"gp-prior-2d", "ei"}).mean;
        return {e > 0.0 && f / e <= 4.0, "mean per-iteration time figbo-ei " + fmt(f) + " s / ei " + fmt(e) +
                                             " s = " + fmt(f / e) + " (limit 4)"};
    });

    guarded(9, "Branin: look-ahead PI and UCB median final regret", [&]() -> Outcome {
        if (!branin)
            return {false, "suite failed: " + branin_error};
        const double fp = medians("figbo-pi"), p = medians("pi"), fu = medians("figbo-ucb"), u = medians("ucb");
        return {fp <= p && fu <= u, "figbo-pi " + fmt(fp) + " vs pi " + fmt(p) + "; figbo-ucb " + fmt(fu) +
                                        " vs ucb " + fmt(u) + note};
    });

    guarded(10, "rerun from manifest is byte-identical", [&]() -> Outcome {
        if (!branin || !prior)
            return {false, "suites did not complete"};
        int files = 0, identical = 0, timed_rows = 0, timed_same = 0;
        // untimed suite: whole files
        {
            std::ifstream mf(branin_dir / "manifest.json");
            nlohmann::json m;
            mf >> m;
            auto cfg = harness::parse_config(m);
            cfg.cells = {{"branin", "figbo-ei"}, {"branin", "ucb"}};
            cfg.output_dir = (root / "rerun-branin").string();
            cfg.workers = 1;
            harness::SuiteOptions opt;
            opt.only_reps = {0, std::min(reps - 1, 7)};
            harness::run_suite(cfg, opt);
            for (const auto& c : cfg.cells)
                for (int r : opt.only_reps) {
                    const auto name = harness::run_file_name(c.task, c.acq, r);
                    ++files;
                    identical += slurp(branin_dir / name) == slurp(root / "rerun-branin" / name);
                }
        }
        // timed suite: every column except the wall-clock one
        {
            std::ifstream mf(prior_dir / "manifest.json");
            nlohmann::json m;
            mf >> m;
            auto cfg = harness::parse_config(m);
            cfg.cells = {{"gp-prior-2d", "figbo-ei"}};
            cfg.output_dir = (root / "rerun-prior").string();
            harness::SuiteOptions opt;
            opt.only_reps = {0};
            harness::run_suite(cfg, opt);
            const auto name = harness::run_file_name("gp-prior-2d", "figbo-ei", 0);
            const auto a = harness::read_run_csv(prior_dir / name), b = harness::read_run_csv(root / "rerun-prior" / name);
            for (std::size_t i = 0; i < std::min(a.rows.size(), b.rows.size()); ++i) {
                ++timed_rows;
                timed_same += a.rows[i].x == b.rows[i].x && a.rows[i].y == b.rows[i].y &&
                              a.rows[i].best_y == b.rows[i].best_y && a.rows[i].regret == b.rows[i].regret &&
                              a.rows[i].log_regret == b.rows[i].log_regret;
            }
            timed_same -= a.rows.size() != b.rows.size();
        }
        return {files > 0 && identical == files && timed_rows > 0 && timed_same == timed_rows,
                std::to_string(identical) + "/" + std::to_string(files) + " CSVs byte-identical; " +
                    std::to_string(timed_same) + "/" + std::to_string(timed_rows) +
                    " timed rows identical apart from wall time"};
    });

    std::cout << (failures ? "acceptance: " + std::to_string(failures) + " criterion(s) failed\n"
                           : std::string("acceptance: all selected criteria passed\n"));
    return failures ? 1 : 0;
}
