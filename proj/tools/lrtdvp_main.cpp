// Batch driver: declarative run configurations in, CSV/JSON artifacts out.
// Subcommands: run (one integration), sweep (one parameter, many values),
// compare (two record files, max deviations and optional state overlap).

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sys/resource.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "lrt/baseline.hpp"
#include "lrt/config.hpp"
#include "lrt/oracle.hpp"
#include "lrt/rank_adapt.hpp"
#include "lrt/tdvp.hpp"
#include "lrt/textio.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

long peak_rss_kb() {
    rusage ru{};
    if (getrusage(RUSAGE_SELF, &ru) != 0) return 0;
    return ru.ru_maxrss;
}

nlohmann::json tree_to_json(const lrt::ConfigNode& n) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, e] : n.values) j[k] = e.value;
    for (const auto& [k, s] : n.sections) j[k] = tree_to_json(s);
    return j;
}

struct RunResult {
    lrt::RunRecord rec;
    std::vector<std::string> outputs;
    std::string error;  // non-empty when the engine threw before producing rows
};

// One full integration with all its artifacts. Never throws for runtime
// problems; those land in the returned record/error so sweeps can continue.
RunResult execute_run(const lrt::ConfigNode& tree, const lrt::RunSetup& setup,
                      const std::filesystem::path& outdir) {
    namespace fs = std::filesystem;
    RunResult result;
    lrt::RunRecord& rec = result.rec;

    lrt::LowRankState state = setup.bundle.init;
    lrt::CMat rho_final;
    double t_final = setup.solver.t1;
    try {
        if (setup.engine == "oracle") {
            rho_final = setup.bundle.dense_initial(setup.solver.dense_limit);
            rec = lrt::integrate_dense(rho_final, setup.bundle.model, setup.solver,
                                       setup.observables);
        } else if (setup.engine == "baseline") {
            rec = lrt::run_truncation(state, setup.bundle.model, setup.solver, setup.baseline_dt,
                                      setup.baseline_eps, setup.baseline_M_min,
                                      setup.baseline_M_max, setup.observables);
        } else if (setup.rank_adaptive) {
            rec = lrt::supervise(state, setup.bundle.model, setup.solver, setup.policy,
                                 setup.observables);
        } else {
            rec = lrt::integrate(state, setup.bundle.model, setup.solver, setup.observables);
        }
    } catch (const std::exception& e) {
        result.error = e.what();
        rec.status = -1;
        rec.message = e.what();
    }
    if (!rec.rows.empty()) t_final = rec.rows.back().t;

    fs::create_directories(outdir);
    auto open_out = [&](const std::string& name) {
        result.outputs.push_back(name);
        return std::ofstream(outdir / name);
    };

    if (result.error.empty()) {
        {
            std::ofstream os = open_out(setup.prefix + ".csv");
            rec.write_csv(os);
        }
        if (setup.engine == "lrtdvp" && setup.rank_adaptive) {
            std::ofstream os = open_out(setup.prefix + "_events.csv");
            rec.write_events_csv(os);
        }
        if (setup.engine == "lrtdvp" && setup.solver.record_chi_trace) {
            std::ofstream os = open_out(setup.prefix + "_chi.csv");
            rec.write_chi_csv(os);
        }
        if (setup.write_final_state) {
            std::ofstream os = open_out(setup.prefix + "_state.txt");
            if (setup.engine == "oracle") {
                os << "dense-state 1\n"
                   << lrt::fmt17(t_final) << ' ' << rho_final.rows() << ' ' << rho_final.cols()
                   << '\n';
                lrt::write_cmat_text(os, rho_final);
            } else {
                lrt::write_state_text(os, state, t_final);
            }
        }
    }

    nlohmann::json meta;
    meta["engine"] = setup.engine;
    meta["seed"] = setup.seed;
    meta["config"] = tree_to_json(tree);
    meta["status"] = rec.status;
    meta["aborted"] = rec.status != 0;
    meta["message"] = rec.message;
    meta["wall_seconds"] = rec.wall_seconds;
    meta["counters"] = {{"n_rhs", rec.n_rhs},
                        {"n_accept", rec.n_accept},
                        {"n_reject", rec.n_reject},
                        {"n_gram_refresh", rec.n_gram_refresh},
                        {"n_rewinds", rec.n_rewinds},
                        {"peak_rank", rec.peak_rank},
                        {"max_gram_drift", rec.max_gram_drift},
                        {"discarded_total", rec.discarded_total},
                        {"peak_state_bytes", rec.peak_state_bytes},
                        {"rank_events", rec.events.size()}};
    meta["peak_rss_kb"] = peak_rss_kb();
    meta["versions"] = {{"artifact", kVersion}, {"compiler", __VERSION__}, {"record_format", 1}};
    meta["outputs"] = result.outputs;
    {
        std::ofstream os = open_out(setup.prefix + "_meta.json");
        os << meta.dump(2) << '\n';
    }
    return result;
}

int cmd_run(const std::string& config_path, const std::string& engine_override,
            const std::string& outdir, long seed_override, bool quiet) {
    lrt::ConfigNode tree;
    lrt::RunSetup setup;
    try {
        tree = lrt::parse_config_file(config_path);
        if (!engine_override.empty()) tree.set_path("engine", engine_override);
        if (seed_override >= 0) tree.set_path("seed", std::to_string(seed_override));
        if (lrt::read_sweep_spec(tree).active) {
            std::cerr << "config error: this file declares a sweep; use the sweep command\n";
            return 2;
        }
        setup = lrt::load_run_setup(tree);
        tree.check_all_used();
    } catch (const lrt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << " (" << config_path << ":" << e.line
                  << ")\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << " (" << config_path << ")\n";
        return 2;
    }

    const RunResult r = execute_run(tree, setup, outdir);
    if (!r.error.empty()) {
        std::cerr << "run aborted: " << r.error << "\n";
        return 3;
    }
    if (!quiet)
        std::cout << setup.prefix << ": status " << r.rec.status << ", rows " << r.rec.rows.size()
                  << ", peak rank " << r.rec.peak_rank << ", wall "
                  << lrt::fmt17(r.rec.wall_seconds) << "s\n";
    if (r.rec.status != 0) {
        std::cerr << "run aborted (status " << r.rec.status << "): " << r.rec.message
                  << "; partial outputs are flagged in " << setup.prefix << "_meta.json\n";
        return 3;
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& engine_override,
              const std::string& outdir, long seed_override, unsigned workers, bool quiet) {
    lrt::ConfigNode tree;
    lrt::SweepSpec spec;
    try {
        tree = lrt::parse_config_file(config_path);
        if (!engine_override.empty()) tree.set_path("engine", engine_override);
        if (seed_override >= 0) tree.set_path("seed", std::to_string(seed_override));
        spec = lrt::read_sweep_spec(tree);
        if (!spec.active) {
            std::cerr << "config error: no sweep section in " << config_path << "\n";
            return 2;
        }
        // validate every point up front so a bad value fails before any work
        for (const std::string& v : spec.values) {
            lrt::ConfigNode probe = tree;
            probe.set_path(spec.parameter, v);
            lrt::load_run_setup(probe);
            probe.check_all_used();
        }
    } catch (const lrt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << " (" << config_path << ":" << e.line
                  << ")\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << " (" << config_path << ")\n";
        return 2;
    }

    const std::string base_prefix = [&] {
        lrt::ConfigNode probe = tree;
        probe.set_path(spec.parameter, spec.values.front());
        return lrt::load_run_setup(probe).prefix;
    }();

    struct Point {
        std::string value;
        std::string prefix;
        RunResult result;
        lrt::RunSetup setup;
    };
    std::vector<Point> points(spec.values.size());

#ifdef _OPENMP
    if (workers > 1) omp_set_num_threads(1);  // parallelism lives at the sweep level
#endif

    std::atomic<std::size_t> cursor{0};
    std::mutex io_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= points.size()) return;
            Point& pt = points[i];
            pt.value = spec.values[i];
            lrt::ConfigNode local = tree;
            local.set_path(spec.parameter, pt.value);
            pt.setup = lrt::load_run_setup(local);
            char tag[32];
            std::snprintf(tag, sizeof tag, "_%03zu", i);
            pt.setup.prefix = base_prefix + tag;
            pt.prefix = pt.setup.prefix;
            pt.setup.seed += i;  // decorrelate random draws across points
            pt.setup.policy.seed = pt.setup.seed;
            pt.result = execute_run(local, pt.setup, outdir);
            if (!quiet) {
                std::lock_guard<std::mutex> lock(io_mutex);
                std::cout << pt.prefix << " (" << spec.parameter << " = " << pt.value
                          << "): status " << pt.result.rec.status << "\n";
            }
        }
    };
    const unsigned n_workers = std::max(1u, std::min<unsigned>(workers, points.size()));
    if (n_workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (std::thread& th : pool) th.join();
    }

    // merged summary, strictly in parameter order
    namespace fs = std::filesystem;
    fs::create_directories(outdir);
    std::ofstream os(fs::path(outdir) / (base_prefix + "_sweep.csv"));
    os << "index," << spec.parameter << ",status,final_t,final_rank,entropy";
    std::vector<std::string> names;
    for (const auto& o : points.front().setup.observables) names.push_back(o.name);
    for (const std::string& n : names) os << ',' << n;
    os << '\n';
    bool all_ok = true;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Point& pt = points[i];
        const lrt::RunRecord& rec = pt.result.rec;
        const bool ok = pt.result.error.empty() && rec.status == 0 && !rec.rows.empty();
        all_ok = all_ok && ok;
        os << i << ',' << pt.value << ',' << (pt.result.error.empty() ? rec.status : -1);
        if (!rec.rows.empty()) {
            const lrt::RunRecord::Row& last = rec.rows.back();
            os << ',' << lrt::fmt17(last.t) << ',' << last.rank << ','
               << lrt::fmt17(last.entropy);
            for (double v : last.obs) os << ',' << lrt::fmt17(v);
        } else {
            for (std::size_t k = 0; k < 3 + names.size(); ++k) os << ',';
        }
        os << '\n';
    }
    os.close();
    if (!quiet) std::cout << "sweep summary: " << base_prefix << "_sweep.csv\n";
    return all_ok ? 0 : 3;
}

lrt::CMat read_any_state(const std::string& path, double& t, std::size_t dense_limit) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open state file '" + path + "'");
    std::string kind;
    is >> kind;
    if (kind == "dense-state") {
        int version = 0;
        std::size_t rows = 0, cols = 0;
        is >> version >> t >> rows >> cols;
        if (!is || version != 1) throw std::runtime_error("unsupported state file " + path);
        return lrt::read_cmat_text(is, rows, cols);
    }
    is.seekg(0);
    lrt::LowRankState st;
    t = lrt::read_state_text(is, st);
    return lrt::reconstruct_dense(st, dense_limit);
}

int cmd_compare(const std::string& path_a, const std::string& path_b, double tol,
                bool interpolate, const std::string& state_a, const std::string& state_b,
                std::size_t dense_limit) {
    lrt::RunRecord A, B;
    try {
        std::ifstream fa(path_a), fb(path_b);
        if (!fa) throw std::runtime_error("cannot open " + path_a);
        if (!fb) throw std::runtime_error("cannot open " + path_b);
        A = lrt::read_record_csv(fa);
        B = lrt::read_record_csv(fb);
    } catch (const std::exception& e) {
        std::cerr << "compare error: " << e.what() << "\n";
        return 2;
    }
    if (A.rows.empty() || B.rows.empty()) {
        std::cerr << "compare error: empty record\n";
        return 2;
    }

    bool aligned = A.rows.size() == B.rows.size();
    if (aligned)
        for (std::size_t i = 0; i < A.rows.size(); ++i)
            aligned = aligned && std::abs(A.rows[i].t - B.rows[i].t) <=
                                     1e-9 * std::max(1.0, std::abs(A.rows[i].t));
    if (!aligned && !interpolate) {
        std::cerr << "compare error: sample grids differ; pass --interpolate to resample\n";
        return 2;
    }

    // values of B's observable `kb` on A's time grid
    auto b_on_grid = [&](std::size_t kb, std::size_t ia) -> double {
        if (aligned) return B.rows[ia].obs[kb];
        const double t = A.rows[ia].t;
        if (t < B.rows.front().t - 1e-12 || t > B.rows.back().t + 1e-12)
            return std::numeric_limits<double>::quiet_NaN();
        std::size_t hi = 1;
        while (hi < B.rows.size() && B.rows[hi].t < t) ++hi;
        if (hi == B.rows.size()) return B.rows.back().obs[kb];
        const double t0 = B.rows[hi - 1].t, t1 = B.rows[hi].t;
        const double w = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
        return (1.0 - w) * B.rows[hi - 1].obs[kb] + w * B.rows[hi].obs[kb];
    };

    std::printf("%-16s %14s %8s %8s\n", "observable", "max_abs_diff", "samples", "skipped");
    bool pass = true;
    for (std::size_t ka = 0; ka < A.obs_names.size(); ++ka) {
        std::size_t kb = B.obs_names.size();
        for (std::size_t j = 0; j < B.obs_names.size(); ++j)
            if (B.obs_names[j] == A.obs_names[ka]) kb = j;
        if (kb == B.obs_names.size()) continue;
        double worst = 0.0;
        std::size_t used = 0, skipped = 0;
        for (std::size_t i = 0; i < A.rows.size(); ++i) {
            const double a = A.rows[i].obs[ka];
            const double b = b_on_grid(kb, i);
            if (std::isnan(a) || std::isnan(b)) {
                ++skipped;
                continue;
            }
            worst = std::max(worst, std::abs(a - b));
            ++used;
        }
        pass = pass && worst <= tol;
        std::printf("%-16s %14.6e %8zu %8zu\n", A.obs_names[ka].c_str(), worst, used, skipped);
    }

    if (!state_a.empty() && !state_b.empty()) {
        try {
            double ta = 0.0, tb = 0.0;
            const lrt::CMat ra = read_any_state(state_a, ta, dense_limit);
            const lrt::CMat rb = read_any_state(state_b, tb, dense_limit);
            std::printf("final-state overlap: %.10f (t = %g, %g)\n", lrt::overlap(ra, rb), ta,
                        tb);
        } catch (const std::exception& e) {
            std::cerr << "compare error: " << e.what() << "\n";
            return 2;
        }
    }
    std::printf("%s (tol %g)\n", pass ? "PASS" : "FAIL", tol);
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"low-rank Lindblad master equation driver"};
    app.require_subcommand(1);

    std::string config_path, engine_override, outdir = ".";
    long seed_override = -1;
    unsigned workers = 1;
    bool quiet = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "run configuration file")->required();
        cmd->add_option("--engine", engine_override, "override the engine")
            ->check(CLI::IsMember({"lrtdvp", "oracle", "baseline"}));
        cmd->add_option("--output-dir", outdir, "directory for artifacts");
        cmd->add_option("--seed", seed_override, "override the run seed");
        cmd->add_option("--workers", workers, "worker threads (sweep only)");
        cmd->add_flag("--quiet", quiet, "suppress progress lines");
    };
    CLI::App* run_cmd = app.add_subcommand("run", "execute one configuration");
    add_common(run_cmd);
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "execute a one-parameter scan");
    add_common(sweep_cmd);

    std::string path_a, path_b, state_a, state_b;
    double tol = 1e-6;
    bool interpolate = false;
    std::size_t dense_limit = 4096;
    CLI::App* cmp_cmd = app.add_subcommand("compare", "diff two record CSVs");
    cmp_cmd->add_option("a", path_a, "first record")->required();
    cmp_cmd->add_option("b", path_b, "second record")->required();
    cmp_cmd->add_option("--tol", tol, "per-observable pass threshold");
    cmp_cmd->add_flag("--interpolate", interpolate, "resample b onto a's grid");
    cmp_cmd->add_option("--state-a", state_a, "state dump for a");
    cmp_cmd->add_option("--state-b", state_b, "state dump for b");
    cmp_cmd->add_option("--dense-limit", dense_limit, "largest dense dimension to reconstruct");

    CLI11_PARSE(app, argc, argv);

    if (app.got_subcommand(run_cmd))
        return cmd_run(config_path, engine_override, outdir, seed_override, quiet);
    if (app.got_subcommand(sweep_cmd))
        return cmd_sweep(config_path, engine_override, outdir, seed_override, workers, quiet);
    return cmd_compare(path_a, path_b, tol, interpolate, state_a, state_b, dense_limit);
}
