// Command-line driver: nominal solves, single closed-loop runs, estimation
// replay, interval projection and the Monte-Carlo controller comparison.
// Exit codes: 0 success, 2 partial failures, 3 config/usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "difc/config.hpp"
#include "difc/harness.hpp"

namespace fs = std::filesystem;
using namespace difc;

namespace {

std::ofstream open_out(const fs::path& p) {
    fs::create_directories(p.parent_path().empty() ? "." : p.parent_path());
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
}

GammaParams parse_gamma(const std::vector<double>& v, const config::Settings& s) {
    if (v.empty()) return s.prior.mid();
    if (v.size() != 3) throw config::ConfigError("--gamma wants g1,g2,g3");
    return {v[0], v[1], v[2]};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"batch diafiltration dual robust control toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    app.add_option("--config", config_path, "key-value config file");
    app.add_option("--out", out_dir, "output directory");

    // solve-nominal
    auto* cmd_nom = app.add_subcommand("solve-nominal", "open-loop optimal policy");
    std::vector<double> gamma_opt;
    cmd_nom->add_option("--gamma", gamma_opt, "g1,g2,g3 (default: prior midpoint)")
        ->expected(3)
        ->delimiter(',');

    // simulate
    auto* cmd_sim = app.add_subcommand("simulate", "one closed-loop batch");
    std::string ctrl_name = "adaptive";
    std::vector<double> truth_opt;
    std::uint64_t seed = 1;
    double ts_flag = 0.0, eps_flag = 0.0;
    int nr_flag = 0;
    cmd_sim->add_option("--controller", ctrl_name, "optimal|nominal|adaptive|dual");
    cmd_sim->add_option("--truth", truth_opt, "true g1,g2,g3")->expected(3)->delimiter(',');
    cmd_sim->add_option("--seed", seed, "noise stream seed");

    // estimate-replay
    auto* cmd_est = app.add_subcommand(
        "estimate-replay", "re-run set-membership bounds over a trajectory CSV");
    std::string traj_path;
    cmd_est->add_option("trajectory", traj_path, "CSV from `simulate`")->required();

    // project-intervals
    auto* cmd_proj =
        app.add_subcommand("project-intervals", "switching-time intervals for the prior");

    // montecarlo
    auto* cmd_mc = app.add_subcommand("montecarlo", "controller comparison over a grid");
    int grid = 10, jobs = 0;
    std::string controllers_csv = "optimal,nominal,adaptive,dual";
    cmd_mc->add_option("--grid", grid, "points per gamma dimension");
    cmd_mc->add_option("--controllers", controllers_csv, "comma list");
    cmd_mc->add_option("--seed", seed, "noise seed");
    cmd_mc->add_option("--jobs", jobs, "worker threads (0: hardware)");
    for (auto* c : {cmd_sim, cmd_mc}) {
        c->add_option("--ts", ts_flag, "control period Ts, h");
        c->add_option("--eps", eps_flag, "re-solve tolerance eps, h");
        c->add_option("--nr", nr_flag, "robust horizon (dual)");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        config::Settings s =
            config_path.empty() ? config::defaults() : config::load(config_path);
        if (ts_flag > 0.0) s.plant.Ts = ts_flag;
        if (eps_flag > 0.0) s.controller.eps = eps_flag;
        if (nr_flag > 0) s.controller.robust_horizon = nr_flag;
        s.plant.validate();
        const fs::path out(out_dir);

        if (*cmd_nom) {
            const GammaParams g = parse_gamma(gamma_opt, s);
            auto sol = solve_nominal(g, s.plant, true);
            auto jf = open_out(out / "policy.json");
            jf << harness::policy_to_json(sol.policy) << '\n';
            auto tf = open_out(out / "trajectory.csv");
            harness::write_trajectory_csv(tf, sol.traj);
            std::cout << harness::policy_to_json(sol.policy) << '\n';
            return 0;
        }

        if (*cmd_sim) {
            const GammaParams truth = parse_gamma(truth_opt, s);
            const auto which = harness::controller_from_string(ctrl_name);
            auto r = harness::run_closed_loop(truth, which, s.plant, s.controller,
                                              s.prior, seed, 0);
            auto jf = open_out(out / "batch.json");
            jf << harness::batch_result_to_json(r) << '\n';
            auto tf = open_out(out / "trajectory.csv");
            harness::write_trajectory_csv(tf, r.states);
            auto bf = open_out(out / "bounds.csv");
            harness::write_bounds_csv(bf, r.bounds);
            auto vf = open_out(out / "intervals.csv");
            harness::write_intervals_csv(vf, r.intervals);
            std::cout << harness::batch_result_to_json(r) << '\n';
            return r.ok ? 0 : 2;
        }

        if (*cmd_est) {
            std::ifstream f(traj_path);
            if (!f) throw config::ConfigError("cannot open " + traj_path);
            std::string line;
            std::getline(f, line);  // header
            control::Estimator est(s.prior, s.plant.sigma);
            std::vector<control::BoundsSample> bounds;
            bounds.push_back({0.0, est.p_box(), est.gamma_box()});
            while (std::getline(f, line)) {
                std::istringstream ls(line);
                std::string tok;
                std::vector<double> v;
                while (std::getline(ls, tok, ',')) v.push_back(std::stod(tok));
                if (v.size() < 5) continue;
                est.update({{v[0], v[4], v[1], v[2]}});
                bounds.push_back({v[0], est.p_box(), est.gamma_box()});
            }
            auto bf = open_out(out / "bounds.csv");
            harness::write_bounds_csv(bf, bounds);
            std::cout << "replayed " << bounds.size() - 1 << " measurements\n";
            return 0;
        }

        if (*cmd_proj) {
            control::Estimator est(s.prior, s.plant.sigma);
            const ProcessState x0{s.plant.c1_0, s.plant.c2_0, 0.0};
            auto iv = project::project_switch_times(est.gamma_box(), x0, s.plant);
            std::vector<control::IntervalSample> one{{0.0, iv}};
            auto vf = open_out(out / "intervals.csv");
            harness::write_intervals_csv(vf, one);
            std::cout << "t1 [" << iv.t1.lo << ", " << iv.t1.hi << "] h\n"
                      << "t2 [" << iv.t2.lo << ", " << iv.t2.hi << "] h\n"
                      << "us [" << iv.u_s.lo << ", " << iv.u_s.hi << "]\n";
            return 0;
        }

        if (*cmd_mc) {
            harness::ExperimentSpec spec;
            spec.grid_per_dim = grid;
            spec.seed = seed;
            spec.controllers.clear();
            std::istringstream cs(controllers_csv);
            std::string tok;
            while (std::getline(cs, tok, ','))
                spec.controllers.push_back(harness::controller_from_string(tok));
            const int j = jobs > 0 ? jobs
                                   : std::max(1u, std::thread::hardware_concurrency());
            auto mc = harness::monte_carlo(spec, s.plant, s.controller, s.prior, j);
            auto rf = open_out(out / "runs.csv");
            harness::write_runs_csv(rf, mc.runs);
            auto sf = open_out(out / "summary.json");
            sf << harness::summary_to_json(mc.summary) << '\n';
            std::cout << harness::summary_to_json(mc.summary) << '\n';
            if (mc.failures > 0) {
                std::cerr << mc.failures << " runs failed\n";
                return 2;
            }
            return 0;
        }
    } catch (const config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 3;
}
