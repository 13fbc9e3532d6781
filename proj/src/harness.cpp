#include "difc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace difc::harness {

using nlohmann::json;

std::string to_string(ControllerChoice c) {
    switch (c) {
        case ControllerChoice::Optimal: return "optimal";
        case ControllerChoice::Nominal: return "nominal";
        case ControllerChoice::Adaptive: return "adaptive";
        case ControllerChoice::Dual: return "dual";
    }
    return "?";
}

ControllerChoice controller_from_string(const std::string& s) {
    if (s == "optimal") return ControllerChoice::Optimal;
    if (s == "nominal") return ControllerChoice::Nominal;
    if (s == "adaptive") return ControllerChoice::Adaptive;
    if (s == "dual") return ControllerChoice::Dual;
    throw HarnessError("unknown controller: " + s);
}

std::vector<GammaParams> uniform_grid(const estim::GammaPrior& prior, int per_dim) {
    std::vector<GammaParams> grid;
    grid.reserve(static_cast<std::size_t>(per_dim) * per_dim * per_dim);
    auto coord = [per_dim](double lo, double hi, int i) {
        return per_dim == 1 ? 0.5 * (lo + hi)
                            : lo + (hi - lo) * static_cast<double>(i) / (per_dim - 1);
    };
    for (int a = 0; a < per_dim; ++a)
        for (int b = 0; b < per_dim; ++b)
            for (int c = 0; c < per_dim; ++c)
                grid.push_back({coord(prior.lo.gamma1, prior.hi.gamma1, a),
                                coord(prior.lo.gamma2, prior.hi.gamma2, b),
                                coord(prior.lo.gamma3, prior.hi.gamma3, c)});
    return grid;
}

// noise stream key: one independent stream per (seed, grid index), shared by
// every controller run on that truth so comparisons are paired
static std::uint64_t stream_key(std::uint64_t seed, std::size_t grid_index) {
    std::uint64_t h = seed ^ 0xd6e8feb86659fd93ull;
    h ^= (grid_index + 1) * 0x9e3779b97f4a7c15ull;
    h ^= h >> 32;
    h *= 0xd6e8feb86659fd93ull;
    h ^= h >> 29;
    return h;
}

control::BatchResult run_closed_loop(const GammaParams& p_true, ControllerChoice which,
                                     const PlantConfig& cfg,
                                     const control::ControllerConfig& ctrl,
                                     const estim::GammaPrior& prior, std::uint64_t seed,
                                     std::size_t grid_index) {
    control::NoiseStream noise(stream_key(seed, grid_index), cfg.sigma);
    if (which == ControllerChoice::Optimal) {
        // clairvoyant baseline: the policy solved at the truth, played exactly
        control::BatchResult r;
        try {
            auto sol = solve_nominal(p_true, cfg);
            r.ok = true;
            r.tf = sol.policy.tf;
            r.dilution_factor = sol.policy.dilution_factor;
            r.terminal = sol.terminal;
            r.resid_c1 = std::abs(sol.terminal.c1 - cfg.c1_f);
            r.resid_c2 = std::abs(sol.terminal.c2 - cfg.c2_f);
        } catch (const std::exception& e) {
            r.ok = false;
            r.error = e.what();
        }
        return r;
    }
    control::ControllerConfig c = ctrl;
    c.kind = which == ControllerChoice::Nominal ? control::ControllerKind::Nominal
             : which == ControllerChoice::Adaptive ? control::ControllerKind::Adaptive
                                                   : control::ControllerKind::Dual;
    return control::run_algorithm1(p_true, cfg, c, prior, noise);
}

ControllerStats summarize(ControllerChoice which, const std::vector<double>& batch_times) {
    if (batch_times.empty()) throw EmptySample("summarize: no successful runs");
    std::vector<double> v = batch_times;
    std::sort(v.begin(), v.end());
    auto quantile = [&](double q) {
        const double pos = q * (static_cast<double>(v.size()) - 1.0);
        const std::size_t i = static_cast<std::size_t>(pos);
        if (i + 1 >= v.size()) return v.back();
        const double frac = pos - static_cast<double>(i);
        return v[i] * (1.0 - frac) + v[i + 1] * frac;
    };
    ControllerStats s;
    s.controller = which;
    s.runs = v.size();
    s.q25 = quantile(0.25);
    s.median = quantile(0.5);
    s.q75 = quantile(0.75);
    const double iqr = s.q75 - s.q25;
    const double lo_fence = s.q25 - 1.5 * iqr;
    const double hi_fence = s.q75 + 1.5 * iqr;
    s.whisker_lo = v.back();
    s.whisker_hi = v.front();
    for (double x : v) {
        if (x < lo_fence || x > hi_fence) {
            s.outliers.push_back(x);
        } else {
            s.whisker_lo = std::min(s.whisker_lo, x);
            s.whisker_hi = std::max(s.whisker_hi, x);
        }
    }
    return s;
}

MonteCarloResult monte_carlo(const ExperimentSpec& spec, const PlantConfig& cfg,
                             const control::ControllerConfig& ctrl,
                             const estim::GammaPrior& prior, int jobs) {
    MonteCarloResult out;
    const auto grid = uniform_grid(prior, spec.grid_per_dim);

    struct Task {
        std::size_t grid_index;
        ControllerChoice controller;
    };
    std::vector<Task> tasks;
    for (std::size_t gi = 0; gi < grid.size(); ++gi)
        for (auto c : spec.controllers) tasks.push_back({gi, c});
    out.runs.resize(tasks.size());

    // clairvoyant baselines once per truth (paired regret reference)
    std::vector<double> tf_opt(grid.size(), 0.0);
    std::vector<char> opt_ok(grid.size(), 0);
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        try {
            tf_opt[gi] = solve_nominal(grid[gi], cfg).policy.tf;
            opt_ok[gi] = 1;
        } catch (const std::exception&) {
            opt_ok[gi] = 0;
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& tk = tasks[i];
            RunRecord rec;
            rec.truth = grid[tk.grid_index];
            rec.grid_index = tk.grid_index;
            rec.controller = tk.controller;
            auto br = run_closed_loop(rec.truth, tk.controller, cfg, ctrl, prior,
                                      spec.seed, tk.grid_index);
            rec.ok = br.ok && opt_ok[tk.grid_index];
            rec.tf = br.tf;
            rec.tf_optimal = tf_opt[tk.grid_index];
            rec.regret_pct =
                rec.ok ? (br.tf - rec.tf_optimal) / rec.tf_optimal * 100.0 : 0.0;
            rec.resid_c1 = br.resid_c1;
            rec.resid_c2 = br.resid_c2;
            rec.probe_samples = br.probe_samples;
            if (!br.solve_seconds.empty())
                rec.mean_solve_seconds =
                    std::accumulate(br.solve_seconds.begin(), br.solve_seconds.end(), 0.0) /
                    static_cast<double>(br.solve_seconds.size());
            out.runs[i] = rec;
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // canonical order: grid index, then controller enum
    std::sort(out.runs.begin(), out.runs.end(), [](const RunRecord& a, const RunRecord& b) {
        if (a.grid_index != b.grid_index) return a.grid_index < b.grid_index;
        return static_cast<int>(a.controller) < static_cast<int>(b.controller);
    });

    for (auto c : spec.controllers) {
        std::vector<double> tf, regret, solve;
        for (const auto& r : out.runs) {
            if (r.controller != c) continue;
            if (!r.ok) {
                ++out.failures;
                continue;
            }
            tf.push_back(r.tf);
            regret.push_back(r.regret_pct);
            solve.push_back(r.mean_solve_seconds);
        }
        auto s = summarize(c, tf);
        std::sort(regret.begin(), regret.end());
        s.median_regret_pct = regret[regret.size() / 2];
        if (!solve.empty())
            s.mean_solve_seconds = std::accumulate(solve.begin(), solve.end(), 0.0) /
                                   static_cast<double>(solve.size());
        out.summary.per_controller.push_back(s);
    }
    out.failures /= 1;  // counted once per failed run above
    return out;
}

// ---- export ------------------------------------------------------------------

namespace {
void fmt(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    os << buf;
}
}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t_h,c1_gL,c2_gL,u,qp_Lh\n";
    for (const auto& p : traj) {
        fmt(os, p.t);
        os << ',';
        fmt(os, p.c1);
        os << ',';
        fmt(os, p.c2);
        os << ',';
        fmt(os, p.u);
        os << ',';
        fmt(os, p.qp);
        os << '\n';
    }
}

void write_bounds_csv(std::ostream& os, const std::vector<control::BoundsSample>& bounds) {
    os << "t_h,p1_lo,p1_hi,p2_lo,p2_hi,p3_lo,p3_hi,"
          "g1_lo,g1_hi,g2_lo,g2_hi,g3_lo,g3_hi\n";
    for (const auto& b : bounds) {
        fmt(os, b.t);
        for (int j = 0; j < 3; ++j) {
            os << ',';
            fmt(os, b.p.lo[j]);
            os << ',';
            fmt(os, b.p.hi[j]);
        }
        for (const auto* iv : {&b.g.g1, &b.g.g2, &b.g.g3}) {
            os << ',';
            fmt(os, iv->lo);
            os << ',';
            fmt(os, iv->hi);
        }
        os << '\n';
    }
}

void write_intervals_csv(std::ostream& os,
                         const std::vector<control::IntervalSample>& ivs) {
    os << "t_h,t1_lo,t1_hi,t2_lo,t2_hi,tf_lo,tf_hi,us_lo,us_hi\n";
    for (const auto& s : ivs) {
        fmt(os, s.t);
        for (const auto* iv : {&s.iv.t1, &s.iv.t2, &s.iv.tf, &s.iv.u_s}) {
            os << ',';
            fmt(os, iv->lo);
            os << ',';
            fmt(os, iv->hi);
        }
        os << '\n';
    }
}

void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& runs) {
    os << "g1,g2,g3,controller,tf_h,regret_pct,ok\n";
    for (const auto& r : runs) {
        fmt(os, r.truth.gamma1);
        os << ',';
        fmt(os, r.truth.gamma2);
        os << ',';
        fmt(os, r.truth.gamma3);
        os << ',' << to_string(r.controller) << ',';
        fmt(os, r.tf);
        os << ',';
        fmt(os, r.regret_pct);
        os << ',' << (r.ok ? 1 : 0) << '\n';
    }
}

std::string policy_to_json(const Policy& p) {
    json j{{"gamma1", p.params.gamma1}, {"gamma2", p.params.gamma2},
           {"gamma3", p.params.gamma3}, {"t1_h", p.t1},
           {"t2_h", p.t2},              {"tf_h", p.tf},
           {"u_s", p.u_s}};
    return j.dump(2);
}

std::string batch_result_to_json(const control::BatchResult& r) {
    json j;
    j["ok"] = r.ok;
    j["tf_h"] = r.tf;
    j["dilution_factor"] = r.dilution_factor;
    j["terminal"] = {{"c1_gL", r.terminal.c1}, {"c2_gL", r.terminal.c2}, {"t_h", r.terminal.t}};
    j["resid_c1_gL"] = r.resid_c1;
    j["resid_c2_gL"] = r.resid_c2;
    j["resolves"] = r.resolves;
    j["skips"] = r.skips;
    j["probe_samples"] = r.probe_samples;
    if (!r.error.empty()) j["error"] = r.error;
    json segs = json::array();
    for (const auto& s : r.inputs) segs.push_back({{"t_h", s.t}, {"u", s.u}});
    j["input_segments"] = segs;
    return j.dump(2);
}

std::string summary_to_json(const StatsSummary& s) {
    json j = json::array();
    for (const auto& c : s.per_controller) {
        json e{{"controller", to_string(c.controller)},
               {"runs", c.runs},
               {"median_tf_h", c.median},
               {"q25_tf_h", c.q25},
               {"q75_tf_h", c.q75},
               {"whisker_lo", c.whisker_lo},
               {"whisker_hi", c.whisker_hi},
               {"outliers", c.outliers},
               {"median_regret_pct", c.median_regret_pct},
               {"mean_solve_seconds", c.mean_solve_seconds}};
        j.push_back(e);
    }
    return j.dump(2);
}

}  // namespace difc::harness
