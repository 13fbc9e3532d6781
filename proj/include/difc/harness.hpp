#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "difc/control.hpp"

// Experiment driver: single closed-loop runs with truth injection, the
// Monte-Carlo controller comparison over a uniform parameter grid, and the
// box-plot statistics the comparison reports. All output is plain CSV/JSON.

namespace difc::harness {

struct HarnessError : ModelError {
    using ModelError::ModelError;
};
struct EmptySample : HarnessError {
    using HarnessError::HarnessError;
};

enum class ControllerChoice { Optimal, Nominal, Adaptive, Dual };

std::string to_string(ControllerChoice c);
ControllerChoice controller_from_string(const std::string& s);

struct ExperimentSpec {
    int grid_per_dim = 10;
    std::vector<ControllerChoice> controllers{ControllerChoice::Optimal,
                                              ControllerChoice::Nominal,
                                              ControllerChoice::Adaptive,
                                              ControllerChoice::Dual};
    std::uint64_t seed = 1;
    std::string out_dir;
};

struct RunRecord {
    GammaParams truth;
    std::size_t grid_index = 0;
    ControllerChoice controller{};
    bool ok = false;
    double tf = 0.0;
    double tf_optimal = 0.0;
    double regret_pct = 0.0;
    double resid_c1 = 0.0;
    double resid_c2 = 0.0;
    double mean_solve_seconds = 0.0;
    int probe_samples = 0;
};

struct ControllerStats {
    ControllerChoice controller{};
    std::size_t runs = 0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    double whisker_lo = 0.0;
    double whisker_hi = 0.0;
    std::vector<double> outliers;
    double mean_solve_seconds = 0.0;
    double median_regret_pct = 0.0;
};

struct StatsSummary {
    std::vector<ControllerStats> per_controller;
};

// Deterministic given (p_true, controller, seed, grid index).
control::BatchResult run_closed_loop(const GammaParams& p_true, ControllerChoice which,
                                     const PlantConfig& cfg,
                                     const control::ControllerConfig& ctrl,
                                     const estim::GammaPrior& prior, std::uint64_t seed,
                                     std::size_t grid_index);

struct MonteCarloResult {
    std::vector<RunRecord> runs;
    StatsSummary summary;
    int failures = 0;
};

MonteCarloResult monte_carlo(const ExperimentSpec& spec, const PlantConfig& cfg,
                             const control::ControllerConfig& ctrl,
                             const estim::GammaPrior& prior, int jobs = 1);

// Quartiles by linear interpolation, Tukey 1.5 IQR whiskers.
ControllerStats summarize(ControllerChoice which, const std::vector<double>& batch_times);

std::vector<GammaParams> uniform_grid(const estim::GammaPrior& prior, int per_dim);

// ---- export ----------------------------------------------------------------

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_bounds_csv(std::ostream& os, const std::vector<control::BoundsSample>& bounds);
void write_intervals_csv(std::ostream& os,
                         const std::vector<control::IntervalSample>& ivs);
void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& runs);

std::string policy_to_json(const Policy& p);
std::string batch_result_to_json(const control::BatchResult& r);
std::string summary_to_json(const StatsSummary& s);

}  // namespace difc::harness
