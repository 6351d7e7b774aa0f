#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gsv/epidemic.hpp"
#include "gsv/graph.hpp"
#include "gsv/signal.hpp"
#include "gsv/spectral.hpp"

namespace gsv {

enum class Strategy { Max, HPF, LV, TLV, SGWT, BC, CC };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct IdentifyConfig {
    Strategy strategy = Strategy::TLV;
    int r = 10;             // window length
    double p = 1.0;         // top percentage, (0, 100]
    double alpha = 0.5;     // TLV weight
    bool normalized = true; // TLV with windowed normalization
    double hpf_fraction = 0.25;
    SgwtConfig sgwt;
    void validate() const;
};

struct InfluentialSet {
    int step = 0;            // 1-based time step
    std::vector<int> nodes;  // descending score, ties by ascending index
    std::vector<double> scores;
};

struct InterventionStage {
    int trigger_step = 0; // T_n
    double percent = 0.0; // p_n in (0, 100]
};

struct InterventionPlan {
    std::vector<InterventionStage> stages; // strictly increasing trigger steps
    int lag = 10;                          // t_c: identification-to-action delay
    void validate() const;
};

struct ControlOutcome {
    SignalSeries controlled_series;
    std::vector<Graph> control_graphs;      // graph after each stage
    std::vector<InfluentialSet> stage_sets; // nodes isolated per stage
    std::vector<int> isolated;              // cumulative, ascending
    Eigen::VectorXd cumulative_curve;       // total infection per step
};

/// ceil(p * n / 100)
int top_count(double p, int n);

/// Ranks nodes by the chosen strategy over the window ending at `step`
/// (1-based, >= r) and returns the top p%. HPF requires `spectrum`
/// (of the graph's Laplacian); other strategies ignore it.
InfluentialSet identify(const Graph& g, const SignalSeries& X, int step,
                        const IdentifyConfig& cfg, const Spectrum* spectrum = nullptr);

/// Identifies at control_step and returns the graph with those nodes
/// isolated, effective from the following step.
std::pair<Graph, InfluentialSet> apply_control(const Graph& g, const SignalSeries& X,
                                               int control_step, const IdentifyConfig& cfg,
                                               const Spectrum* spectrum = nullptr);

/// Simulates with staged isolation: at each stage's trigger + lag, identifies
/// on the series so far, removes the selected nodes' edges from the current
/// control graph, and resumes integration from the same state. An empty plan
/// reproduces the uncontrolled run bit for bit.
ControlOutcome staged_control(const Graph& g, const SirParams& params,
                              const EpidemicState& init, const Schedule& schedule,
                              int horizon, const InterventionPlan& plan,
                              const IdentifyConfig& icfg, const IntegratorConfig& intcfg);

/// Earliest step at which total infection peaks.
int peak_time(const SignalSeries& series);
int peak_time(const RunRecord& run);

/// c(t) = sum_i X[i][t]
Eigen::VectorXd cumulative_infection(const SignalSeries& series);

/// Running total of the per-step totals: a(t) = sum_{s <= t} c(s). The sweep
/// uses a(horizon) as its objective; the per-step prevalence sum decays to
/// zero by the end of a long run and cannot discriminate between strategies.
Eigen::VectorXd accumulated_infection_curve(const Eigen::VectorXd& per_step_total);

/// Grid string "a:step:b,c,d:step:e" -> sorted distinct values.
std::vector<double> parse_alpha_grid(const std::string& text);
std::vector<double> default_alpha_grid();

struct SweepConfig {
    std::vector<double> alpha_grid; // empty = default grid
    int trials = 100;
    int method_trials = -1;         // comparison methods on first k trials; -1 = all
    std::vector<Strategy> methods = {Strategy::Max, Strategy::HPF, Strategy::LV,
                                     Strategy::BC, Strategy::CC};
    std::vector<double> stage_fractions = {0.3, 0.6, 0.9}; // of the probe peak time
    std::vector<double> stage_percents = {5.0, 10.0, 15.0};
    int lag = 10;
    IdentifyConfig identify;   // r, p, normalized; strategy/alpha set per cell
    IntegratorConfig integrator;
    ScenarioSpec scenario;     // multiple-infections template (event times resolved per trial)
    int threads = 0;           // 0 = hardware concurrency
};

struct SweepTrial {
    int trial = 0;
    int peak_step = 0;
    std::vector<int> stage_steps;
    double best_alpha = 0.0;
    double best_final = 0.0;
    double no_control_final = 0.0;
    std::map<std::string, double> method_final;
};

struct SweepResult {
    std::vector<double> alpha_grid;
    std::vector<SweepTrial> trials;
    Eigen::MatrixXd alpha_final;  // trials x grid, final cumulative infection
    std::vector<std::string> curve_names; // "none", methods..., "TLV"
    Eigen::MatrixXd mean_curves;          // names x horizon
    int method_trial_count = 0;
};

/// Monte Carlo sweep: per trial, a fresh multiple-infections scenario seeded
/// by (master seed, trial); a probe run locates the uncontrolled peak, stage
/// triggers are floor(fraction * peak) bounded below by the window length;
/// then staged control runs for every alpha in the grid plus each comparison
/// method. (trial, alpha) cells are distributed across workers and merged by
/// index.
SweepResult alpha_sweep(const Graph& g, const SirParams& params, const SweepConfig& cfg,
                        std::uint64_t master_seed);

} // namespace gsv
