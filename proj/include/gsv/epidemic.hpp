#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gsv/graph.hpp"
#include "gsv/signal.hpp"

namespace gsv {

struct SirParams {
    Eigen::VectorXd beta;  // per-node transmission rate
    Eigen::VectorXd gamma; // per-node recovery rate
    double kappa = 0.0;    // diffusive coupling strength

    static SirParams uniform(int n, double beta, double gamma, double kappa);
    void validate(int n) const;
};

/// Per-node population fractions.
struct EpidemicState {
    Eigen::VectorXd s, i, r;

    int size() const { return static_cast<int>(s.size()); }
    static EpidemicState susceptible(int n); // s = 1, i = r = 0
    void validate() const;
};

struct IntegratorConfig {
    double output_dt = 1.0; // spacing of recorded states
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = 1.0;
    double min_step = 1e-10;
    void validate() const;
};

/// Transmission-rate change applied exactly at `time`: dynamics before the
/// event use the old rate, dynamics after use the new one.
struct BetaEvent {
    double time = 0.0;
    std::vector<int> nodes;
    double beta = 0.0;
};
using Schedule = std::vector<BetaEvent>;

enum class ScenarioKind { SinglePerturbation, DoublePerturbation, MultipleInfections, Custom };

std::string to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(const std::string& s);

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::SinglePerturbation;
    std::vector<int> source_nodes;   // empty = sampled
    int source_count = 1;            // sampled sources when source_nodes empty
    double initial_fraction = 0.002; // infected fraction at each source
    std::vector<double> event_times; // one for double perturbation; one per stage otherwise
    double event_beta = 0.8;
    int event_node_count = 5; // fresh nodes per event (multiple infections)
    int horizon = 1000;
    void validate(int n) const;
};

struct Scenario {
    EpidemicState init;
    Schedule schedule;
    std::vector<int> sources;
};

/// Single-location compartment derivative in population counts.
struct LocalSirState {
    double s = 0, i = 0, r = 0;
};
LocalSirState sir_rhs_local(const LocalSirState& state, double beta, double gamma,
                            double population);

/// Reaction plus degree-normalized diffusion on the graph; the diffusion term
/// is zero for isolated nodes.
void network_rhs(const EpidemicState& state, const SirParams& params, const Graph& g,
                 EpidemicState& out);

struct RunRecord {
    SignalSeries series; // infection fraction, N x horizon
    std::optional<Eigen::MatrixXd> full_s, full_r;
    SirParams params; // rates before any event
    ScenarioKind scenario_kind = ScenarioKind::Custom;
    std::vector<int> sources;
    Schedule schedule;
    IntegratorConfig integrator;
    std::uint64_t graph_hash = 0;
    std::uint64_t seed = 0;
};

/// Adaptive RK4 with step-doubling error control. States are recorded on the
/// output grid t = 1, 1+dt, ..., 1+(horizon-1)dt; internal steps never cross
/// a grid point or an event time. Compartment values in [-1e-9, 0) are
/// clamped to 0 after each accepted step; more negative values raise
/// IntegrationError, as does a step-size underflow below min_step.
RunRecord integrate(const Graph& g, const SirParams& params, const EpidemicState& init,
                    const IntegratorConfig& cfg, int horizon, const Schedule& schedule = {},
                    bool record_full_state = false);

/// Low-level segment integration used by staged interventions: advances state
/// from t_begin to t_end, firing `record` at every grid time in
/// (t_begin, t_end] and applying scheduled events in that interval. `params`
/// is mutated by events and carries across segments.
void integrate_span(const Graph& g, SirParams& params, EpidemicState& state,
                    double t_begin, double t_end, const IntegratorConfig& cfg,
                    const Schedule& schedule,
                    const std::function<void(int, const EpidemicState&)>& record,
                    double grid_anchor = 1.0);

/// Fixed-step classic RK4 (no error control); h must divide t1 - t0.
EpidemicState integrate_fixed(const Graph& g, const SirParams& params,
                              const EpidemicState& init, double t0, double t1, double h);

Scenario make_scenario(const ScenarioSpec& spec, const Graph& g, std::uint64_t seed);

/// Hybrid configuration: airport-style network with diffusive coupling
/// 0.0028 and one designated source; the super-spreader variant raises the
/// transmission rate to event_beta on ceil(event_fraction * N) random nodes
/// at each event time.
struct H1n1Config {
    double kappa = 0.0028;
    double beta = 0.4;   // placeholder disease rate, override in config
    double gamma = 0.25; // placeholder disease rate, override in config
    int source_node = 0;
    double initial_fraction = 0.002;
    bool super_spreader = false;
    std::vector<double> event_times;
    double event_beta = 0.8;
    double event_fraction = 0.02;
    int horizon = 1000;
};
std::pair<SirParams, Scenario> h1n1_config(const Graph& g, const H1n1Config& cfg = {},
                                           std::uint64_t seed = 0);

/// Persists run.json + infection.csv (+ sir.csv when full state is present).
void save_run(const RunRecord& run, const std::string& dir);
RunRecord load_run(const std::string& dir);

} // namespace gsv
