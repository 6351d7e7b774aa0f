#pragma once

#include <cstdint>
#include <string>

#include "gsv/epidemic.hpp"
#include "gsv/graph.hpp"
#include "gsv/influence.hpp"
#include "gsv/ingest.hpp"

namespace gsv {

/// One declarative document holding every tunable, organized in sections
/// that mirror the library modules. Loading validates against each module's
/// invariants; serialization round-trips field for field.
struct PipelineConfig {
    std::uint64_t seed = 42;

    struct GraphSection {
        std::string kind = "distance"; // distance | scale_free | file
        int n = 400;
        double box_side = 10.0;
        double threshold = 1.95;
        double sigma2 = 0.0; // 0 = threshold^2
        bool binary = false;
        int m = 3; // scale-free attachment
        std::string edges_path;
        std::string nodes_path;
    } graph;

    struct SirSection {
        double beta = 0.3;
        double gamma = 0.1;
        double kappa = 0.1;
    } sir;

    IntegratorConfig integrator;

    ScenarioSpec scenario;

    IdentifyConfig identify;

    struct PlanSection {
        std::vector<double> stage_fractions = {0.3, 0.6, 0.9};
        std::vector<int> stage_steps; // explicit triggers; empty = fractions of peak
        std::vector<double> stage_percents = {5.0, 10.0, 15.0};
        int lag = 10;
    } plan;

    struct SweepSection {
        std::string alpha_grid = "0:0.02:0.3,0.4:0.1:0.9,0.9:0.02:1";
        int trials = 100;
        int method_trials = -1;
        std::vector<std::string> methods = {"Max", "HPF", "LV", "BC", "CC"};
        int threads = 0;
    } sweep;

    struct IngestSection {
        double threshold_km = 100.0;
        double sigma_km = 0.0; // 0 = threshold_km
        bool planar = false;
        bool daily = false;
        bool repair = false;
    } ingest;

    struct ReportSection {
        std::string metric = "TLV"; // TLV | LV | TV
        double alpha = 0.6;
        int r = 10;
        bool normalized = true;
        double db_floor = -120.0;
    } report;

    H1n1Config h1n1;

    void validate() const;

    static PipelineConfig load(const std::string& path);
    void save(const std::string& path) const;
    std::string to_json_string() const;
    static PipelineConfig from_json_string(const std::string& text);

    /// Builds the graph described by the graph section.
    Graph make_graph() const;
    SirParams make_sir_params(int n) const;
};

bool operator==(const PipelineConfig& a, const PipelineConfig& b);

} // namespace gsv
