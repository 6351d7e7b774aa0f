#include "gsv/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "gsv/csv.hpp"

namespace gsv {

using nlohmann::json;

namespace {

template <typename T>
void get_if_present(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

json scenario_to_json(const ScenarioSpec& s) {
    return {{"kind", to_string(s.kind)},
            {"source_nodes", s.source_nodes},
            {"source_count", s.source_count},
            {"initial_fraction", s.initial_fraction},
            {"event_times", s.event_times},
            {"event_beta", s.event_beta},
            {"event_node_count", s.event_node_count},
            {"horizon", s.horizon}};
}

void scenario_from_json(const json& j, ScenarioSpec& s) {
    std::string kind = to_string(s.kind);
    get_if_present(j, "kind", kind);
    s.kind = scenario_kind_from_string(kind);
    get_if_present(j, "source_nodes", s.source_nodes);
    get_if_present(j, "source_count", s.source_count);
    get_if_present(j, "initial_fraction", s.initial_fraction);
    get_if_present(j, "event_times", s.event_times);
    get_if_present(j, "event_beta", s.event_beta);
    get_if_present(j, "event_node_count", s.event_node_count);
    get_if_present(j, "horizon", s.horizon);
}

} // namespace

std::string PipelineConfig::to_json_string() const {
    json j;
    j["seed"] = seed;
    j["graph"] = {{"kind", graph.kind},         {"n", graph.n},
                  {"box_side", graph.box_side}, {"threshold", graph.threshold},
                  {"sigma2", graph.sigma2},     {"binary", graph.binary},
                  {"m", graph.m},               {"edges_path", graph.edges_path},
                  {"nodes_path", graph.nodes_path}};
    j["sir"] = {{"beta", sir.beta}, {"gamma", sir.gamma}, {"kappa", sir.kappa}};
    j["integrator"] = {{"output_dt", integrator.output_dt},
                       {"rel_tol", integrator.rel_tol},
                       {"abs_tol", integrator.abs_tol},
                       {"max_step", integrator.max_step},
                       {"min_step", integrator.min_step}};
    j["scenario"] = scenario_to_json(scenario);
    j["identify"] = {{"strategy", to_string(identify.strategy)},
                     {"r", identify.r},
                     {"p", identify.p},
                     {"alpha", identify.alpha},
                     {"normalized", identify.normalized},
                     {"hpf_fraction", identify.hpf_fraction},
                     {"sgwt_scales", identify.sgwt.scales},
                     {"sgwt_num_scales", identify.sgwt.num_scales},
                     {"sgwt_max_product_nodes", identify.sgwt.max_product_nodes}};
    j["plan"] = {{"stage_fractions", plan.stage_fractions},
                 {"stage_steps", plan.stage_steps},
                 {"stage_percents", plan.stage_percents},
                 {"lag", plan.lag}};
    j["sweep"] = {{"alpha_grid", sweep.alpha_grid},
                  {"trials", sweep.trials},
                  {"method_trials", sweep.method_trials},
                  {"methods", sweep.methods},
                  {"threads", sweep.threads}};
    j["ingest"] = {{"threshold_km", ingest.threshold_km},
                   {"sigma_km", ingest.sigma_km},
                   {"planar", ingest.planar},
                   {"daily", ingest.daily},
                   {"repair", ingest.repair}};
    j["report"] = {{"metric", report.metric},
                   {"alpha", report.alpha},
                   {"r", report.r},
                   {"normalized", report.normalized},
                   {"db_floor", report.db_floor}};
    j["h1n1"] = {{"kappa", h1n1.kappa},
                 {"beta", h1n1.beta},
                 {"gamma", h1n1.gamma},
                 {"source_node", h1n1.source_node},
                 {"initial_fraction", h1n1.initial_fraction},
                 {"super_spreader", h1n1.super_spreader},
                 {"event_times", h1n1.event_times},
                 {"event_beta", h1n1.event_beta},
                 {"event_fraction", h1n1.event_fraction},
                 {"horizon", h1n1.horizon}};
    return j.dump(2) + "\n";
}

PipelineConfig PipelineConfig::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    PipelineConfig c;
    try {
        get_if_present(j, "seed", c.seed);
        if (j.contains("graph")) {
            const auto& jg = j.at("graph");
            get_if_present(jg, "kind", c.graph.kind);
            get_if_present(jg, "n", c.graph.n);
            get_if_present(jg, "box_side", c.graph.box_side);
            get_if_present(jg, "threshold", c.graph.threshold);
            get_if_present(jg, "sigma2", c.graph.sigma2);
            get_if_present(jg, "binary", c.graph.binary);
            get_if_present(jg, "m", c.graph.m);
            get_if_present(jg, "edges_path", c.graph.edges_path);
            get_if_present(jg, "nodes_path", c.graph.nodes_path);
        }
        if (j.contains("sir")) {
            const auto& js = j.at("sir");
            get_if_present(js, "beta", c.sir.beta);
            get_if_present(js, "gamma", c.sir.gamma);
            get_if_present(js, "kappa", c.sir.kappa);
        }
        if (j.contains("integrator")) {
            const auto& ji = j.at("integrator");
            get_if_present(ji, "output_dt", c.integrator.output_dt);
            get_if_present(ji, "rel_tol", c.integrator.rel_tol);
            get_if_present(ji, "abs_tol", c.integrator.abs_tol);
            get_if_present(ji, "max_step", c.integrator.max_step);
            get_if_present(ji, "min_step", c.integrator.min_step);
        }
        if (j.contains("scenario")) scenario_from_json(j.at("scenario"), c.scenario);
        if (j.contains("identify")) {
            const auto& ji = j.at("identify");
            std::string strategy = to_string(c.identify.strategy);
            get_if_present(ji, "strategy", strategy);
            c.identify.strategy = strategy_from_string(strategy);
            get_if_present(ji, "r", c.identify.r);
            get_if_present(ji, "p", c.identify.p);
            get_if_present(ji, "alpha", c.identify.alpha);
            get_if_present(ji, "normalized", c.identify.normalized);
            get_if_present(ji, "hpf_fraction", c.identify.hpf_fraction);
            get_if_present(ji, "sgwt_scales", c.identify.sgwt.scales);
            get_if_present(ji, "sgwt_num_scales", c.identify.sgwt.num_scales);
            get_if_present(ji, "sgwt_max_product_nodes", c.identify.sgwt.max_product_nodes);
        }
        if (j.contains("plan")) {
            const auto& jp = j.at("plan");
            get_if_present(jp, "stage_fractions", c.plan.stage_fractions);
            get_if_present(jp, "stage_steps", c.plan.stage_steps);
            get_if_present(jp, "stage_percents", c.plan.stage_percents);
            get_if_present(jp, "lag", c.plan.lag);
        }
        if (j.contains("sweep")) {
            const auto& js = j.at("sweep");
            get_if_present(js, "alpha_grid", c.sweep.alpha_grid);
            get_if_present(js, "trials", c.sweep.trials);
            get_if_present(js, "method_trials", c.sweep.method_trials);
            get_if_present(js, "methods", c.sweep.methods);
            get_if_present(js, "threads", c.sweep.threads);
        }
        if (j.contains("ingest")) {
            const auto& ji = j.at("ingest");
            get_if_present(ji, "threshold_km", c.ingest.threshold_km);
            get_if_present(ji, "sigma_km", c.ingest.sigma_km);
            get_if_present(ji, "planar", c.ingest.planar);
            get_if_present(ji, "daily", c.ingest.daily);
            get_if_present(ji, "repair", c.ingest.repair);
        }
        if (j.contains("report")) {
            const auto& jr = j.at("report");
            get_if_present(jr, "metric", c.report.metric);
            get_if_present(jr, "alpha", c.report.alpha);
            get_if_present(jr, "r", c.report.r);
            get_if_present(jr, "normalized", c.report.normalized);
            get_if_present(jr, "db_floor", c.report.db_floor);
        }
        if (j.contains("h1n1")) {
            const auto& jh = j.at("h1n1");
            get_if_present(jh, "kappa", c.h1n1.kappa);
            get_if_present(jh, "beta", c.h1n1.beta);
            get_if_present(jh, "gamma", c.h1n1.gamma);
            get_if_present(jh, "source_node", c.h1n1.source_node);
            get_if_present(jh, "initial_fraction", c.h1n1.initial_fraction);
            get_if_present(jh, "super_spreader", c.h1n1.super_spreader);
            get_if_present(jh, "event_times", c.h1n1.event_times);
            get_if_present(jh, "event_beta", c.h1n1.event_beta);
            get_if_present(jh, "event_fraction", c.h1n1.event_fraction);
            get_if_present(jh, "horizon", c.h1n1.horizon);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    c.validate();
    return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

void PipelineConfig::save(const std::string& path) const {
    csv::atomic_write(path, to_json_string());
}

void PipelineConfig::validate() const {
    if (graph.kind != "distance" && graph.kind != "scale_free" && graph.kind != "file")
        throw ConfigError("graph.kind must be distance, scale_free or file");
    if (graph.kind == "distance") {
        if (graph.n < 2) throw ConfigError("graph.n must be >= 2");
        if (!(graph.box_side > 0)) throw ConfigError("graph.box_side must be positive");
        if (!(graph.threshold > 0)) throw ConfigError("graph.threshold must be positive");
        if (graph.sigma2 < 0) throw ConfigError("graph.sigma2 must be positive (0 = threshold^2)");
    } else if (graph.kind == "scale_free") {
        if (graph.m < 1 || graph.m >= graph.n)
            throw ConfigError("graph.m must satisfy 1 <= m < n");
    } else if (graph.edges_path.empty()) {
        throw ConfigError("graph.kind=file needs graph.edges_path");
    }
    if (sir.beta < 0 || sir.gamma < 0 || sir.kappa < 0)
        throw ConfigError("sir rates must be non-negative");
    integrator.validate();
    identify.validate();
    if (!(report.db_floor < 0)) throw ConfigError("report.db_floor must be negative");
    if (report.metric != "TLV" && report.metric != "LV" && report.metric != "TV")
        throw ConfigError("report.metric must be TLV, LV or TV");
    if (report.r < 2) throw ConfigError("report.r must be >= 2");
    if (report.alpha < 0 || report.alpha > 1) throw ConfigError("report.alpha must lie in [0, 1]");
    for (double f : plan.stage_fractions)
        if (!(f > 0) || f > 1) throw ConfigError("plan.stage_fractions must lie in (0, 1]");
    for (double p : plan.stage_percents)
        if (!(p > 0) || p > 100) throw ConfigError("plan.stage_percents must lie in (0, 100]");
    if (plan.lag < 0) throw ConfigError("plan.lag must be >= 0");
    if (sweep.trials < 1) throw ConfigError("sweep.trials must be >= 1");
    for (const auto& m : sweep.methods) strategy_from_string(m);
    parse_alpha_grid(sweep.alpha_grid);
    if (!(ingest.threshold_km > 0)) throw ConfigError("ingest.threshold_km must be positive");
    if (ingest.sigma_km < 0) throw ConfigError("ingest.sigma_km must be >= 0");
    if (h1n1.kappa < 0 || h1n1.beta < 0 || h1n1.gamma < 0)
        throw ConfigError("h1n1 rates must be non-negative");
    if (!(h1n1.event_fraction >= 0) || h1n1.event_fraction > 1)
        throw ConfigError("h1n1.event_fraction must lie in [0, 1]");
}

Graph PipelineConfig::make_graph() const {
    if (graph.kind == "distance") {
        Graph g = build_distance_graph(
            {graph.n, graph.box_side, graph.threshold, graph.sigma2, seed});
        return graph.binary ? binarize(g) : g;
    }
    if (graph.kind == "scale_free")
        return build_scale_free_graph({graph.n, graph.m, seed});
    return load_graph(graph.edges_path, graph.nodes_path);
}

SirParams PipelineConfig::make_sir_params(int n) const {
    return SirParams::uniform(n, sir.beta, sir.gamma, sir.kappa);
}

bool operator==(const PipelineConfig& a, const PipelineConfig& b) {
    return a.to_json_string() == b.to_json_string();
}

} // namespace gsv
