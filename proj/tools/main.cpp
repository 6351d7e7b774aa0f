#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>

#include "gsv/config.hpp"
#include "gsv/csv.hpp"
#include "gsv/epidemic.hpp"
#include "gsv/errors.hpp"
#include "gsv/graph.hpp"
#include "gsv/influence.hpp"
#include "gsv/ingest.hpp"
#include "gsv/rng.hpp"
#include "gsv/variation.hpp"

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using namespace gsv;

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
};

PipelineConfig load_config(const CommonOpts& opts) {
    PipelineConfig cfg =
        opts.config_path.empty() ? PipelineConfig{} : PipelineConfig::load(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config_path, "pipeline configuration file (JSON)");
    sub->add_option("--seed", opts.seed, "master seed; overrides the config value");
}

std::string matrix_csv(const Eigen::MatrixXd& m, const std::vector<double>& times) {
    std::ostringstream out;
    out << "node";
    for (double t : times) out << ',' << csv::format_double(t);
    out << '\n';
    for (int i = 0; i < m.rows(); ++i) {
        out << i;
        for (int t = 0; t < m.cols(); ++t) out << ',' << csv::format_double(m(i, t));
        out << '\n';
    }
    return out.str();
}

SignalSeries load_series_csv(const std::string& path) {
    auto table = csv::read_file(path);
    if (table.header.empty() || table.header[0] != "node")
        throw IngestError("series file must start with a 'node' column: " + path);
    const int t_len = static_cast<int>(table.header.size()) - 1;
    const int n = static_cast<int>(table.rows.size());
    SignalSeries s;
    s.values.resize(n, t_len);
    s.time_axis.resize(t_len);
    for (int t = 0; t < t_len; ++t)
        s.time_axis[t] = csv::parse_double(table.header[t + 1], path);
    for (const auto& row : table.rows) {
        const long i = csv::parse_long(row[0], path);
        if (i < 0 || i >= n) throw IngestError("node id out of range in " + path);
        for (int t = 0; t < t_len; ++t)
            s.values(i, t) = csv::parse_double(row[t + 1], path);
    }
    s.validate();
    return s;
}

struct GraphAndSeries {
    Graph graph;
    SignalSeries series;
};

/// Inputs for identify/report: either a simulate output directory (which
/// holds graph + infection files) or explicit --edges/--series paths.
GraphAndSeries load_inputs(const std::string& run_dir, const std::string& edges,
                           const std::string& nodes, const std::string& series) {
    if (!run_dir.empty()) {
        Graph g = load_graph((fs::path(run_dir) / "edges.csv").string(),
                             (fs::path(run_dir) / "nodes.csv").string());
        RunRecord run = load_run(run_dir);
        if (run.series.nodes() != g.size())
            throw IngestError("graph and run in " + run_dir + " disagree on node count");
        return {std::move(g), std::move(run.series)};
    }
    if (edges.empty() || series.empty())
        throw ConfigError("either --run-dir or both --edges and --series are required");
    Graph g = load_graph(edges, nodes);
    SignalSeries s = load_series_csv(series);
    if (s.nodes() != g.size()) throw IngestError("graph and series disagree on node count");
    return {std::move(g), std::move(s)};
}

int cmd_graph_generate(const CommonOpts& opts, const std::string& out_dir) {
    PipelineConfig cfg = load_config(opts);
    Graph g = cfg.make_graph();
    save_graph(g, (fs::path(out_dir) / "edges.csv").string(),
               (fs::path(out_dir) / "nodes.csv").string());
    cfg.save((fs::path(out_dir) / "config_used.json").string());
    std::printf("graph: %d nodes, %ld edges -> %s\n", g.size(), g.edge_count(),
                out_dir.c_str());
    return 0;
}

int cmd_graph_validate(const std::string& edges, const std::string& nodes) {
    Graph g = load_graph(edges, nodes);
    Eigen::VectorXd d = degrees(g);
    std::printf("valid graph: %d nodes, %ld edges, degree mean %s max %s\n", g.size(),
                g.edge_count(), csv::format_double(d.size() ? d.mean() : 0.0).c_str(),
                csv::format_double(d.size() ? d.maxCoeff() : 0.0).c_str());
    return 0;
}

int cmd_graph_convert(const std::string& edges, const std::string& nodes,
                      const std::string& out_dir) {
    Graph g = load_graph(edges, nodes);
    save_graph(g, (fs::path(out_dir) / "edges.csv").string(),
               (fs::path(out_dir) / "nodes.csv").string());
    std::printf("rewrote %d nodes, %ld edges -> %s\n", g.size(), g.edge_count(),
                out_dir.c_str());
    return 0;
}

int cmd_simulate(const CommonOpts& opts, const std::string& out_dir, bool full_state,
                 bool h1n1) {
    PipelineConfig cfg = load_config(opts);
    Graph g = cfg.make_graph();
    SirParams params = cfg.make_sir_params(g.size());
    Scenario sc;
    ScenarioKind kind = cfg.scenario.kind;
    int horizon = cfg.scenario.horizon;
    if (h1n1) {
        auto [p2, sc2] = h1n1_config(g, cfg.h1n1, derive_seed(cfg.seed, 1));
        params = std::move(p2);
        sc = std::move(sc2);
        kind = ScenarioKind::Custom;
        horizon = cfg.h1n1.horizon;
    } else {
        sc = make_scenario(cfg.scenario, g, derive_seed(cfg.seed, 1));
    }
    RunRecord run = integrate(g, params, sc.init, cfg.integrator, horizon, sc.schedule,
                              full_state);
    run.scenario_kind = kind;
    run.sources = sc.sources;
    run.seed = cfg.seed;
    save_run(run, out_dir);
    save_graph(g, (fs::path(out_dir) / "edges.csv").string(),
               (fs::path(out_dir) / "nodes.csv").string());
    cfg.save((fs::path(out_dir) / "config_used.json").string());
    std::printf("simulated %d nodes x %d steps -> %s\n", run.series.nodes(),
                run.series.steps(), out_dir.c_str());
    return 0;
}

std::string influential_csv(const std::vector<InfluentialSet>& sets, Strategy strategy,
                            const std::vector<double>& time_axis) {
    std::ostringstream out;
    out << "time,rank,node,score,strategy\n";
    for (const auto& set : sets) {
        const double time = time_axis[set.step - 1];
        for (size_t k = 0; k < set.nodes.size(); ++k)
            out << csv::format_double(time) << ',' << (k + 1) << ',' << set.nodes[k] << ','
                << csv::format_double(set.scores[k]) << ',' << to_string(strategy) << '\n';
    }
    return out.str();
}

int cmd_identify(const CommonOpts& opts, const std::string& run_dir,
                 const std::string& edges, const std::string& nodes,
                 const std::string& series, const std::string& out_file, int step) {
    PipelineConfig cfg = load_config(opts);
    GraphAndSeries in = load_inputs(run_dir, edges, nodes, series);
    const IdentifyConfig& icfg = cfg.identify;
    Spectrum spectrum;
    const Spectrum* spec_ptr = nullptr;
    if (icfg.strategy == Strategy::HPF) {
        spectrum = eigendecompose(laplacian(in.graph));
        spec_ptr = &spectrum;
    }
    std::vector<InfluentialSet> sets;
    if (step > 0) {
        sets.push_back(identify(in.graph, in.series, step, icfg, spec_ptr));
    } else {
        for (int t = icfg.r; t <= in.series.steps(); ++t)
            sets.push_back(identify(in.graph, in.series, t, icfg, spec_ptr));
    }
    csv::atomic_write(out_file, influential_csv(sets, icfg.strategy, in.series.time_axis));
    std::printf("identified top %s%% per step -> %s\n",
                csv::format_double(icfg.p).c_str(), out_file.c_str());
    return 0;
}

int cmd_control(const CommonOpts& opts, const std::string& out_dir) {
    PipelineConfig cfg = load_config(opts);
    Graph g = cfg.make_graph();
    SirParams params = cfg.make_sir_params(g.size());
    const int horizon = cfg.scenario.horizon;

    ScenarioSpec spec = cfg.scenario;
    InterventionPlan plan;
    plan.lag = cfg.plan.lag;
    std::vector<int> triggers;
    if (!cfg.plan.stage_steps.empty()) {
        triggers = cfg.plan.stage_steps;
    } else {
        // trigger steps from the uncontrolled peak of a probe run
        ScenarioSpec probe_spec = spec;
        probe_spec.event_times.clear();
        Scenario probe_sc = make_scenario(probe_spec, g, derive_seed(cfg.seed, 1));
        RunRecord probe = integrate(g, params, probe_sc.init, cfg.integrator, horizon);
        const int peak = peak_time(probe);
        int prev = 0;
        for (double f : cfg.plan.stage_fractions) {
            const int trigger = std::max(
                {cfg.identify.r, static_cast<int>(std::floor(f * peak)), prev + 1});
            triggers.push_back(trigger);
            prev = trigger;
        }
    }
    if (triggers.size() != cfg.plan.stage_percents.size())
        throw ConfigError("plan stages and percentages must pair up");
    if (spec.kind == ScenarioKind::MultipleInfections && spec.event_times.empty())
        for (int t : triggers) spec.event_times.push_back(t);
    for (size_t k = 0; k < triggers.size(); ++k)
        plan.stages.push_back({triggers[k], cfg.plan.stage_percents[k]});

    Scenario sc = make_scenario(spec, g, derive_seed(cfg.seed, 1));
    ControlOutcome out = staged_control(g, params, sc.init, sc.schedule, horizon, plan,
                                        cfg.identify, cfg.integrator);
    RunRecord uncontrolled =
        integrate(g, params, sc.init, cfg.integrator, horizon, sc.schedule);

    nlohmann::json j;
    j["lag"] = plan.lag;
    nlohmann::json stages = nlohmann::json::array();
    for (size_t k = 0; k < plan.stages.size(); ++k) {
        stages.push_back({{"trigger_step", plan.stages[k].trigger_step},
                          {"percent", plan.stages[k].percent},
                          {"isolated", out.stage_sets[k].nodes}});
    }
    j["stages"] = stages;
    j["isolated_total"] = out.isolated;
    j["final_cumulative"] = out.cumulative_curve(horizon - 1);
    j["accumulated_total"] = out.cumulative_curve.sum();
    j["uncontrolled_accumulated_total"] =
        cumulative_infection(uncontrolled.series).sum();
    j["strategy"] = to_string(cfg.identify.strategy);
    j["alpha"] = cfg.identify.alpha;
    j["seed"] = cfg.seed;
    csv::atomic_write((fs::path(out_dir) / "control_outcome.json").string(),
                      j.dump(2) + "\n");
    csv::atomic_write((fs::path(out_dir) / "controlled_infection.csv").string(),
                      matrix_csv(out.controlled_series.values,
                                 out.controlled_series.time_axis));
    std::ostringstream curve;
    curve << "time,total_infection,accumulated\n";
    Eigen::VectorXd acc = accumulated_infection_curve(out.cumulative_curve);
    for (int t = 0; t < horizon; ++t)
        curve << csv::format_double(out.controlled_series.time_axis[t]) << ','
              << csv::format_double(out.cumulative_curve(t)) << ','
              << csv::format_double(acc(t)) << '\n';
    csv::atomic_write((fs::path(out_dir) / "cumulative.csv").string(), curve.str());
    cfg.save((fs::path(out_dir) / "config_used.json").string());
    std::printf("staged control (%zu stages) -> %s\n", plan.stages.size(), out_dir.c_str());
    return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& out_dir) {
    PipelineConfig cfg = load_config(opts);
    Graph g = cfg.make_graph();
    SirParams params = cfg.make_sir_params(g.size());

    SweepConfig scfg;
    scfg.alpha_grid = parse_alpha_grid(cfg.sweep.alpha_grid);
    scfg.trials = cfg.sweep.trials;
    scfg.method_trials = cfg.sweep.method_trials;
    scfg.methods.clear();
    for (const auto& m : cfg.sweep.methods) scfg.methods.push_back(strategy_from_string(m));
    scfg.stage_fractions = cfg.plan.stage_fractions;
    scfg.stage_percents = cfg.plan.stage_percents;
    scfg.lag = cfg.plan.lag;
    scfg.identify = cfg.identify;
    scfg.integrator = cfg.integrator;
    scfg.scenario = cfg.scenario;
    scfg.scenario.kind = ScenarioKind::MultipleInfections;
    scfg.threads = cfg.sweep.threads;
    SweepResult res = alpha_sweep(g, params, scfg, cfg.seed);

    std::ostringstream sweep_csv;
    sweep_csv << "trial,alpha,final_cumulative\n";
    for (int trial = 0; trial < scfg.trials; ++trial)
        for (size_t ai = 0; ai < res.alpha_grid.size(); ++ai)
            sweep_csv << trial << ',' << csv::format_double(res.alpha_grid[ai]) << ','
                      << csv::format_double(res.alpha_final(trial, static_cast<int>(ai)))
                      << '\n';
    csv::atomic_write((fs::path(out_dir) / "sweep.csv").string(), sweep_csv.str());

    std::ostringstream best_csv;
    best_csv << "trial,best_alpha,best_final,no_control_final,peak_step\n";
    for (const auto& tr : res.trials)
        best_csv << tr.trial << ',' << csv::format_double(tr.best_alpha) << ','
                 << csv::format_double(tr.best_final) << ','
                 << csv::format_double(tr.no_control_final) << ',' << tr.peak_step << '\n';
    csv::atomic_write((fs::path(out_dir) / "best_alpha.csv").string(), best_csv.str());

    std::ostringstream curves;
    curves << "method,time,mean_cumulative\n";
    for (size_t m = 0; m < res.curve_names.size(); ++m)
        for (int t = 0; t < res.mean_curves.cols(); ++t)
            curves << res.curve_names[m] << ',' << (t + 1) << ','
                   << csv::format_double(res.mean_curves(static_cast<int>(m), t)) << '\n';
    csv::atomic_write((fs::path(out_dir) / "method_curves.csv").string(), curves.str());
    cfg.save((fs::path(out_dir) / "config_used.json").string());
    std::printf("swept %zu alpha values x %d trials -> %s\n", res.alpha_grid.size(),
                scfg.trials, out_dir.c_str());
    return 0;
}

int cmd_ingest(const CommonOpts& opts, const std::string& regions,
               const std::string& cases, const std::string& out_dir, bool repair_flag,
               bool daily_flag) {
    PipelineConfig cfg = load_config(opts);
    IngestOptions io;
    io.repair = cfg.ingest.repair || repair_flag;
    CaseTable table = ingest_cases(regions, cases, io);
    GeoGraphConfig gcfg{cfg.ingest.threshold_km, cfg.ingest.sigma_km, cfg.ingest.planar};
    Graph g = build_geo_graph(table.regions, gcfg);
    SignalSeries series = normalize_signal(table, cfg.ingest.daily || daily_flag);

    save_graph(g, (fs::path(out_dir) / "edges.csv").string(),
               (fs::path(out_dir) / "nodes.csv").string());
    export_case_table(table, (fs::path(out_dir) / "case_table.csv").string());
    csv::atomic_write((fs::path(out_dir) / "series.csv").string(),
                      matrix_csv(series.values, series.time_axis));
    std::ostringstream rg;
    rg << "node,region_id,label,lat,lon,population\n";
    for (size_t k = 0; k < table.regions.size(); ++k) {
        const auto& r = table.regions[k];
        rg << k << ',' << csv::quote(r.id) << ',' << csv::quote(r.label) << ','
           << csv::format_double(r.lat) << ',' << csv::format_double(r.lon) << ','
           << csv::format_double(r.population) << '\n';
    }
    csv::atomic_write((fs::path(out_dir) / "region_map.csv").string(), rg.str());
    std::printf("ingested %zu regions x %zu dates, %ld graph edges -> %s\n",
                table.regions.size(), table.dates.size(), g.edge_count(), out_dir.c_str());
    return 0;
}

int cmd_report(const CommonOpts& opts, const std::string& run_dir,
               const std::string& edges, const std::string& nodes,
               const std::string& series, const std::string& out_file, int step) {
    PipelineConfig cfg = load_config(opts);
    GraphAndSeries in = load_inputs(run_dir, edges, nodes, series);
    const auto& rc = cfg.report;
    const int t_end = step > 0 ? step : in.series.steps();
    if (t_end < rc.r || t_end > in.series.steps())
        throw ConfigError("report window does not fit the series");
    SignalSeries window = in.series.window(t_end - rc.r, rc.r);

    Eigen::MatrixXd field;
    if (rc.metric == "TLV") {
        VariationField f = rc.normalized ? tlv_normalized(in.graph, window, rc.alpha)
                                         : tlv(in.graph, window, rc.alpha);
        field = f.values;
        // plotting rule: negative entries fall back to their local-variation
        // component; identification never uses this transformation
        Eigen::MatrixXd lv = local_variation_series(in.graph, window.values);
        double lv_scale = 1.0;
        if (rc.normalized) {
            const double max_lv = lv.maxCoeff();
            lv_scale = max_lv > 0 ? 1.0 / max_lv : 0.0;
        }
        for (int i = 0; i < field.rows(); ++i)
            for (int t = 0; t < field.cols(); ++t)
                if (field(i, t) < 0.0)
                    field(i, t) = (1.0 - rc.alpha) * lv(i, t) * lv_scale;
    } else if (rc.metric == "LV") {
        field = local_variation_series(in.graph, window.values);
    } else { // TV: squared one-step differences
        field = temporal_variation(window.values);
    }

    const double max_val = field.maxCoeff();
    const double floor_db = rc.db_floor;
    std::ostringstream out;
    out << "node,time,value_db,x,y\n";
    for (int t = 0; t < field.cols(); ++t)
        for (int i = 0; i < field.rows(); ++i) {
            const double scaled = max_val > 0 ? field(i, t) / max_val : 0.0;
            const double db = scaled > std::pow(10.0, floor_db / 10.0)
                                  ? 10.0 * std::log10(scaled)
                                  : floor_db;
            out << i << ',' << csv::format_double(window.time_axis[t]) << ','
                << csv::format_double(db);
            if (in.graph.has_coords())
                out << ',' << csv::format_double(in.graph.coords()(i, 0)) << ','
                    << csv::format_double(in.graph.coords()(i, 1));
            else
                out << ",,";
            out << '\n';
        }
    csv::atomic_write(out_file, out.str());
    std::printf("plot field (%s, window %d..%d) -> %s\n", rc.metric.c_str(),
                t_end - rc.r + 1, t_end, out_file.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph-signal variation toolkit for epidemic networks"};
    app.require_subcommand(1);

    CommonOpts common;
    std::string out_dir, out_file;
    std::string edges, nodes, series, run_dir, regions, cases;
    bool full_state = false, h1n1 = false, repair = false, daily = false;
    int step = 0;

    auto* graph_cmd = app.add_subcommand("graph", "generate, validate or convert graphs");
    graph_cmd->require_subcommand(1);
    auto* g_gen = graph_cmd->add_subcommand("generate", "build the configured graph");
    add_common(g_gen, common);
    g_gen->add_option("--out-dir", out_dir, "output directory")->required();
    auto* g_val = graph_cmd->add_subcommand("validate", "check a stored graph");
    g_val->add_option("--edges", edges, "edge list CSV")->required();
    g_val->add_option("--nodes", nodes, "node table CSV");
    auto* g_conv = graph_cmd->add_subcommand("convert", "re-emit a graph in canonical form");
    g_conv->add_option("--edges", edges, "edge list CSV")->required();
    g_conv->add_option("--nodes", nodes, "node table CSV");
    g_conv->add_option("--out-dir", out_dir, "output directory")->required();

    auto* sim = app.add_subcommand("simulate", "run an epidemic scenario");
    add_common(sim, common);
    sim->add_option("--out-dir", out_dir, "output directory")->required();
    sim->add_flag("--full-state", full_state, "also record S and R compartments");
    sim->add_flag("--h1n1", h1n1, "use the hybrid airport configuration section");

    auto* ident = app.add_subcommand("identify", "rank influential nodes over time");
    add_common(ident, common);
    ident->add_option("--run-dir", run_dir, "simulate output directory");
    ident->add_option("--edges", edges, "edge list CSV (with --series)");
    ident->add_option("--nodes", nodes, "node table CSV");
    ident->add_option("--series", series, "signal matrix CSV");
    ident->add_option("--step", step, "single step to analyze (default: every step)");
    ident->add_option("--out", out_file, "output CSV")->required();

    auto* ctl = app.add_subcommand("control", "staged isolation experiment");
    add_common(ctl, common);
    ctl->add_option("--out-dir", out_dir, "output directory")->required();

    auto* sweep = app.add_subcommand("sweep", "Monte Carlo alpha sweep");
    add_common(sweep, common);
    sweep->add_option("--out-dir", out_dir, "output directory")->required();

    auto* ing = app.add_subcommand("ingest", "load region/case data into graph + signal");
    add_common(ing, common);
    ing->add_option("--regions", regions, "regions CSV")->required();
    ing->add_option("--cases", cases, "cases CSV")->required();
    ing->add_option("--out-dir", out_dir, "output directory")->required();
    ing->add_flag("--repair", repair, "clamp non-monotone cumulative counts");
    ing->add_flag("--daily", daily, "emit daily first differences instead of cumulative");

    auto* rep = app.add_subcommand("report", "emit plot-ready dB-scaled variation field");
    add_common(rep, common);
    rep->add_option("--run-dir", run_dir, "simulate output directory");
    rep->add_option("--edges", edges, "edge list CSV (with --series)");
    rep->add_option("--nodes", nodes, "node table CSV");
    rep->add_option("--series", series, "signal matrix CSV");
    rep->add_option("--step", step, "window end step (default: last)");
    rep->add_option("--out", out_file, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (g_gen->parsed()) return cmd_graph_generate(common, out_dir);
        if (g_val->parsed()) return cmd_graph_validate(edges, nodes);
        if (g_conv->parsed()) return cmd_graph_convert(edges, nodes, out_dir);
        if (sim->parsed()) return cmd_simulate(common, out_dir, full_state, h1n1);
        if (ident->parsed())
            return cmd_identify(common, run_dir, edges, nodes, series, out_file, step);
        if (ctl->parsed()) return cmd_control(common, out_dir);
        if (sweep->parsed()) return cmd_sweep(common, out_dir);
        if (ing->parsed()) return cmd_ingest(common, regions, cases, out_dir, repair, daily);
        if (rep->parsed())
            return cmd_report(common, run_dir, edges, nodes, series, out_file, step);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error (configuration): %s\n", e.what());
        return 3;
    } catch (const ArgumentError& e) {
        std::fprintf(stderr, "error (validation): %s\n", e.what());
        return 3;
    } catch (const IngestError& e) {
        std::fprintf(stderr, "error (input data): %s\n", e.what());
        return 3;
    } catch (const IntegrationError& e) {
        std::fprintf(stderr, "error (integration): %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 2;
}
