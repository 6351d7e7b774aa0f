#include "gsv/influence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "gsv/rng.hpp"
#include "gsv/variation.hpp"

namespace gsv {

std::string to_string(Strategy s) {
    switch (s) {
    case Strategy::Max: return "Max";
    case Strategy::HPF: return "HPF";
    case Strategy::LV: return "LV";
    case Strategy::TLV: return "TLV";
    case Strategy::SGWT: return "SGWT";
    case Strategy::BC: return "BC";
    case Strategy::CC: return "CC";
    }
    return "?";
}

Strategy strategy_from_string(const std::string& s) {
    for (Strategy v : {Strategy::Max, Strategy::HPF, Strategy::LV, Strategy::TLV,
                       Strategy::SGWT, Strategy::BC, Strategy::CC})
        if (to_string(v) == s) return v;
    throw ConfigError("unknown strategy: " + s);
}

void IdentifyConfig::validate() const {
    const bool temporal = strategy == Strategy::TLV || strategy == Strategy::SGWT ||
                          strategy == Strategy::HPF || strategy == Strategy::LV ||
                          strategy == Strategy::Max;
    if (temporal && r < 2) throw ConfigError("window length r must be >= 2");
    if (!(p > 0) || p > 100) throw ConfigError("top percentage must lie in (0, 100]");
    if (alpha < 0 || alpha > 1) throw ConfigError("alpha must lie in [0, 1]");
    if (!(hpf_fraction > 0) || hpf_fraction > 1)
        throw ConfigError("high-pass fraction must lie in (0, 1]");
}

void InterventionPlan::validate() const {
    if (lag < 0) throw ConfigError("lag must be >= 0");
    for (size_t k = 0; k < stages.size(); ++k) {
        if (!(stages[k].percent > 0) || stages[k].percent > 100)
            throw ConfigError("stage percentage must lie in (0, 100]");
        if (k > 0 && stages[k].trigger_step <= stages[k - 1].trigger_step)
            throw ConfigError("stage trigger steps must be strictly increasing");
    }
}

int top_count(double p, int n) {
    return static_cast<int>(std::ceil(p * n / 100.0));
}

namespace {

InfluentialSet rank_top(const Eigen::VectorXd& scores, double p, int step) {
    const int n = static_cast<int>(scores.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&scores](int a, int b) {
        if (scores(a) != scores(b)) return scores(a) > scores(b);
        return a < b;
    });
    const int count = std::min(n, top_count(p, n));
    InfluentialSet out;
    out.step = step;
    out.nodes.assign(order.begin(), order.begin() + count);
    out.scores.reserve(count);
    for (int v : out.nodes) out.scores.push_back(scores(v));
    return out;
}

} // namespace

InfluentialSet identify(const Graph& g, const SignalSeries& X, int step,
                        const IdentifyConfig& cfg, const Spectrum* spectrum) {
    cfg.validate();
    if (X.nodes() != g.size()) throw ArgumentError("signal rows do not match graph");
    const bool uses_window = cfg.strategy != Strategy::BC && cfg.strategy != Strategy::CC;
    if (uses_window && (step < cfg.r || step > X.steps()))
        throw ArgumentError("step must lie in [r, T] for windowed strategies");

    Eigen::VectorXd scores;
    switch (cfg.strategy) {
    case Strategy::Max:
        scores = X.values.col(step - 1);
        break;
    case Strategy::HPF: {
        if (!spectrum) throw ArgumentError("HPF strategy requires a spectrum");
        if (spectrum->size() != g.size())
            throw ArgumentError("spectrum size does not match graph");
        const Eigen::MatrixXd window = X.values.middleCols(step - cfg.r, cfg.r);
        const Eigen::MatrixXd filtered = graph_hpf(*spectrum, window, {cfg.hpf_fraction});
        scores = filtered.col(cfg.r - 1).cwiseAbs();
        break;
    }
    case Strategy::LV:
        scores = local_variation(g, Eigen::VectorXd(X.values.col(step - 1)));
        break;
    case Strategy::TLV: {
        const SignalSeries window = window_of(X, {cfg.r, step});
        const VariationField field = cfg.normalized ? tlv_normalized(g, window, cfg.alpha)
                                                    : tlv(g, window, cfg.alpha);
        scores = field.values.col(cfg.r - 1);
        break;
    }
    case Strategy::SGWT: {
        const SignalSeries window = window_of(X, {cfg.r, step});
        const SgwtCoefficients coeffs = sgwt_coefficients(g, window, cfg.sgwt);
        const Eigen::VectorXd agg = coeffs.aggregate_magnitude();
        // score spatial nodes by their final-slice spatio-temporal coefficients
        scores = agg.segment(static_cast<long>(coeffs.n_time - 1) * coeffs.n_spatial,
                             coeffs.n_spatial);
        break;
    }
    case Strategy::BC: {
        auto bc = betweenness_centrality(g);
        scores = Eigen::Map<Eigen::VectorXd>(bc.data(), bc.size());
        break;
    }
    case Strategy::CC: {
        auto cc = closeness_centrality(g);
        scores = Eigen::Map<Eigen::VectorXd>(cc.data(), cc.size());
        break;
    }
    }
    return rank_top(scores, cfg.p, step);
}

std::pair<Graph, InfluentialSet> apply_control(const Graph& g, const SignalSeries& X,
                                               int control_step, const IdentifyConfig& cfg,
                                               const Spectrum* spectrum) {
    InfluentialSet set = identify(g, X, control_step, cfg, spectrum);
    return {isolate_nodes(g, set.nodes), std::move(set)};
}

ControlOutcome staged_control(const Graph& g, const SirParams& params,
                              const EpidemicState& init, const Schedule& schedule,
                              int horizon, const InterventionPlan& plan,
                              const IdentifyConfig& icfg, const IntegratorConfig& intcfg) {
    plan.validate();
    icfg.validate();
    init.validate();
    if (init.size() != g.size()) throw ArgumentError("state size does not match graph");
    for (const auto& stage : plan.stages) {
        const int action = stage.trigger_step + plan.lag;
        if (action < icfg.r || action > horizon)
            throw ConfigError("stage action step " + std::to_string(action) +
                              " outside [r, horizon]");
    }

    ControlOutcome out;
    const int n = g.size();
    out.controlled_series.values.resize(n, horizon);
    out.controlled_series.time_axis.resize(horizon);
    for (int k = 0; k < horizon; ++k)
        out.controlled_series.time_axis[k] = 1.0 + k * intcfg.output_dt;

    auto record = [&out](int k, const EpidemicState& st) {
        out.controlled_series.values.col(k) = st.i;
    };
    record(0, init);

    SirParams live = params;
    for (const auto& ev : schedule)
        if (ev.time <= 1.0 + 1e-9)
            for (int v : ev.nodes) live.beta(v) = ev.beta;

    EpidemicState state = init;
    Graph current = g;
    double t = 1.0;
    for (const auto& stage : plan.stages) {
        const double action_time = 1.0 + (stage.trigger_step + plan.lag - 1) * intcfg.output_dt;
        integrate_span(current, live, state, t, action_time, intcfg, schedule, record);
        t = action_time;

        IdentifyConfig stage_cfg = icfg;
        stage_cfg.p = stage.percent;
        const int action_step = stage.trigger_step + plan.lag;
        SignalSeries seen = out.controlled_series.window(0, action_step);
        Spectrum spectrum;
        const Spectrum* spec_ptr = nullptr;
        if (stage_cfg.strategy == Strategy::HPF) {
            spectrum = eigendecompose(laplacian(current));
            spec_ptr = &spectrum;
        }
        auto [controlled, set] = apply_control(current, seen, action_step, stage_cfg, spec_ptr);
        current = std::move(controlled);
        out.stage_sets.push_back(set);
        out.control_graphs.push_back(current);
        for (int v : set.nodes) out.isolated.push_back(v);
    }
    const double t_final = 1.0 + (horizon - 1) * intcfg.output_dt;
    if (t_final > t) integrate_span(current, live, state, t, t_final, intcfg, schedule, record);

    std::sort(out.isolated.begin(), out.isolated.end());
    out.isolated.erase(std::unique(out.isolated.begin(), out.isolated.end()),
                       out.isolated.end());
    out.cumulative_curve = cumulative_infection(out.controlled_series);
    return out;
}

int peak_time(const SignalSeries& series) {
    if (series.steps() < 1) throw ArgumentError("empty series");
    const Eigen::VectorXd totals = series.values.colwise().sum();
    int best = 0;
    for (int t = 1; t < totals.size(); ++t)
        if (totals(t) > totals(best)) best = t;
    return best + 1;
}

int peak_time(const RunRecord& run) {
    return peak_time(run.series);
}

Eigen::VectorXd cumulative_infection(const SignalSeries& series) {
    return series.values.colwise().sum().transpose();
}

Eigen::VectorXd accumulated_infection_curve(const Eigen::VectorXd& per_step_total) {
    Eigen::VectorXd acc(per_step_total.size());
    double running = 0.0;
    for (int t = 0; t < per_step_total.size(); ++t) {
        running += per_step_total(t);
        acc(t) = running;
    }
    return acc;
}

std::vector<double> parse_alpha_grid(const std::string& text) {
    auto to_double = [](const std::string& field) {
        try {
            size_t used = 0;
            const double v = std::stod(field, &used);
            if (used != field.size()) throw std::invalid_argument(field);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("bad alpha value '" + field + "'");
        }
    };
    std::vector<double> values;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        token.erase(std::remove_if(token.begin(), token.end(), ::isspace), token.end());
        if (token.empty()) continue;
        const size_t c1 = token.find(':');
        if (c1 == std::string::npos) {
            values.push_back(to_double(token));
            continue;
        }
        const size_t c2 = token.find(':', c1 + 1);
        if (c2 == std::string::npos) throw ConfigError("alpha range needs start:step:stop");
        const double start = to_double(token.substr(0, c1));
        const double step = to_double(token.substr(c1 + 1, c2 - c1 - 1));
        const double stop = to_double(token.substr(c2 + 1));
        if (!(step > 0)) throw ConfigError("alpha range step must be positive");
        const long count = std::lround((stop - start) / step);
        for (long k = 0; k <= count; ++k) {
            const double v = start + k * step;
            if (v <= stop + 1e-12) values.push_back(std::min(v, stop));
        }
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                 values.end());
    for (double v : values)
        if (v < 0 || v > 1) throw ConfigError("alpha values must lie in [0, 1]");
    if (values.empty()) throw ConfigError("alpha grid is empty");
    return values;
}

std::vector<double> default_alpha_grid() {
    return parse_alpha_grid("0:0.02:0.3,0.4:0.1:0.9,0.9:0.02:1");
}

namespace {

/// Runs jobs [0, count) on `threads` workers; results are written into
/// caller-owned slots indexed by job, so the merge order is deterministic.
void parallel_for(int count, int threads, const std::function<void(int)>& job) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int k = 0; k < count; ++k) job(k);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const int k = next.fetch_add(1);
                if (k >= count) return;
                try {
                    job(k);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

struct TrialContext {
    Scenario scenario;
    InterventionPlan plan;
    int peak_step = 0;
    double no_control_final = 0.0;
    Eigen::VectorXd no_control_curve;
};

} // namespace

SweepResult alpha_sweep(const Graph& g, const SirParams& params, const SweepConfig& cfg,
                        std::uint64_t master_seed) {
    if (cfg.trials < 1) throw ConfigError("sweep needs at least one trial");
    if (cfg.scenario.kind != ScenarioKind::MultipleInfections)
        throw ConfigError("alpha sweep expects a multiple-infections scenario");
    if (cfg.stage_fractions.size() != cfg.stage_percents.size())
        throw ConfigError("stage fractions and percentages must pair up");
    const std::vector<double> grid =
        cfg.alpha_grid.empty() ? default_alpha_grid() : cfg.alpha_grid;
    const int horizon = cfg.scenario.horizon;
    const int method_trials =
        cfg.method_trials < 0 ? cfg.trials : std::min(cfg.method_trials, cfg.trials);

    SweepResult result;
    result.alpha_grid = grid;
    result.method_trial_count = method_trials;
    result.trials.resize(cfg.trials);
    result.alpha_final.resize(cfg.trials, static_cast<int>(grid.size()));
    result.curve_names.push_back("none");
    for (Strategy m : cfg.methods) result.curve_names.push_back(to_string(m));
    result.curve_names.push_back("TLV");

    // phase 1: per-trial scenario, probe run, stage triggers, uncontrolled run
    std::vector<TrialContext> contexts(cfg.trials);
    parallel_for(cfg.trials, cfg.threads, [&](int trial) {
        const std::uint64_t trial_seed = derive_seed(master_seed, trial);
        ScenarioSpec probe_spec = cfg.scenario;
        probe_spec.event_times.clear();
        const Scenario probe_scenario = make_scenario(probe_spec, g, trial_seed);
        const RunRecord probe =
            integrate(g, params, probe_scenario.init, cfg.integrator, horizon);
        TrialContext& ctx = contexts[trial];
        ctx.peak_step = peak_time(probe);

        ScenarioSpec full_spec = cfg.scenario;
        full_spec.event_times.clear();
        ctx.plan.lag = cfg.lag;
        int prev = 0;
        for (size_t k = 0; k < cfg.stage_fractions.size(); ++k) {
            int trigger = static_cast<int>(std::floor(cfg.stage_fractions[k] * ctx.peak_step));
            trigger = std::max({trigger, cfg.identify.r, prev + 1});
            prev = trigger;
            full_spec.event_times.push_back(trigger);
            ctx.plan.stages.push_back({trigger, cfg.stage_percents[k]});
        }
        ctx.scenario = make_scenario(full_spec, g, trial_seed);

        const RunRecord uncontrolled = integrate(g, params, ctx.scenario.init,
                                                 cfg.integrator, horizon,
                                                 ctx.scenario.schedule);
        ctx.no_control_curve =
            accumulated_infection_curve(cumulative_infection(uncontrolled.series));
        ctx.no_control_final = ctx.no_control_curve(horizon - 1);
    });

    // phase 2: (trial, alpha) and (trial, method) cells
    const int alpha_cells = cfg.trials * static_cast<int>(grid.size());
    const int method_cells = method_trials * static_cast<int>(cfg.methods.size());
    Eigen::MatrixXd alpha_curves(cfg.trials, horizon);   // best-alpha curve per trial
    std::vector<double> best_alpha(cfg.trials), best_final(cfg.trials);
    Eigen::MatrixXd method_finals(method_trials, static_cast<int>(cfg.methods.size()));
    std::vector<Eigen::MatrixXd> method_curves(
        cfg.methods.size(), Eigen::MatrixXd(method_trials, horizon));

    parallel_for(alpha_cells + method_cells, cfg.threads, [&](int cell) {
        if (cell < alpha_cells) {
            const int trial = cell / static_cast<int>(grid.size());
            const int ai = cell % static_cast<int>(grid.size());
            const TrialContext& ctx = contexts[trial];
            IdentifyConfig icfg = cfg.identify;
            icfg.strategy = Strategy::TLV;
            icfg.alpha = grid[ai];
            const ControlOutcome outcome =
                staged_control(g, params, ctx.scenario.init, ctx.scenario.schedule, horizon,
                               ctx.plan, icfg, cfg.integrator);
            result.alpha_final(trial, ai) = outcome.cumulative_curve.sum();
        } else {
            const int mcell = cell - alpha_cells;
            const int trial = mcell / static_cast<int>(cfg.methods.size());
            const int mi = mcell % static_cast<int>(cfg.methods.size());
            const TrialContext& ctx = contexts[trial];
            IdentifyConfig icfg = cfg.identify;
            icfg.strategy = cfg.methods[mi];
            const ControlOutcome outcome =
                staged_control(g, params, ctx.scenario.init, ctx.scenario.schedule, horizon,
                               ctx.plan, icfg, cfg.integrator);
            method_finals(trial, mi) = outcome.cumulative_curve.sum();
            method_curves[mi].row(trial) =
                accumulated_infection_curve(outcome.cumulative_curve).transpose();
        }
    });

    // best alpha per trial; rerun the winner to keep its full curve
    parallel_for(cfg.trials, cfg.threads, [&](int trial) {
        int best = 0;
        for (int ai = 1; ai < static_cast<int>(grid.size()); ++ai)
            if (result.alpha_final(trial, ai) < result.alpha_final(trial, best)) best = ai;
        best_alpha[trial] = grid[best];
        best_final[trial] = result.alpha_final(trial, best);
        const TrialContext& ctx = contexts[trial];
        IdentifyConfig icfg = cfg.identify;
        icfg.strategy = Strategy::TLV;
        icfg.alpha = grid[best];
        const ControlOutcome outcome =
            staged_control(g, params, ctx.scenario.init, ctx.scenario.schedule, horizon,
                           ctx.plan, icfg, cfg.integrator);
        alpha_curves.row(trial) =
            accumulated_infection_curve(outcome.cumulative_curve).transpose();
    });

    for (int trial = 0; trial < cfg.trials; ++trial) {
        SweepTrial& row = result.trials[trial];
        row.trial = trial;
        row.peak_step = contexts[trial].peak_step;
        for (const auto& st : contexts[trial].plan.stages)
            row.stage_steps.push_back(st.trigger_step);
        row.best_alpha = best_alpha[trial];
        row.best_final = best_final[trial];
        row.no_control_final = contexts[trial].no_control_final;
        if (trial < method_trials)
            for (size_t mi = 0; mi < cfg.methods.size(); ++mi)
                row.method_final[to_string(cfg.methods[mi])] = method_finals(trial, mi);
    }

    result.mean_curves.resize(static_cast<int>(result.curve_names.size()), horizon);
    const double denom = std::max(1, method_trials);
    Eigen::VectorXd none_mean = Eigen::VectorXd::Zero(horizon);
    for (int trial = 0; trial < method_trials; ++trial)
        none_mean += contexts[trial].no_control_curve;
    result.mean_curves.row(0) = none_mean.transpose() / denom;
    for (size_t mi = 0; mi < cfg.methods.size(); ++mi)
        result.mean_curves.row(static_cast<int>(mi) + 1) =
            method_curves[mi].colwise().sum() / denom;
    result.mean_curves.row(static_cast<int>(result.curve_names.size()) - 1) =
        alpha_curves.topRows(method_trials).colwise().sum() / denom;
    return result;
}

} // namespace gsv
