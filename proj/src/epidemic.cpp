#include "gsv/epidemic.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gsv/csv.hpp"
#include "gsv/graph.hpp"
#include "gsv/rng.hpp"

namespace gsv {

namespace {
constexpr double kTimeEps = 1e-9;  // tolerance for matching boundary times
constexpr double kClampBand = 1e-9; // roundoff negativity forgiven below this
} // namespace

SirParams SirParams::uniform(int n, double beta, double gamma, double kappa) {
    SirParams p;
    p.beta = Eigen::VectorXd::Constant(n, beta);
    p.gamma = Eigen::VectorXd::Constant(n, gamma);
    p.kappa = kappa;
    p.validate(n);
    return p;
}

void SirParams::validate(int n) const {
    if (beta.size() != n || gamma.size() != n)
        throw ConfigError("rate vectors must have one entry per node");
    if ((beta.array() < 0).any() || (gamma.array() < 0).any() || kappa < 0)
        throw ConfigError("rates must be non-negative");
}

EpidemicState EpidemicState::susceptible(int n) {
    EpidemicState st;
    st.s = Eigen::VectorXd::Ones(n);
    st.i = Eigen::VectorXd::Zero(n);
    st.r = Eigen::VectorXd::Zero(n);
    return st;
}

void EpidemicState::validate() const {
    if (i.size() != s.size() || r.size() != s.size())
        throw ConfigError("compartment vectors must have equal length");
    auto in_range = [](const Eigen::VectorXd& v) {
        return (v.array() >= 0).all() && (v.array() <= 1).all();
    };
    if (!in_range(s) || !in_range(i) || !in_range(r))
        throw ConfigError("compartment fractions must lie in [0, 1]");
}

void IntegratorConfig::validate() const {
    if (!(output_dt > 0)) throw ConfigError("output_dt must be positive");
    if (!(rel_tol > 0) || !(abs_tol > 0)) throw ConfigError("tolerances must be positive");
    if (!(min_step > 0) || min_step > max_step)
        throw ConfigError("step bounds must satisfy 0 < min_step <= max_step");
}

std::string to_string(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::SinglePerturbation: return "single_perturbation";
    case ScenarioKind::DoublePerturbation: return "double_perturbation";
    case ScenarioKind::MultipleInfections: return "multiple_infections";
    case ScenarioKind::Custom: return "custom";
    }
    return "?";
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
    if (s == "single_perturbation") return ScenarioKind::SinglePerturbation;
    if (s == "double_perturbation") return ScenarioKind::DoublePerturbation;
    if (s == "multiple_infections") return ScenarioKind::MultipleInfections;
    if (s == "custom") return ScenarioKind::Custom;
    throw ConfigError("unknown scenario kind: " + s);
}

void ScenarioSpec::validate(int n) const {
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    if (!(initial_fraction > 0) || initial_fraction > 1)
        throw ConfigError("initial fraction must lie in (0, 1]");
    if (source_count < 1 && source_nodes.empty())
        throw ConfigError("scenario needs at least one source node");
    for (int v : source_nodes)
        if (v < 0 || v >= n) throw ConfigError("source node out of range");
    for (double t : event_times)
        if (t < 1 || t > horizon) throw ConfigError("event times must lie within the horizon");
    if (event_node_count < 0) throw ConfigError("event node count must be >= 0");
    if (event_beta < 0) throw ConfigError("event beta must be >= 0");
    const int sources = source_nodes.empty() ? source_count : static_cast<int>(source_nodes.size());
    if (sources > n) throw ConfigError("more source nodes than graph nodes");
    if (kind == ScenarioKind::MultipleInfections &&
        sources + static_cast<int>(event_times.size()) * event_node_count > n)
        throw ConfigError("not enough distinct nodes for the scheduled events");
}

LocalSirState sir_rhs_local(const LocalSirState& state, double beta, double gamma,
                            double population) {
    if (!(population > 0)) throw ArgumentError("population must be positive");
    const double infection = beta * state.s * state.i / population;
    const double recovery = gamma * state.i;
    return {-infection, infection - recovery, recovery};
}

namespace {

/// Coupled network dynamics on a fixed graph; state vectors are stacked as
/// [S; I; R]. Owns the sparse adjacency and scratch buffers for one run.
class SirSystem {
public:
    SirSystem(const Graph& g, const SirParams& params)
        : n_(g.size()), beta_(params.beta), gamma_(params.gamma), kappa_(params.kappa),
          deg_(g.weights().rowwise().sum()), w_(g.weights().sparseView()) {
        w_.makeCompressed();
        inv_deg_ = deg_.unaryExpr([](double d) { return d > 0 ? 1.0 / d : 0.0; });
        wy_.resize(n_, 3);
        infection_.resize(n_);
    }

    int n() const { return n_; }
    void set_beta(const std::vector<int>& nodes, double value) {
        for (int v : nodes) {
            if (v < 0 || v >= n_) throw ArgumentError("event node out of range");
            beta_(v) = value;
        }
    }

    void rhs(const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        using MapC = Eigen::Map<const Eigen::MatrixXd>;
        using Map = Eigen::Map<Eigen::MatrixXd>;
        MapC state(y.data(), n_, 3);
        Map out(dy.data(), n_, 3);
        wy_.noalias() = w_ * state;
        infection_ = beta_.array() * state.col(0).array() * state.col(1).array();
        const auto diffusion = [this, &state](int c) {
            return kappa_ * inv_deg_.array() *
                   (wy_.col(c).array() - deg_.array() * state.col(c).array());
        };
        out.col(0) = -infection_.array() + diffusion(0);
        out.col(1) = infection_.array() - gamma_.array() * state.col(1).array() + diffusion(1);
        out.col(2) = gamma_.array() * state.col(1).array() + diffusion(2);
    }

private:
    int n_;
    Eigen::VectorXd beta_, gamma_;
    double kappa_;
    Eigen::VectorXd deg_, inv_deg_;
    Eigen::SparseMatrix<double, Eigen::RowMajor> w_;
    Eigen::MatrixXd wy_;
    Eigen::VectorXd infection_;
};

class Rk4Stepper {
public:
    explicit Rk4Stepper(SirSystem& sys)
        : sys_(sys), size_(3 * sys.n()) {
        for (auto* v : {&k1_, &ks_, &stage_, &big_, &mid_, &fine_, &k1m_})
            v->resize(size_);
    }

    /// One classic RK4 step from y with precomputed k1 = f(y).
    void rk4(const Eigen::VectorXd& y, const Eigen::VectorXd& k1, double h,
             Eigen::VectorXd& out) {
        stage_ = y + (h / 2) * k1;
        sys_.rhs(stage_, ks_);
        out = k1 + 2.0 * ks_; // accumulates k1 + 2k2 + 2k3 + k4
        stage_ = y + (h / 2) * ks_;
        sys_.rhs(stage_, ks_);
        out += 2.0 * ks_;
        stage_ = y + h * ks_;
        sys_.rhs(stage_, ks_);
        out += ks_;
        out = y + (h / 6) * out;
    }

    /// Step-doubling attempt: full step vs two half steps. Returns the scaled
    /// error estimate and leaves the half-step result in fine().
    double attempt(const Eigen::VectorXd& y, double h, double abs_tol, double rel_tol) {
        if (!k1_valid_) {
            sys_.rhs(y, k1_);
            k1_valid_ = true;
        }
        rk4(y, k1_, h, big_);
        rk4(y, k1_, h / 2, mid_);
        sys_.rhs(mid_, k1m_);
        rk4(mid_, k1m_, h / 2, fine_);
        double err = 0.0;
        for (int k = 0; k < size_; ++k) {
            const double scale =
                abs_tol + rel_tol * std::max(std::abs(y(k)), std::abs(fine_(k)));
            err = std::max(err, std::abs(fine_(k) - big_(k)) / scale);
        }
        return err;
    }

    const Eigen::VectorXd& fine() const { return fine_; }
    void invalidate() { k1_valid_ = false; }

private:
    SirSystem& sys_;
    int size_;
    bool k1_valid_ = false;
    Eigen::VectorXd k1_, ks_, stage_, big_, mid_, fine_, k1m_;
};

void clamp_state(Eigen::VectorXd& y, double t) {
    for (int k = 0; k < y.size(); ++k) {
        if (y(k) < 0.0) {
            if (y(k) >= -kClampBand)
                y(k) = 0.0;
            else
                throw IntegrationError("compartment went negative beyond roundoff", t);
        }
    }
}

/// Advances y from t to exactly `target`, adapting h in place.
void advance_to(Rk4Stepper& stepper, Eigen::VectorXd& y, double& t, double target,
                double& h, const IntegratorConfig& cfg) {
    while (t < target) {
        const bool to_target = (target - t) <= h;
        const double h_try = to_target ? (target - t) : h;
        const double err = stepper.attempt(y, h_try, cfg.abs_tol, cfg.rel_tol);
        if (err <= 1.0) {
            y = stepper.fine();
            t = to_target ? target : t + h_try;
            clamp_state(y, t);
            stepper.invalidate();
            const double factor =
                err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
            const double h_next = std::clamp(h_try * factor, cfg.min_step, cfg.max_step);
            h = to_target ? std::max(h, h_next) : h_next;
        } else {
            const double h_new = h_try * std::max(0.2, 0.9 * std::pow(err, -0.2));
            if (h_new < cfg.min_step)
                throw IntegrationError("step size underflow (stiffness?)", t);
            h = h_new;
        }
    }
}

Eigen::VectorXd pack_state(const EpidemicState& st) {
    Eigen::VectorXd y(3 * st.size());
    y << st.s, st.i, st.r;
    return y;
}

EpidemicState unpack_state(const Eigen::VectorXd& y) {
    const int n = static_cast<int>(y.size()) / 3;
    return EpidemicState{y.head(n), y.segment(n, n), y.tail(n)};
}

} // namespace

void network_rhs(const EpidemicState& state, const SirParams& params, const Graph& g,
                 EpidemicState& out) {
    if (state.size() != g.size()) throw ArgumentError("state size does not match graph");
    params.validate(g.size());
    SirSystem sys(g, params);
    Eigen::VectorXd y = pack_state(state);
    Eigen::VectorXd dy(y.size());
    sys.rhs(y, dy);
    out = unpack_state(dy);
}

void integrate_span(const Graph& g, SirParams& params, EpidemicState& state,
                    double t_begin, double t_end, const IntegratorConfig& cfg,
                    const Schedule& schedule,
                    const std::function<void(int, const EpidemicState&)>& record,
                    double grid_anchor) {
    cfg.validate();
    params.validate(g.size());
    if (t_end < t_begin) throw ArgumentError("t_end must be >= t_begin");

    struct Boundary {
        double time;
        long grid_index;             // -1 when not a grid point
        std::vector<size_t> events;  // schedule indices firing here
    };
    const double dt = cfg.output_dt;
    const long k_begin = std::lround((t_begin - grid_anchor) / dt);
    const long k_end = std::lround((t_end - grid_anchor) / dt);
    if (std::abs(grid_anchor + k_begin * dt - t_begin) > kTimeEps ||
        std::abs(grid_anchor + k_end * dt - t_end) > kTimeEps)
        throw ArgumentError("span bounds must lie on the output grid");

    std::vector<Boundary> boundaries;
    boundaries.reserve(k_end - k_begin + schedule.size());
    for (long k = k_begin + 1; k <= k_end; ++k)
        boundaries.push_back({grid_anchor + k * dt, k, {}});
    for (size_t e = 0; e < schedule.size(); ++e) {
        const double te = schedule[e].time;
        if (te <= t_begin + kTimeEps || te > t_end + kTimeEps) continue;
        auto it = std::lower_bound(boundaries.begin(), boundaries.end(), te - kTimeEps,
                                   [](const Boundary& b, double v) { return b.time < v; });
        if (it != boundaries.end() && std::abs(it->time - te) <= kTimeEps) {
            it->events.push_back(e);
        } else {
            boundaries.insert(it, Boundary{te, -1, {e}});
        }
    }

    SirSystem sys(g, params);
    Rk4Stepper stepper(sys);
    Eigen::VectorXd y = pack_state(state);
    double t = t_begin;
    double h = std::min(cfg.max_step, dt);
    for (const auto& b : boundaries) {
        advance_to(stepper, y, t, b.time, h, cfg);
        if (b.grid_index >= 0 && record)
            record(static_cast<int>(b.grid_index), unpack_state(y));
        for (size_t e : b.events) {
            sys.set_beta(schedule[e].nodes, schedule[e].beta);
            for (int v : schedule[e].nodes) params.beta(v) = schedule[e].beta;
            stepper.invalidate();
        }
    }
    state = unpack_state(y);
}

RunRecord integrate(const Graph& g, const SirParams& params, const EpidemicState& init,
                    const IntegratorConfig& cfg, int horizon, const Schedule& schedule,
                    bool record_full_state) {
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    init.validate();
    if (init.size() != g.size()) throw ArgumentError("state size does not match graph");

    RunRecord run;
    run.params = params;
    run.integrator = cfg;
    run.schedule = schedule;
    run.graph_hash = graph_hash(g);

    const int n = g.size();
    run.series.values.resize(n, horizon);
    run.series.time_axis.resize(horizon);
    for (int k = 0; k < horizon; ++k) run.series.time_axis[k] = 1.0 + k * cfg.output_dt;
    if (record_full_state) {
        run.full_s = Eigen::MatrixXd(n, horizon);
        run.full_r = Eigen::MatrixXd(n, horizon);
    }

    auto record = [&run, record_full_state](int k, const EpidemicState& st) {
        run.series.values.col(k) = st.i;
        if (record_full_state) {
            run.full_s->col(k) = st.s;
            run.full_r->col(k) = st.r;
        }
    };
    record(0, init);

    SirParams live = params;
    for (const auto& ev : schedule)
        if (ev.time <= 1.0 + kTimeEps)
            for (int v : ev.nodes) live.beta(v) = ev.beta;

    EpidemicState state = init;
    if (horizon > 1)
        integrate_span(g, live, state, 1.0, 1.0 + (horizon - 1) * cfg.output_dt, cfg,
                       schedule, record);
    return run;
}

EpidemicState integrate_fixed(const Graph& g, const SirParams& params,
                              const EpidemicState& init, double t0, double t1, double h) {
    if (!(h > 0)) throw ArgumentError("step size must be positive");
    const double span = t1 - t0;
    const long n_steps = std::lround(span / h);
    if (n_steps < 0 || std::abs(n_steps * h - span) > 1e-9)
        throw ArgumentError("step size must divide the integration span");
    SirParams live = params;
    SirSystem sys(g, live);
    Rk4Stepper stepper(sys);
    Eigen::VectorXd y = pack_state(init);
    Eigen::VectorXd k1(y.size());
    Eigen::VectorXd next(y.size());
    for (long k = 0; k < n_steps; ++k) {
        sys.rhs(y, k1);
        stepper.rk4(y, k1, h, next);
        y = next;
    }
    return unpack_state(y);
}

Scenario make_scenario(const ScenarioSpec& spec, const Graph& g, std::uint64_t seed) {
    const int n = g.size();
    spec.validate(n);
    Rng rng(seed);

    Scenario sc;
    sc.sources = spec.source_nodes.empty() ? rng.sample(n, spec.source_count)
                                           : spec.source_nodes;
    sc.init = EpidemicState::susceptible(n);
    for (int v : sc.sources) {
        sc.init.i(v) = spec.initial_fraction;
        sc.init.s(v) = 1.0 - spec.initial_fraction;
    }

    switch (spec.kind) {
    case ScenarioKind::SinglePerturbation:
    case ScenarioKind::Custom:
        break;
    case ScenarioKind::DoublePerturbation:
        for (double t : spec.event_times)
            sc.schedule.push_back({t, sc.sources, spec.event_beta});
        break;
    case ScenarioKind::MultipleInfections: {
        std::vector<int> pool;
        std::vector<char> used(n, 0);
        for (int v : sc.sources) used[v] = 1;
        for (int v = 0; v < n; ++v)
            if (!used[v]) pool.push_back(v);
        for (double t : spec.event_times) {
            if (static_cast<int>(pool.size()) < spec.event_node_count)
                throw ConfigError("not enough distinct nodes for the scheduled events");
            std::vector<int> chosen;
            for (int k = 0; k < spec.event_node_count; ++k) {
                const size_t idx = rng.uniform_below(pool.size());
                chosen.push_back(pool[idx]);
                pool[idx] = pool.back();
                pool.pop_back();
            }
            std::sort(chosen.begin(), chosen.end());
            sc.schedule.push_back({t, std::move(chosen), spec.event_beta});
        }
        break;
    }
    }
    std::stable_sort(sc.schedule.begin(), sc.schedule.end(),
                     [](const BetaEvent& a, const BetaEvent& b) { return a.time < b.time; });
    return sc;
}

std::pair<SirParams, Scenario> h1n1_config(const Graph& g, const H1n1Config& cfg,
                                           std::uint64_t seed) {
    const int n = g.size();
    if (cfg.source_node < 0 || cfg.source_node >= n)
        throw ConfigError("source node out of range");
    SirParams params = SirParams::uniform(n, cfg.beta, cfg.gamma, cfg.kappa);

    Scenario sc;
    sc.sources = {cfg.source_node};
    sc.init = EpidemicState::susceptible(n);
    sc.init.i(cfg.source_node) = cfg.initial_fraction;
    sc.init.s(cfg.source_node) = 1.0 - cfg.initial_fraction;
    if (cfg.super_spreader) {
        Rng rng(seed);
        const int per_event = static_cast<int>(std::ceil(cfg.event_fraction * n));
        for (double t : cfg.event_times) {
            std::vector<int> nodes = rng.sample(n, per_event);
            std::sort(nodes.begin(), nodes.end());
            sc.schedule.push_back({t, std::move(nodes), cfg.event_beta});
        }
    }
    return {std::move(params), std::move(sc)};
}

namespace {

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

} // namespace

void save_run(const RunRecord& run, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json j;
    j["n"] = run.series.nodes();
    j["horizon"] = run.series.steps();
    j["graph_hash"] = run.graph_hash;
    j["seed"] = run.seed;
    j["scenario_kind"] = to_string(run.scenario_kind);
    j["sources"] = run.sources;
    nlohmann::json events = nlohmann::json::array();
    for (const auto& ev : run.schedule)
        events.push_back({{"time", ev.time}, {"nodes", ev.nodes}, {"beta", ev.beta}});
    j["schedule"] = events;
    j["params"] = {{"beta", std::vector<double>(run.params.beta.begin(), run.params.beta.end())},
                   {"gamma", std::vector<double>(run.params.gamma.begin(), run.params.gamma.end())},
                   {"kappa", run.params.kappa}};
    j["integrator"] = {{"output_dt", run.integrator.output_dt},
                       {"rel_tol", run.integrator.rel_tol},
                       {"abs_tol", run.integrator.abs_tol},
                       {"max_step", run.integrator.max_step},
                       {"min_step", run.integrator.min_step}};
    j["full_state"] = run.full_s.has_value();
    csv::atomic_write((fs::path(dir) / "run.json").string(), j.dump(2) + "\n");
    csv::atomic_write((fs::path(dir) / "infection.csv").string(),
                      matrix_csv(run.series.values, run.series.time_axis));
    if (run.full_s) {
        std::ostringstream out;
        out << "node,compartment";
        for (double t : run.series.time_axis) out << ',' << csv::format_double(t);
        out << '\n';
        for (int i = 0; i < run.series.nodes(); ++i) {
            const char* names[3] = {"s", "i", "r"};
            const Eigen::MatrixXd* mats[3] = {&*run.full_s, &run.series.values, &*run.full_r};
            for (int c = 0; c < 3; ++c) {
                out << i << ',' << names[c];
                for (int t = 0; t < run.series.steps(); ++t)
                    out << ',' << csv::format_double((*mats[c])(i, t));
                out << '\n';
            }
        }
        csv::atomic_write((fs::path(dir) / "sir.csv").string(), out.str());
    }
}

RunRecord load_run(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream in(fs::path(dir) / "run.json");
    if (!in) throw IngestError("cannot open " + dir + "/run.json");
    nlohmann::json j = nlohmann::json::parse(in);

    RunRecord run;
    const int n = j.at("n").get<int>();
    const int horizon = j.at("horizon").get<int>();
    run.graph_hash = j.at("graph_hash").get<std::uint64_t>();
    run.seed = j.at("seed").get<std::uint64_t>();
    run.scenario_kind = scenario_kind_from_string(j.at("scenario_kind").get<std::string>());
    run.sources = j.at("sources").get<std::vector<int>>();
    for (const auto& ev : j.at("schedule"))
        run.schedule.push_back({ev.at("time").get<double>(),
                                ev.at("nodes").get<std::vector<int>>(),
                                ev.at("beta").get<double>()});
    auto beta = j.at("params").at("beta").get<std::vector<double>>();
    auto gamma = j.at("params").at("gamma").get<std::vector<double>>();
    run.params.beta = Eigen::Map<Eigen::VectorXd>(beta.data(), beta.size());
    run.params.gamma = Eigen::Map<Eigen::VectorXd>(gamma.data(), gamma.size());
    run.params.kappa = j.at("params").at("kappa").get<double>();
    const auto& ji = j.at("integrator");
    run.integrator.output_dt = ji.at("output_dt").get<double>();
    run.integrator.rel_tol = ji.at("rel_tol").get<double>();
    run.integrator.abs_tol = ji.at("abs_tol").get<double>();
    run.integrator.max_step = ji.at("max_step").get<double>();
    run.integrator.min_step = ji.at("min_step").get<double>();

    auto table = csv::read_file((fs::path(dir) / "infection.csv").string());
    if (static_cast<int>(table.rows.size()) != n)
        throw IngestError("infection.csv row count does not match run.json");
    if (static_cast<int>(table.header.size()) != horizon + 1)
        throw IngestError("infection.csv column count does not match run.json");
    run.series.values.resize(n, horizon);
    run.series.time_axis.resize(horizon);
    for (int t = 0; t < horizon; ++t)
        run.series.time_axis[t] = csv::parse_double(table.header[t + 1], "infection.csv");
    for (const auto& row : table.rows) {
        const long i = csv::parse_long(row[0], "infection.csv");
        if (i < 0 || i >= n) throw IngestError("node id out of range in infection.csv");
        for (int t = 0; t < horizon; ++t)
            run.series.values(i, t) = csv::parse_double(row[t + 1], "infection.csv");
    }
    return run;
}

} // namespace gsv
