#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "gsv/epidemic.hpp"
#include "gsv/graph.hpp"
#include "gsv/influence.hpp"

using namespace gsv;

namespace {

Graph two_node_unit() {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
    w(0, 1) = w(1, 0) = 1.0;
    return Graph(w);
}

EpidemicState seeded_state(int n, int source, double fraction) {
    EpidemicState st = EpidemicState::susceptible(n);
    st.i(source) = fraction;
    st.s(source) = 1.0 - fraction;
    return st;
}

} // namespace

TEST_CASE("local SIR derivative") {
    SUBCASE("disease-free equilibrium") {
        auto d = sir_rhs_local({900, 0, 100}, 0.3, 0.1, 1000);
        CHECK(d.s == 0.0);
        CHECK(d.i == 0.0);
        CHECK(d.r == 0.0);
    }
    SUBCASE("no transmission: pure recovery") {
        auto d = sir_rhs_local({800, 100, 100}, 0.0, 0.1, 1000);
        CHECK(d.s == 0.0);
        CHECK(d.i == doctest::Approx(-10.0));
        CHECK(d.r == doctest::Approx(10.0));
    }
    SUBCASE("worked example") {
        auto d = sir_rhs_local({800, 100, 100}, 0.3, 0.1, 1000);
        CHECK(d.s == doctest::Approx(-24.0));
        CHECK(d.i == doctest::Approx(14.0));
        CHECK(d.r == doctest::Approx(10.0));
        CHECK(d.s + d.i + d.r == 0.0);
    }
    SUBCASE("population must be positive") {
        CHECK_THROWS_AS(sir_rhs_local({1, 1, 1}, 0.1, 0.1, 0.0), ArgumentError);
    }
}

TEST_CASE("network rhs") {
    Graph g = two_node_unit();
    SUBCASE("kappa = 0 decouples the nodes") {
        SirParams p = SirParams::uniform(2, 0.3, 0.1, 0.0);
        EpidemicState st;
        st.s = Eigen::Vector2d{0.9, 1.0};
        st.i = Eigen::Vector2d{0.1, 0.0};
        st.r = Eigen::Vector2d{0.0, 0.0};
        EpidemicState d;
        network_rhs(st, p, g, d);
        CHECK(d.s(0) == doctest::Approx(-0.3 * 0.9 * 0.1));
        CHECK(d.i(0) == doctest::Approx(0.3 * 0.9 * 0.1 - 0.1 * 0.1));
        CHECK(d.s(1) == 0.0);
        CHECK(d.i(1) == 0.0);
    }
    SUBCASE("identical states kill the diffusion term") {
        SirParams p = SirParams::uniform(2, 0.3, 0.1, 0.5);
        EpidemicState st;
        st.s = Eigen::Vector2d{0.8, 0.8};
        st.i = Eigen::Vector2d{0.15, 0.15};
        st.r = Eigen::Vector2d{0.05, 0.05};
        EpidemicState coupled, isolated;
        network_rhs(st, p, g, coupled);
        SirParams p0 = p;
        p0.kappa = 0.0;
        network_rhs(st, p0, g, isolated);
        CHECK((coupled.s - isolated.s).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK((coupled.i - isolated.i).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK((coupled.r - isolated.r).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SUBCASE("two-node diffusion is antisymmetric") {
        const double kappa = 0.4;
        SirParams p = SirParams::uniform(2, 0.0, 0.0, kappa);
        EpidemicState st;
        st.s = Eigen::Vector2d{1.0, 0.5};
        st.i = Eigen::Vector2d{0.0, 0.0};
        st.r = Eigen::Vector2d{0.0, 0.0};
        EpidemicState d;
        network_rhs(st, p, g, d);
        CHECK(d.s(0) == doctest::Approx(-0.5 * kappa));
        CHECK(d.s(1) == doctest::Approx(0.5 * kappa));
    }
    SUBCASE("per-node derivative sum vanishes for normalized states") {
        Graph g4 = build_distance_graph({4, 5.0, 3.0, 0.0, 2});
        SirParams p = SirParams::uniform(4, 0.3, 0.1, 0.2);
        EpidemicState st;
        st.s = Eigen::Vector4d{0.9, 0.6, 1.0, 0.2};
        st.i = Eigen::Vector4d{0.1, 0.3, 0.0, 0.5};
        st.r = Eigen::Vector4d{0.0, 0.1, 0.0, 0.3};
        EpidemicState d;
        network_rhs(st, p, g4, d);
        CHECK((d.s + d.i + d.r).cwiseAbs().maxCoeff() <= 1e-14);
    }
    SUBCASE("isolated node has no diffusion") {
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
        w(0, 1) = w(1, 0) = 1.0; // node 2 isolated
        Graph g3(w);
        SirParams p = SirParams::uniform(3, 0.0, 0.0, 1.0);
        EpidemicState st;
        st.s = Eigen::Vector3d{1.0, 0.5, 0.25};
        st.i = Eigen::Vector3d::Zero();
        st.r = Eigen::Vector3d::Zero();
        EpidemicState d;
        network_rhs(st, p, g3, d);
        CHECK(d.s(2) == 0.0);
    }
}

TEST_CASE("integration against the closed-form decay") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(1, 1);
    Graph g(w);
    SirParams p = SirParams::uniform(1, 0.0, 0.1, 0.0);
    EpidemicState init = seeded_state(1, 0, 0.5);
    IntegratorConfig cfg;
    RunRecord run = integrate(g, p, init, cfg, 51);
    const double expected = 0.5 * std::exp(-0.1 * 50.0);
    CHECK(run.series.values(0, 50) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("output grid spacing does not drive accuracy") {
    Graph g = two_node_unit();
    SirParams p = SirParams::uniform(2, 0.3, 0.1, 0.1);
    EpidemicState init = seeded_state(2, 0, 0.01);
    IntegratorConfig coarse;
    coarse.output_dt = 1.0;
    IntegratorConfig fine = coarse;
    fine.output_dt = 0.5;
    RunRecord a = integrate(g, p, init, coarse, 41);
    RunRecord b = integrate(g, p, init, fine, 81);
    for (int k = 0; k < 41; ++k) {
        CHECK(a.series.time_axis[k] == b.series.time_axis[2 * k]);
        CHECK(std::abs(a.series.values(0, k) - b.series.values(0, 2 * k)) <= 1e-6);
        CHECK(std::abs(a.series.values(1, k) - b.series.values(1, 2 * k)) <= 1e-6);
    }
}

TEST_CASE("fixed-step RK4 shows fourth-order convergence") {
    Graph g = two_node_unit();
    SirParams p = SirParams::uniform(2, 0.3, 0.1, 0.1);
    EpidemicState init = seeded_state(2, 0, 0.1);
    const double t0 = 1.0, t1 = 21.0;
    EpidemicState ref = integrate_fixed(g, p, init, t0, t1, 1e-3);
    auto err = [&](double h) {
        EpidemicState got = integrate_fixed(g, p, init, t0, t1, h);
        double e = 0.0;
        e = std::max(e, (got.s - ref.s).cwiseAbs().maxCoeff());
        e = std::max(e, (got.i - ref.i).cwiseAbs().maxCoeff());
        e = std::max(e, (got.r - ref.r).cwiseAbs().maxCoeff());
        return e;
    };
    const double e1 = err(0.1), e2 = err(0.05), e3 = err(0.025);
    const double ratio1 = e1 / e2, ratio2 = e2 / e3;
    // h^4 scaling within a factor of 2
    CHECK(ratio1 > 8.0);
    CHECK(ratio1 < 32.0);
    CHECK(ratio2 > 8.0);
    CHECK(ratio2 < 32.0);
}

TEST_CASE("conservation and monotonicity") {
    Graph g = build_distance_graph({30, 10.0, 3.0, 0.0, 44});
    SirParams p = SirParams::uniform(30, 0.3, 0.1, 0.1);
    EpidemicState init = seeded_state(30, 3, 0.002);
    RunRecord run = integrate(g, p, init, {}, 200, {}, true);
    for (int t = 0; t < 200; ++t) {
        Eigen::VectorXd total =
            run.full_s->col(t) + run.series.values.col(t) + run.full_r->col(t);
        CHECK((total.array() - 1.0).abs().maxCoeff() <= 1e-6);
        CHECK(run.series.values.col(t).minCoeff() >= 0.0);
    }
    SUBCASE("recovered fraction is monotone without coupling") {
        SirParams p0 = SirParams::uniform(30, 0.3, 0.1, 0.0);
        RunRecord iso = integrate(g, p0, init, {}, 100, {}, true);
        for (int t = 1; t < 100; ++t)
            CHECK(((iso.full_r->col(t) - iso.full_r->col(t - 1)).array() >= -1e-12).all());
    }
}

TEST_CASE("determinism: identical inputs give bit-identical runs") {
    Graph g = build_distance_graph({20, 10.0, 3.0, 0.0, 8});
    SirParams p = SirParams::uniform(20, 0.3, 0.1, 0.1);
    EpidemicState init = seeded_state(20, 5, 0.002);
    Schedule sched{{25.0, {5}, 0.8}};
    RunRecord a = integrate(g, p, init, {}, 60, sched);
    RunRecord b = integrate(g, p, init, {}, 60, sched);
    CHECK(a.series.values == b.series.values);
}

TEST_CASE("beta events change the trajectory from the event time") {
    Graph g = two_node_unit();
    SirParams p = SirParams::uniform(2, 0.3, 0.1, 0.1);
    EpidemicState init = seeded_state(2, 0, 0.01);
    Schedule sched{{20.0, {0}, 0.8}};
    RunRecord with = integrate(g, p, init, {}, 40, sched);
    RunRecord without = integrate(g, p, init, {}, 40);
    for (int t = 0; t < 20; ++t)
        CHECK(with.series.values(0, t) == without.series.values(0, t));
    CHECK(with.series.values(0, 21) > without.series.values(0, 21));
}

TEST_CASE("stiffness guard raises an integration error") {
    Graph g = two_node_unit();
    SirParams p = SirParams::uniform(2, 0.3, 0.1, 0.1);
    EpidemicState init = seeded_state(2, 0, 0.01);
    IntegratorConfig cfg;
    cfg.min_step = 0.5;
    cfg.rel_tol = 1e-14;
    cfg.abs_tol = 1e-16;
    CHECK_THROWS_AS(integrate(g, p, init, cfg, 30), IntegrationError);
}

TEST_CASE("negativity beyond the roundoff band is an integrity error") {
    // absurd tolerances force acceptance of a wildly wrong step; the fast
    // recovery rate then drives compartments far below zero
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(1, 1);
    Graph g(w);
    SirParams p = SirParams::uniform(1, 0.0, 50.0, 0.0);
    EpidemicState init = seeded_state(1, 0, 0.5);
    IntegratorConfig cfg;
    cfg.rel_tol = 1e6;
    cfg.abs_tol = 1e6;
    cfg.max_step = 1.0;
    CHECK_THROWS_AS(integrate(g, p, init, cfg, 5), IntegrationError);
}

TEST_CASE("isolation consistency with single-node dynamics") {
    Graph g = build_distance_graph({10, 5.0, 3.0, 0.0, 3});
    SirParams p = SirParams::uniform(10, 0.3, 0.1, 0.1);
    EpidemicState init = seeded_state(10, 0, 0.01);

    // run to step 20, isolate nodes {2, 7}, continue to step 60
    RunRecord before = integrate(g, p, init, {}, 20, {}, true);
    EpidemicState at20;
    at20.s = before.full_s->col(19);
    at20.i = before.series.values.col(19);
    at20.r = before.full_r->col(19);
    Graph cut = isolate_nodes(g, {2, 7});
    SirParams pc = p;
    RunRecord after = integrate(cut, pc, at20, {}, 41, {}, true);

    Eigen::MatrixXd solo_w = Eigen::MatrixXd::Zero(1, 1);
    Graph solo(solo_w);
    for (int v : {2, 7}) {
        SirParams ps = SirParams::uniform(1, 0.3, 0.1, 0.1);
        EpidemicState s0;
        s0.s = Eigen::VectorXd::Constant(1, at20.s(v));
        s0.i = Eigen::VectorXd::Constant(1, at20.i(v));
        s0.r = Eigen::VectorXd::Constant(1, at20.r(v));
        RunRecord ref = integrate(solo, ps, s0, {}, 41);
        for (int t = 0; t < 41; ++t)
            CHECK(std::abs(after.series.values(v, t) - ref.series.values(0, t)) <= 2e-8);
    }
}

TEST_CASE("scenario construction") {
    Graph g = build_distance_graph({50, 10.0, 3.0, 0.0, 10});

    SUBCASE("single perturbation seeds exactly one node at the stated fraction") {
        ScenarioSpec spec;
        spec.kind = ScenarioKind::SinglePerturbation;
        spec.horizon = 100;
        Scenario sc = make_scenario(spec, g, 77);
        int nonzero = 0;
        for (int v = 0; v < 50; ++v)
            if (sc.init.i(v) != 0.0) {
                ++nonzero;
                CHECK(sc.init.i(v) == 0.002);
                CHECK(sc.init.s(v) == doctest::Approx(0.998));
            }
        CHECK(nonzero == 1);
        CHECK(sc.schedule.empty());
    }
    SUBCASE("double perturbation schedules a beta event on the source") {
        ScenarioSpec spec;
        spec.kind = ScenarioKind::DoublePerturbation;
        spec.horizon = 100;
        spec.event_times = {50.0};
        spec.event_beta = 0.8;
        Scenario sc = make_scenario(spec, g, 12);
        REQUIRE(sc.schedule.size() == 1);
        CHECK(sc.schedule[0].time == 50.0);
        CHECK(sc.schedule[0].beta == 0.8);
        CHECK(sc.schedule[0].nodes == sc.sources);
    }
    SUBCASE("multiple infections draw disjoint event sets") {
        ScenarioSpec spec;
        spec.kind = ScenarioKind::MultipleInfections;
        spec.source_count = 5;
        spec.horizon = 1000;
        spec.event_times = {100, 200, 300};
        spec.event_beta = 0.6;
        Scenario sc = make_scenario(spec, g, 5);
        REQUIRE(sc.schedule.size() == 3);
        std::set<int> seen(sc.sources.begin(), sc.sources.end());
        CHECK(seen.size() == 5);
        for (const auto& ev : sc.schedule) {
            CHECK(ev.nodes.size() == 5);
            CHECK(ev.beta == 0.6);
            for (int v : ev.nodes) CHECK(seen.insert(v).second); // no overlap
        }
    }
    SUBCASE("same seed reproduces the scenario") {
        ScenarioSpec spec;
        spec.kind = ScenarioKind::MultipleInfections;
        spec.source_count = 5;
        spec.horizon = 500;
        spec.event_times = {50, 100};
        Scenario a = make_scenario(spec, g, 31);
        Scenario b = make_scenario(spec, g, 31);
        CHECK(a.sources == b.sources);
        REQUIRE(a.schedule.size() == b.schedule.size());
        for (size_t k = 0; k < a.schedule.size(); ++k)
            CHECK(a.schedule[k].nodes == b.schedule[k].nodes);
    }
    SUBCASE("insufficient distinct nodes fails") {
        ScenarioSpec spec;
        spec.kind = ScenarioKind::MultipleInfections;
        spec.source_count = 20;
        spec.event_node_count = 15;
        spec.event_times = {10, 20, 30};
        spec.horizon = 100;
        CHECK_THROWS_AS(make_scenario(spec, g, 0), ConfigError);
    }
}

TEST_CASE("hybrid airport-style configuration") {
    Graph g = build_scale_free_graph({100, 3, 6});
    SUBCASE("defaults") {
        auto [params, sc] = h1n1_config(g);
        CHECK(params.kappa == 0.0028);
        CHECK(sc.sources == std::vector<int>{0});
        CHECK(sc.schedule.empty());
    }
    SUBCASE("super-spreader events hit 2% of nodes") {
        H1n1Config cfg;
        cfg.super_spreader = true;
        cfg.event_times = {50, 100, 150};
        auto [params, sc] = h1n1_config(g, cfg, 3);
        REQUIRE(sc.schedule.size() == 3);
        for (const auto& ev : sc.schedule) {
            CHECK(static_cast<int>(ev.nodes.size()) == 2); // ceil(0.02 * 100)
            CHECK(ev.beta == 0.8);
        }
    }
    SUBCASE("source has the earliest nonzero infection") {
        H1n1Config cfg;
        cfg.source_node = 7;
        cfg.horizon = 30;
        auto [params, sc] = h1n1_config(g, cfg);
        RunRecord run = integrate(g, params, sc.init, {}, 30, sc.schedule);
        CHECK(run.series.values(7, 0) > 0.0);
        for (int v = 0; v < 100; ++v)
            if (v != 7) CHECK(run.series.values(v, 0) == 0.0);
    }
}

TEST_CASE("airport-scale hybrid run") {
    // substitute network at full size; short horizon keeps this quick
    Graph g = build_scale_free_graph({1292, 3, 777});
    H1n1Config cfg;
    cfg.horizon = 40;
    auto [params, sc] = h1n1_config(g, cfg);
    CHECK(params.kappa == 0.0028);
    RunRecord run = integrate(g, params, sc.init, {}, 40, sc.schedule, true);
    CHECK(run.series.values(0, 0) == cfg.initial_fraction);
    for (int t = 0; t < 40; ++t) {
        Eigen::VectorXd total =
            run.full_s->col(t) + run.series.values.col(t) + run.full_r->col(t);
        CHECK((total.array() - 1.0).abs().maxCoeff() <= 1e-6);
    }
    // infection spreads outward from the designated source
    CHECK(run.series.values.col(39).sum() > run.series.values.col(0).sum());
}

TEST_CASE("run records persist and reload") {
    namespace fs = std::filesystem;
    Graph g = build_distance_graph({12, 10.0, 4.0, 0.0, 15});
    SirParams p = SirParams::uniform(12, 0.3, 0.1, 0.1);
    ScenarioSpec spec;
    spec.kind = ScenarioKind::SinglePerturbation;
    spec.horizon = 25;
    Scenario sc = make_scenario(spec, g, 9);
    RunRecord run = integrate(g, p, sc.init, {}, 25, sc.schedule, true);
    run.scenario_kind = spec.kind;
    run.sources = sc.sources;
    run.seed = 9;

    const fs::path dir = fs::temp_directory_path() / "gsv_run_io_test";
    save_run(run, dir.string());
    RunRecord back = load_run(dir.string());
    CHECK(back.series.values == run.series.values); // bit-exact round trip
    CHECK(back.series.time_axis == run.series.time_axis);
    CHECK(back.sources == run.sources);
    CHECK(back.params.kappa == run.params.kappa);
    fs::remove_all(dir);
}
