#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cstdio>
#include <filesystem>
#include <set>

#include "gsv/graph.hpp"
#include "gsv/rng.hpp"
#include "support/oracles.hpp"

using namespace gsv;

namespace {

Graph path3() {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
    w(0, 1) = w(1, 0) = 1.0;
    w(1, 2) = w(2, 1) = 1.0;
    return Graph(w);
}

void check_graph_invariants(const Graph& g) {
    const auto& w = g.weights();
    CHECK(w.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(w.minCoeff() >= 0.0);
}

Graph random_graph(int n, std::uint64_t seed, double density = 0.5) {
    Rng rng(seed);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < density) w(i, j) = w(j, i) = rng.uniform(0.1, 2.0);
    return Graph(w);
}

} // namespace

TEST_CASE("graph construction rejects invalid matrices") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
    w(0, 1) = 1.0; // asymmetric
    CHECK_THROWS_AS((void)Graph(w), ArgumentError);
    w(1, 0) = 1.0;
    w(0, 0) = 0.5;
    CHECK_THROWS_AS((void)Graph(w), ArgumentError);
    w(0, 0) = 0.0;
    w(0, 1) = w(1, 0) = -1.0;
    CHECK_THROWS_AS((void)Graph(w), ArgumentError);
}

TEST_CASE("distance graph kernel at zero and beyond threshold") {
    Eigen::MatrixX2d coords(2, 2);
    coords << 1.0, 1.0, 1.0, 1.0; // identical points
    Graph g = distance_graph_from_coords(coords, 1.0, 1.0);
    CHECK(g.weight(0, 1) == 1.0);
    CHECK(g.weight(0, 0) == 0.0);

    coords << 0.0, 0.0, 3.0, 0.0; // distance 3 > threshold 1
    Graph far = distance_graph_from_coords(coords, 1.0, 1.0);
    CHECK(far.weight(0, 1) == 0.0);
}

TEST_CASE("distance graph matches a direct pairwise kernel re-check") {
    DistanceGraphConfig cfg{400, 10.0, 1.95, 0.0, 7};
    Graph g = build_distance_graph(cfg);
    check_graph_invariants(g);
    REQUIRE(g.has_coords());
    const double sigma2 = cfg.threshold * cfg.threshold;
    long edges = 0;
    for (int i = 0; i < g.size(); ++i)
        for (int j = i + 1; j < g.size(); ++j) {
            const double dx = g.coords()(i, 0) - g.coords()(j, 0);
            const double dy = g.coords()(i, 1) - g.coords()(j, 1);
            const double d2 = dx * dx + dy * dy;
            const double expected =
                d2 <= cfg.threshold * cfg.threshold ? std::exp(-d2 / sigma2) : 0.0;
            CHECK(g.weight(i, j) == expected);
            if (expected > 0) ++edges;
        }
    CHECK(edges == g.edge_count());
    CHECK(edges > 0);
}

TEST_CASE("distance graph is bit-identical for a fixed seed") {
    DistanceGraphConfig cfg{60, 10.0, 1.95, 0.0, 1234};
    Graph a = build_distance_graph(cfg);
    Graph b = build_distance_graph(cfg);
    CHECK(a.weights() == b.weights());
    CHECK(a.coords() == b.coords());
}

TEST_CASE("distance graph rejects invalid configs") {
    CHECK_THROWS_AS(build_distance_graph({1, 10.0, 1.0, 0.0, 0}), ConfigError);
    CHECK_THROWS_AS(build_distance_graph({10, -1.0, 1.0, 0.0, 0}), ConfigError);
    CHECK_THROWS_AS(build_distance_graph({10, 10.0, 0.0, 0.0, 0}), ConfigError);
}

TEST_CASE("scale-free graph: degree, edge count, connectivity") {
    ScaleFreeConfig cfg{500, 3, 11};
    Graph g = build_scale_free_graph(cfg);
    check_graph_invariants(g);
    Eigen::VectorXd d = degrees(g);
    CHECK(d.mean() == doctest::Approx(6.0).epsilon(0.05));
    CHECK(d.minCoeff() >= cfg.m);
    // binary weights
    for (auto [i, j] : g.edges()) CHECK(g.weight(i, j) == 1.0);
    // seed clique edges + m per arrival
    const long expected = cfg.m * (cfg.m - 1) / 2 + static_cast<long>(cfg.m) * (cfg.n - cfg.m);
    CHECK(g.edge_count() == expected);

    // connectivity via BFS from node 0
    std::vector<int> stack{0};
    std::set<int> seen{0};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u = 0; u < g.size(); ++u)
            if (g.weight(v, u) > 0 && seen.insert(u).second) stack.push_back(u);
    }
    CHECK(static_cast<int>(seen.size()) == g.size());
}

TEST_CASE("scale-free tail is heavier than an equal-size random graph") {
    Graph sf = build_scale_free_graph({50, 2, 99});
    // pair with an Erdos-Renyi-style graph of the same node and edge count
    Rng rng(99);
    const long target_edges = sf.edge_count();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(50, 50);
    long placed = 0;
    while (placed < target_edges) {
        int i = rng.uniform_int(0, 49), j = rng.uniform_int(0, 49);
        if (i == j || w(i, j) > 0) continue;
        w(i, j) = w(j, i) = 1.0;
        ++placed;
    }
    Graph er(w);
    CHECK(degrees(sf).maxCoeff() > degrees(er).maxCoeff());
}

TEST_CASE("scale-free config validation") {
    CHECK_THROWS_AS(build_scale_free_graph({10, 10, 0}), ConfigError);
    CHECK_THROWS_AS(build_scale_free_graph({10, 0, 0}), ConfigError);
}

TEST_CASE("degrees") {
    Graph empty(Eigen::MatrixXd::Zero(4, 4));
    CHECK(degrees(empty).isZero(0.0));

    CHECK(degrees(path3()).isApprox(Eigen::Vector3d{1.0, 2.0, 1.0}));

    Eigen::MatrixXd tri = Eigen::MatrixXd::Constant(3, 3, 0.5);
    tri.diagonal().setZero();
    CHECK(degrees(Graph(tri)).isApprox(Eigen::Vector3d{1.0, 1.0, 1.0}));
}

TEST_CASE("laplacian basics") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
    w(0, 1) = w(1, 0) = 1.0;
    Eigen::MatrixXd l = laplacian(Graph(w));
    Eigen::MatrixXd expected(2, 2);
    expected << 1, -1, -1, 1;
    CHECK(l == expected);
}

TEST_CASE("laplacian row sums vanish and spectrum is PSD") {
    Graph g = build_distance_graph({10, 10.0, 4.0, 0.0, 5});
    Eigen::MatrixXd l = laplacian(g);
    CHECK((l * Eigen::VectorXd::Ones(10)).cwiseAbs().maxCoeff() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("isolate_nodes") {
    Graph g = path3();
    SUBCASE("empty set is identity") {
        CHECK(isolate_nodes(g, {}).weights() == g.weights());
    }
    SUBCASE("isolating an endpoint leaves the other edge") {
        Graph cut = isolate_nodes(g, {0});
        CHECK(cut.weight(0, 1) == 0.0);
        CHECK(cut.weight(1, 2) == 1.0);
        CHECK(cut.edge_count() == 1);
        // original untouched
        CHECK(g.weight(0, 1) == 1.0);
    }
    SUBCASE("isolating everything empties the edge set") {
        CHECK(isolate_nodes(g, {0, 1, 2}).edge_count() == 0);
    }
    SUBCASE("idempotent") {
        Graph once = isolate_nodes(g, {1});
        Graph twice = isolate_nodes(once, {1});
        CHECK(once.weights() == twice.weights());
    }
    SUBCASE("out of range id") {
        CHECK_THROWS_AS(isolate_nodes(g, {3}), ArgumentError);
        CHECK_THROWS_AS(isolate_nodes(g, {-1}), ArgumentError);
    }
    SUBCASE("invariants preserved on random graphs") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            Graph rg = random_graph(12, seed);
            Rng rng(seed + 100);
            auto victims = rng.sample(12, 4);
            Graph cut = isolate_nodes(rg, victims);
            check_graph_invariants(cut);
            for (int v : victims) CHECK(degrees(cut)(v) == 0.0);
        }
    }
}

TEST_CASE("betweenness on canonical graphs") {
    SUBCASE("star") {
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(5, 5);
        for (int leaf = 1; leaf < 5; ++leaf) w(0, leaf) = w(leaf, 0) = 1.0;
        auto bc = betweenness_centrality(Graph(w));
        CHECK(bc[0] == doctest::Approx(6.0)); // C(4,2) pairs
        for (int leaf = 1; leaf < 5; ++leaf) CHECK(bc[leaf] == 0.0);
    }
    SUBCASE("path: middle carries the single pair") {
        auto bc = betweenness_centrality(path3());
        CHECK(bc[1] == doctest::Approx(1.0));
        CHECK(bc[0] == 0.0);
        CHECK(bc[2] == 0.0);
    }
    SUBCASE("complete graph has no intermediaries") {
        Eigen::MatrixXd w = Eigen::MatrixXd::Ones(5, 5);
        w.diagonal().setZero();
        for (double v : betweenness_centrality(Graph(w))) CHECK(v == 0.0);
    }
}

TEST_CASE("closeness on canonical graphs") {
    SUBCASE("star center is closest") {
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(5, 5);
        for (int leaf = 1; leaf < 5; ++leaf) w(0, leaf) = w(leaf, 0) = 1.0;
        auto cc = closeness_centrality(Graph(w));
        CHECK(cc[0] == doctest::Approx(1.0));
        for (int leaf = 1; leaf < 5; ++leaf) CHECK(cc[leaf] < cc[0]);
    }
    SUBCASE("path middle") {
        auto cc = closeness_centrality(path3());
        CHECK(cc[1] == doctest::Approx(1.0));
        CHECK(cc[0] == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("isolated node scores zero") {
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
        w(0, 1) = w(1, 0) = 1.0;
        auto cc = closeness_centrality(Graph(w));
        CHECK(cc[2] == 0.0);
        CHECK(cc[0] == doctest::Approx(1.0)); // per-component mean distance
    }
}

TEST_CASE("centralities match exhaustive enumeration on small graphs") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const int n = 4 + static_cast<int>(rng.uniform_below(5)); // 4..8
        Graph g = random_graph(n, seed * 31 + 1, 0.45);
        auto bc = betweenness_centrality(g);
        auto bc_ref = oracle::betweenness(g.weights());
        auto cc = closeness_centrality(g);
        auto cc_ref = oracle::closeness(g.weights());
        for (int v = 0; v < n; ++v) {
            CHECK(bc[v] == doctest::Approx(bc_ref[v]).epsilon(1e-12));
            CHECK(cc[v] == doctest::Approx(cc_ref[v]).epsilon(1e-12));
        }
    }
}

TEST_CASE("graph serialization round-trips losslessly") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "gsv_graph_io_test";
    fs::create_directories(dir);

    Graph g = build_distance_graph({30, 10.0, 3.0, 0.0, 77});
    save_graph(g, (dir / "edges.csv").string(), (dir / "nodes.csv").string());
    Graph back = load_graph((dir / "edges.csv").string(), (dir / "nodes.csv").string());
    CHECK(back.size() == g.size());
    CHECK(back.weights() == g.weights()); // bit-exact
    CHECK(back.coords() == g.coords());
    CHECK(back.coord_kind() == CoordKind::Planar);

    SUBCASE("edges only, node count inferred") {
        Graph edges_only = load_graph((dir / "edges.csv").string());
        CHECK(edges_only.weights().topLeftCorner(edges_only.size(), edges_only.size()) ==
              g.weights().topLeftCorner(edges_only.size(), edges_only.size()));
    }
    fs::remove_all(dir);
}
