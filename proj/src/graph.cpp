#include "gsv/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <sstream>

#include "gsv/csv.hpp"
#include "gsv/rng.hpp"

namespace gsv {

namespace {
constexpr double kSymTol = 0.0; // exact symmetry is maintained by construction
}

Graph::Graph(Eigen::MatrixXd weights) : w_(std::move(weights)) {
    validate();
}

Graph::Graph(Eigen::MatrixXd weights, Eigen::MatrixX2d coords, CoordKind kind,
             std::vector<std::string> labels)
    : w_(std::move(weights)), coords_(std::move(coords)), coord_kind_(kind),
      labels_(std::move(labels)) {
    if (coord_kind_ != CoordKind::None && coords_.rows() != w_.rows())
        throw ArgumentError("coordinate count does not match node count");
    if (coord_kind_ == CoordKind::None && coords_.rows() != 0)
        throw ArgumentError("coordinates supplied without a coordinate kind");
    if (!labels_.empty() && static_cast<Eigen::Index>(labels_.size()) != w_.rows())
        throw ArgumentError("label count does not match node count");
    validate();
}

void Graph::validate() const {
    if (w_.rows() != w_.cols()) throw ArgumentError("weight matrix must be square");
    const int n = size();
    for (int i = 0; i < n; ++i) {
        if (w_(i, i) != 0.0) throw ArgumentError("weight matrix has a nonzero diagonal");
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(w_(i, j) - w_(j, i)) > kSymTol)
                throw ArgumentError("weight matrix is not symmetric");
            if (w_(i, j) < 0.0 || !std::isfinite(w_(i, j)))
                throw ArgumentError("weights must be finite and non-negative");
        }
    }
}

std::vector<std::pair<int, int>> Graph::edges() const {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < size(); ++i)
        for (int j = i + 1; j < size(); ++j)
            if (w_(i, j) > 0.0) out.emplace_back(i, j);
    return out;
}

long Graph::edge_count() const {
    long c = 0;
    for (int i = 0; i < size(); ++i)
        for (int j = i + 1; j < size(); ++j)
            if (w_(i, j) > 0.0) ++c;
    return c;
}

Graph distance_graph_from_coords(const Eigen::MatrixX2d& coords, double threshold,
                                 double sigma2) {
    if (threshold <= 0.0) throw ConfigError("distance threshold must be positive");
    if (sigma2 == 0.0) sigma2 = threshold * threshold;
    if (sigma2 <= 0.0) throw ConfigError("kernel scale sigma2 must be positive");
    const int n = static_cast<int>(coords.rows());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double dx = coords(i, 0) - coords(j, 0);
            const double dy = coords(i, 1) - coords(j, 1);
            const double d2 = dx * dx + dy * dy;
            if (d2 <= threshold * threshold) {
                const double v = std::exp(-d2 / sigma2);
                w(i, j) = v;
                w(j, i) = v;
            }
        }
    }
    return Graph(std::move(w), coords, CoordKind::Planar);
}

Graph build_distance_graph(const DistanceGraphConfig& cfg) {
    if (cfg.n < 2) throw ConfigError("distance graph needs at least 2 nodes");
    if (cfg.box_side <= 0.0) throw ConfigError("box side must be positive");
    if (cfg.threshold <= 0.0) throw ConfigError("distance threshold must be positive");
    if (cfg.sigma2 < 0.0) throw ConfigError("kernel scale sigma2 must be positive");
    Rng rng(cfg.seed);
    Eigen::MatrixX2d coords(cfg.n, 2);
    for (int i = 0; i < cfg.n; ++i) {
        coords(i, 0) = rng.uniform(0.0, cfg.box_side);
        coords(i, 1) = rng.uniform(0.0, cfg.box_side);
    }
    return distance_graph_from_coords(coords, cfg.threshold, cfg.sigma2);
}

Graph build_scale_free_graph(const ScaleFreeConfig& cfg) {
    if (cfg.n < 2) throw ConfigError("scale-free graph needs at least 2 nodes");
    if (cfg.m < 1 || cfg.m >= cfg.n)
        throw ConfigError("attachment parameter m must satisfy 1 <= m < n");
    Rng rng(cfg.seed);
    const int n = cfg.n, m = cfg.m;
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    // endpoint urn: every node appears once per unit of degree
    std::vector<int> urn;
    urn.reserve(2 * (m * (n - m)) + m * (m - 1));
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            w(i, j) = w(j, i) = 1.0;
            urn.push_back(i);
            urn.push_back(j);
        }
    }
    std::vector<int> picked;
    for (int v = m; v < n; ++v) {
        picked.clear();
        while (static_cast<int>(picked.size()) < m) {
            int target;
            if (urn.empty()) {
                target = static_cast<int>(rng.uniform_below(v)); // no edges yet (m = 1 seed)
            } else {
                target = urn[rng.uniform_below(urn.size())];
            }
            if (std::find(picked.begin(), picked.end(), target) == picked.end())
                picked.push_back(target);
        }
        for (int target : picked) {
            w(v, target) = w(target, v) = 1.0;
            urn.push_back(v);
            urn.push_back(target);
        }
    }
    return Graph(std::move(w));
}

Eigen::VectorXd degrees(const Graph& g) {
    return g.weights().rowwise().sum();
}

Eigen::MatrixXd laplacian(const Graph& g) {
    Eigen::MatrixXd l = -g.weights();
    l.diagonal() = degrees(g);
    return l;
}

Graph isolate_nodes(const Graph& g, const std::vector<int>& nodes) {
    for (int v : nodes)
        if (v < 0 || v >= g.size()) throw ArgumentError("node id out of range: " + std::to_string(v));
    Eigen::MatrixXd w = g.weights();
    for (int v : nodes) {
        w.row(v).setZero();
        w.col(v).setZero();
    }
    if (g.has_coords()) return Graph(std::move(w), g.coords(), g.coord_kind(), g.labels());
    return Graph(std::move(w));
}

Graph binarize(const Graph& g) {
    Eigen::MatrixXd w = (g.weights().array() > 0.0).cast<double>();
    if (g.has_coords()) return Graph(std::move(w), g.coords(), g.coord_kind(), g.labels());
    return Graph(std::move(w));
}

namespace {

std::vector<std::vector<int>> adjacency_list(const Graph& g) {
    std::vector<std::vector<int>> adj(g.size());
    for (int i = 0; i < g.size(); ++i)
        for (int j = 0; j < g.size(); ++j)
            if (j != i && g.weight(i, j) > 0.0) adj[i].push_back(j);
    return adj;
}

} // namespace

std::vector<double> betweenness_centrality(const Graph& g) {
    // Brandes' accumulation on hop counts; pair contributions are halved at
    // the end since each unordered pair is visited from both endpoints.
    const int n = g.size();
    auto adj = adjacency_list(g);
    std::vector<double> score(n, 0.0);
    std::vector<int> dist(n), order;
    std::vector<double> sigma(n), delta(n);
    std::vector<std::vector<int>> preds(n);
    order.reserve(n);
    for (int s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        for (auto& p : preds) p.clear();
        order.clear();
        dist[s] = 0;
        sigma[s] = 1.0;
        std::deque<int> queue{s};
        while (!queue.empty()) {
            int v = queue.front();
            queue.pop_front();
            order.push_back(v);
            for (int u : adj[v]) {
                if (dist[u] < 0) {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
                if (dist[u] == dist[v] + 1) {
                    sigma[u] += sigma[v];
                    preds[u].push_back(v);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            int u = *it;
            for (int v : preds[u]) delta[v] += sigma[v] / sigma[u] * (1.0 + delta[u]);
            if (u != s) score[u] += delta[u];
        }
    }
    for (double& v : score) v *= 0.5;
    return score;
}

std::vector<double> closeness_centrality(const Graph& g) {
    const int n = g.size();
    auto adj = adjacency_list(g);
    std::vector<double> score(n, 0.0);
    std::vector<int> dist(n);
    for (int s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        std::deque<int> queue{s};
        long total = 0, reached = 0;
        while (!queue.empty()) {
            int v = queue.front();
            queue.pop_front();
            for (int u : adj[v]) {
                if (dist[u] < 0) {
                    dist[u] = dist[v] + 1;
                    total += dist[u];
                    ++reached;
                    queue.push_back(u);
                }
            }
        }
        score[s] = reached > 0 ? static_cast<double>(reached) / static_cast<double>(total) : 0.0;
    }
    return score;
}

void save_graph(const Graph& g, const std::string& edges_path, const std::string& nodes_path) {
    std::ostringstream edges;
    edges << "src,dst,weight\n";
    for (auto [i, j] : g.edges())
        edges << i << ',' << j << ',' << csv::format_double(g.weight(i, j)) << '\n';
    csv::atomic_write(edges_path, edges.str());

    if (nodes_path.empty()) return;
    std::ostringstream nodes;
    switch (g.coord_kind()) {
    case CoordKind::Planar: nodes << "id,label,x,y\n"; break;
    case CoordKind::Geographic: nodes << "id,label,lat,lon\n"; break;
    case CoordKind::None: nodes << "id,label\n"; break;
    }
    for (int i = 0; i < g.size(); ++i) {
        nodes << i << ',' << csv::quote(g.has_labels() ? g.labels()[i] : "");
        if (g.has_coords())
            nodes << ',' << csv::format_double(g.coords()(i, 0)) << ','
                  << csv::format_double(g.coords()(i, 1));
        nodes << '\n';
    }
    csv::atomic_write(nodes_path, nodes.str());
}

Graph load_graph(const std::string& edges_path, const std::string& nodes_path) {
    auto edges = csv::read_file(edges_path);
    if (edges.header != std::vector<std::string>{"src", "dst", "weight"})
        throw IngestError("unexpected edge file header in " + edges_path);

    int n = 0;
    CoordKind kind = CoordKind::None;
    Eigen::MatrixX2d coords(0, 2);
    std::vector<std::string> labels;
    bool any_label = false;
    if (!nodes_path.empty()) {
        auto nodes = csv::read_file(nodes_path);
        if (nodes.header == std::vector<std::string>{"id", "label", "x", "y"})
            kind = CoordKind::Planar;
        else if (nodes.header == std::vector<std::string>{"id", "label", "lat", "lon"})
            kind = CoordKind::Geographic;
        else if (nodes.header != std::vector<std::string>{"id", "label"})
            throw IngestError("unexpected node file header in " + nodes_path);
        n = static_cast<int>(nodes.rows.size());
        labels.resize(n);
        if (kind != CoordKind::None) coords.resize(n, 2);
        for (size_t k = 0; k < nodes.rows.size(); ++k) {
            const auto& row = nodes.rows[k];
            long id = csv::parse_long(row[0], nodes_path);
            if (id != static_cast<long>(k))
                throw IngestError("node ids must be 0..n-1 in order in " + nodes_path);
            labels[k] = row[1];
            if (!row[1].empty()) any_label = true;
            if (kind != CoordKind::None) {
                coords(static_cast<Eigen::Index>(k), 0) = csv::parse_double(row[2], nodes_path);
                coords(static_cast<Eigen::Index>(k), 1) = csv::parse_double(row[3], nodes_path);
            }
        }
        if (!any_label) labels.clear();
    } else {
        for (const auto& row : edges.rows) {
            n = std::max(n, static_cast<int>(csv::parse_long(row[0], edges_path)) + 1);
            n = std::max(n, static_cast<int>(csv::parse_long(row[1], edges_path)) + 1);
        }
    }

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (size_t k = 0; k < edges.rows.size(); ++k) {
        const auto& row = edges.rows[k];
        long i = csv::parse_long(row[0], edges_path);
        long j = csv::parse_long(row[1], edges_path);
        double v = csv::parse_double(row[2], edges_path);
        if (i < 0 || j < 0 || i >= n || j >= n)
            throw IngestError("edge endpoint out of range at data row " + std::to_string(k + 1));
        if (i == j) throw IngestError("self-loop at data row " + std::to_string(k + 1));
        if (v < 0.0) throw IngestError("negative weight at data row " + std::to_string(k + 1));
        if (w(i, j) != 0.0) throw IngestError("duplicate edge at data row " + std::to_string(k + 1));
        w(i, j) = w(j, i) = v;
    }
    if (kind != CoordKind::None || !labels.empty())
        return Graph(std::move(w), std::move(coords), kind, std::move(labels));
    return Graph(std::move(w));
}

std::uint64_t graph_hash(const Graph& g) {
    std::uint64_t h = 1469598103934665603ULL; // FNV-1a
    auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xff;
            h *= 1099511628211ULL;
        }
    };
    mix(static_cast<std::uint64_t>(g.size()));
    for (int i = 0; i < g.size(); ++i)
        for (int j = i + 1; j < g.size(); ++j)
            if (g.weight(i, j) > 0.0) {
                mix(static_cast<std::uint64_t>(i));
                mix(static_cast<std::uint64_t>(j));
                std::uint64_t bits;
                double v = g.weight(i, j);
                static_assert(sizeof(bits) == sizeof(v));
                std::memcpy(&bits, &v, sizeof(bits));
                mix(bits);
            }
    return h;
}

} // namespace gsv
