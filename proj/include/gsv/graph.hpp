#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gsv/errors.hpp"

namespace gsv {

enum class CoordKind { None, Planar, Geographic };

/// Weighted undirected graph: symmetric non-negative weight matrix with zero
/// diagonal, optional node coordinates (planar x/y or geographic lat/lon) and
/// labels. Immutable after construction; editing operations return new graphs.
class Graph {
public:
    Graph() = default;
    explicit Graph(Eigen::MatrixXd weights);
    Graph(Eigen::MatrixXd weights, Eigen::MatrixX2d coords, CoordKind kind,
          std::vector<std::string> labels = {});

    int size() const { return static_cast<int>(w_.rows()); }
    const Eigen::MatrixXd& weights() const { return w_; }
    double weight(int i, int j) const { return w_(i, j); }

    CoordKind coord_kind() const { return coord_kind_; }
    bool has_coords() const { return coord_kind_ != CoordKind::None; }
    const Eigen::MatrixX2d& coords() const { return coords_; }

    bool has_labels() const { return !labels_.empty(); }
    const std::vector<std::string>& labels() const { return labels_; }

    /// Edges with i < j and w > 0, ascending (i, j).
    std::vector<std::pair<int, int>> edges() const;
    long edge_count() const;

private:
    Eigen::MatrixXd w_;
    Eigen::MatrixX2d coords_{0, 2};
    CoordKind coord_kind_ = CoordKind::None;
    std::vector<std::string> labels_;

    void validate() const;
};

struct DistanceGraphConfig {
    int n = 0;
    double box_side = 10.0;
    double threshold = 0.0;
    double sigma2 = 0.0; // 0 = use threshold^2
    std::uint64_t seed = 0;
};

struct ScaleFreeConfig {
    int n = 0;
    int m = 1; // edges per arriving node
    std::uint64_t seed = 0;
};

/// Samples n points uniformly in [0, box_side]^2 and connects pairs within
/// the distance threshold using a Gaussian kernel of the squared distance.
Graph build_distance_graph(const DistanceGraphConfig& cfg);

/// Same kernel construction on externally supplied planar coordinates.
Graph distance_graph_from_coords(const Eigen::MatrixX2d& coords, double threshold,
                                 double sigma2);

/// Preferential-attachment graph with binary weights: a fully connected seed
/// of m nodes, then each arriving node attaches to m distinct existing nodes
/// with probability proportional to degree.
Graph build_scale_free_graph(const ScaleFreeConfig& cfg);

Eigen::VectorXd degrees(const Graph& g);
Eigen::MatrixXd laplacian(const Graph& g);

/// Returns a copy with every edge incident to the listed nodes removed.
Graph isolate_nodes(const Graph& g, const std::vector<int>& nodes);

/// Replaces every positive weight with 1.
Graph binarize(const Graph& g);

/// Shortest-path betweenness on hop counts (edge present iff w > 0),
/// unnormalized, each unordered pair counted once.
std::vector<double> betweenness_centrality(const Graph& g);

/// Reciprocal of the mean hop distance to reachable peers; 0 for nodes with
/// no reachable peers.
std::vector<double> closeness_centrality(const Graph& g);

/// Edge-list CSV `src,dst,weight` (src < dst) plus node table
/// `id,label,x,y` / `id,label,lat,lon` / `id,label`. Weights round-trip
/// exactly. nodes_path may be empty to skip the node table.
void save_graph(const Graph& g, const std::string& edges_path,
                const std::string& nodes_path = "");
Graph load_graph(const std::string& edges_path, const std::string& nodes_path = "");

std::uint64_t graph_hash(const Graph& g);

} // namespace gsv
