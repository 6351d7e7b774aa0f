#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gsv/graph.hpp"
#include "gsv/signal.hpp"

namespace gsv {

/// Laplacian eigendecomposition: ascending eigenvalues, orthonormal columns.
struct Spectrum {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    int size() const { return static_cast<int>(eigenvalues.size()); }
};

/// Throws ArgumentError when the input is not symmetric.
Spectrum eigendecompose(const Eigen::MatrixXd& laplacian);

Eigen::VectorXd gft(const Spectrum& spec, const Eigen::VectorXd& x);
Eigen::VectorXd igft(const Spectrum& spec, const Eigen::VectorXd& coeffs);

struct HpfConfig {
    double fraction = 0.25; // share of highest graph frequencies kept, in (0, 1]
};

/// Number of kept frequencies: ceil(fraction * n).
int hpf_kept_count(double fraction, int n);

/// Spectral projector onto the highest-eigenvalue components, applied to
/// every column of X.
Eigen::MatrixXd graph_hpf(const Spectrum& spec, const Eigen::MatrixXd& X,
                          const HpfConfig& cfg = {});

struct SgwtConfig {
    std::vector<double> scales; // empty = num_scales log-spaced over the spectrum
    int num_scales = 4;
    int temporal_len = 0;       // expected path length; 0 = series length
    int max_product_nodes = 2000;
};

/// Band-pass kernel x * exp(1 - x): zero at DC, peak value 1 at x = 1.
double sgwt_kernel(double x);

/// Wavelet coefficients on the strong product of the spatial graph with a
/// path graph over the window's time steps. Spatio-temporal node (i, t) has
/// flat index t * N + i.
struct SgwtCoefficients {
    std::vector<double> scales;
    Eigen::MatrixXd coeffs; // (n_spatial * n_time) x n_scales
    int n_spatial = 0;
    int n_time = 0;

    int flat_index(int node, int t) const { return t * n_spatial + node; }
    int node_of(int flat) const { return flat % n_spatial; }
    int time_of(int flat) const { return flat / n_spatial; }

    /// Sum of |coefficient| over scales, per spatio-temporal node.
    Eigen::VectorXd aggregate_magnitude() const;
};

Eigen::MatrixXd strong_product_weights(const Eigen::MatrixXd& spatial_w, int path_len);

SgwtCoefficients sgwt_coefficients(const Graph& g, const SignalSeries& window,
                                   const SgwtConfig& cfg = {});

/// Flat spatio-temporal indices of the s_total nodes with largest aggregate
/// coefficient magnitude (descending, ties by ascending index).
std::vector<int> sgwt_top_nodes(const SgwtCoefficients& coeffs, int s_total);

/// CSV `node,time,scale,value`.
std::string to_csv(const SgwtCoefficients& coeffs);

} // namespace gsv
