#include "gsv/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gsv/csv.hpp"

namespace gsv {

Spectrum eigendecompose(const Eigen::MatrixXd& laplacian) {
    if (laplacian.rows() != laplacian.cols())
        throw ArgumentError("Laplacian must be square");
    const double scale = std::max(1.0, laplacian.cwiseAbs().maxCoeff());
    if ((laplacian - laplacian.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ArgumentError("Laplacian must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
    if (solver.info() != Eigen::Success)
        throw Error("eigendecomposition failed to converge");
    return Spectrum{solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::VectorXd gft(const Spectrum& spec, const Eigen::VectorXd& x) {
    if (x.size() != spec.size()) throw ArgumentError("signal length does not match spectrum");
    return spec.eigenvectors.transpose() * x;
}

Eigen::VectorXd igft(const Spectrum& spec, const Eigen::VectorXd& coeffs) {
    if (coeffs.size() != spec.size())
        throw ArgumentError("coefficient length does not match spectrum");
    return spec.eigenvectors * coeffs;
}

int hpf_kept_count(double fraction, int n) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw ConfigError("high-pass fraction must lie in (0, 1]");
    return std::min(n, static_cast<int>(std::ceil(fraction * n)));
}

Eigen::MatrixXd graph_hpf(const Spectrum& spec, const Eigen::MatrixXd& X,
                          const HpfConfig& cfg) {
    if (X.rows() != spec.size()) throw ArgumentError("signal rows do not match spectrum");
    const int n = spec.size();
    const int kept = hpf_kept_count(cfg.fraction, n);
    const auto top = spec.eigenvectors.rightCols(kept); // eigenvalues ascend
    return top * (top.transpose() * X);
}

double sgwt_kernel(double x) {
    return x * std::exp(1.0 - x);
}

Eigen::MatrixXd strong_product_weights(const Eigen::MatrixXd& spatial_w, int path_len) {
    if (path_len < 1) throw ArgumentError("path length must be >= 1");
    const int n = static_cast<int>(spatial_w.rows());
    const int total = n * path_len;
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(total, total);
    auto idx = [n](int node, int t) { return t * n + node; };
    for (int t = 0; t < path_len; ++t) {
        // spatial edges within the slice
        w.block(t * n, t * n, n, n) = spatial_w;
        if (t + 1 < path_len) {
            for (int i = 0; i < n; ++i) {
                w(idx(i, t), idx(i, t + 1)) = 1.0; // temporal edge
                w(idx(i, t + 1), idx(i, t)) = 1.0;
                for (int j = 0; j < n; ++j) { // diagonal edges inherit spatial weight
                    if (spatial_w(i, j) > 0.0) {
                        w(idx(i, t), idx(j, t + 1)) = spatial_w(i, j);
                        w(idx(j, t + 1), idx(i, t)) = spatial_w(i, j);
                    }
                }
            }
        }
    }
    return w;
}

namespace {

std::vector<double> auto_scales(const Eigen::VectorXd& eigenvalues, int num_scales) {
    const int n = static_cast<int>(eigenvalues.size());
    const double lmax = eigenvalues(n - 1);
    if (lmax <= 0.0) return std::vector<double>(num_scales, 1.0); // edgeless graph
    double lmin = lmax;
    for (int k = 0; k < n; ++k) {
        if (eigenvalues(k) > 1e-8 * lmax) {
            lmin = eigenvalues(k);
            break;
        }
    }
    // kernel peaks at lambda = 1/s: spread the peaks from lmax down to lmin
    const double s0 = 1.0 / lmax;
    const double s1 = 1.0 / lmin;
    std::vector<double> scales(num_scales);
    if (num_scales == 1) {
        scales[0] = s0;
    } else {
        const double step = std::log(s1 / s0) / (num_scales - 1);
        for (int k = 0; k < num_scales; ++k) scales[k] = s0 * std::exp(step * k);
    }
    return scales;
}

} // namespace

SgwtCoefficients sgwt_coefficients(const Graph& g, const SignalSeries& window,
                                   const SgwtConfig& cfg) {
    window.validate();
    if (window.steps() < 2) throw ArgumentError("SGWT needs at least 2 time steps");
    if (window.nodes() != g.size()) throw ArgumentError("signal rows do not match graph");
    if (cfg.temporal_len != 0 && cfg.temporal_len != window.steps())
        throw ArgumentError("configured temporal length does not match the window");
    const int n = g.size();
    const int t_len = window.steps();
    const long total = static_cast<long>(n) * t_len;
    if (total > cfg.max_product_nodes)
        throw CapacityError("product graph with " + std::to_string(total) +
                            " nodes exceeds the cap of " + std::to_string(cfg.max_product_nodes));
    for (double s : cfg.scales)
        if (!(s > 0.0)) throw ConfigError("SGWT scales must be positive");
    if (cfg.scales.empty() && cfg.num_scales < 1)
        throw ConfigError("SGWT needs at least one scale");

    Eigen::MatrixXd wp = strong_product_weights(g.weights(), t_len);
    Eigen::MatrixXd lap = -wp;
    lap.diagonal() = wp.rowwise().sum();
    Spectrum spec = eigendecompose(lap);

    SgwtCoefficients out;
    out.n_spatial = n;
    out.n_time = t_len;
    out.scales = cfg.scales.empty() ? auto_scales(spec.eigenvalues, cfg.num_scales) : cfg.scales;

    Eigen::VectorXd x(total);
    for (int t = 0; t < t_len; ++t) x.segment(static_cast<long>(t) * n, n) = window.values.col(t);
    const Eigen::VectorXd xhat = spec.eigenvectors.transpose() * x;

    out.coeffs.resize(total, static_cast<int>(out.scales.size()));
    Eigen::VectorXd filtered(total);
    for (size_t si = 0; si < out.scales.size(); ++si) {
        for (long k = 0; k < total; ++k)
            filtered(k) = sgwt_kernel(out.scales[si] * spec.eigenvalues(k)) * xhat(k);
        out.coeffs.col(static_cast<int>(si)) = spec.eigenvectors * filtered;
    }
    return out;
}

Eigen::VectorXd SgwtCoefficients::aggregate_magnitude() const {
    return coeffs.cwiseAbs().rowwise().sum();
}

std::string to_csv(const SgwtCoefficients& coeffs) {
    std::ostringstream out;
    out << "node,time,scale,value\n";
    for (size_t si = 0; si < coeffs.scales.size(); ++si)
        for (long v = 0; v < coeffs.coeffs.rows(); ++v)
            out << coeffs.node_of(static_cast<int>(v)) << ','
                << coeffs.time_of(static_cast<int>(v)) + 1 << ','
                << csv::format_double(coeffs.scales[si]) << ','
                << csv::format_double(coeffs.coeffs(v, static_cast<int>(si))) << '\n';
    return out.str();
}

std::vector<int> sgwt_top_nodes(const SgwtCoefficients& coeffs, int s_total) {
    const long total = coeffs.coeffs.rows();
    if (s_total < 0 || s_total > total)
        throw ArgumentError("requested node count exceeds the product graph size");
    Eigen::VectorXd agg = coeffs.aggregate_magnitude();
    std::vector<int> order(total);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&agg](int a, int b) {
        if (agg(a) != agg(b)) return agg(a) > agg(b);
        return a < b;
    });
    order.resize(s_total);
    return order;
}

} // namespace gsv
