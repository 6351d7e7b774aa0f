#pragma once

#include <Eigen/Dense>
#include <string>

#include "gsv/graph.hpp"
#include "gsv/signal.hpp"

namespace gsv {

enum class VariationMetric { TemporalTV, LV, TLV, TLVNormalized };

std::string to_string(VariationMetric m);

/// Per-node, per-step variation values for one metric.
struct VariationField {
    Eigen::MatrixXd values; // N x r
    VariationMetric metric = VariationMetric::LV;
    double alpha = 0.0;
};

struct WindowSpec {
    int r = 2;     // window length in steps
    int t_end = 2; // last step of the window, 1-based
};

/// Columns [t_end - r + 1, t_end] of the series (1-based step indexing).
SignalSeries window_of(const SignalSeries& series, const WindowSpec& w);

/// CSV `node,time,metric,alpha,value`.
std::string to_csv(const VariationField& field, const std::vector<double>& time_axis);

/// sign of a one-step difference: -1, 0 or +1 (exact zero maps to 0).
int sign_phi(double delta);

/// Sum over ordered neighbor pairs of (x_i - x_j)^2 w_ij; equals twice the
/// Laplacian quadratic form x' L x.
double total_variation(const Graph& g, const Eigen::VectorXd& x);

/// Per-node share of total variation.
Eigen::VectorXd local_variation(const Graph& g, const Eigen::VectorXd& x);
Eigen::MatrixXd local_variation_series(const Graph& g, const Eigen::MatrixXd& X); // column-wise

/// Squared one-step differences; first column is zero.
Eigen::MatrixXd temporal_variation(const Eigen::MatrixXd& X);

/// Signed blend: alpha * phi * (x_t - x_{t-1})^2 + (1 - alpha) * LV.
VariationField tlv(const Graph& g, const SignalSeries& X, double alpha);

/// Same blend with each term divided by its maximum over the window (all
/// nodes, all steps). A zero maximum makes the corresponding term 0. Entries
/// lie in [-1, 2].
VariationField tlv_normalized(const Graph& g, const SignalSeries& window, double alpha);

} // namespace gsv
