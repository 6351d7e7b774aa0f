#include "gsv/variation.hpp"

#include <cmath>
#include <sstream>

#include "gsv/csv.hpp"

namespace gsv {

std::string to_string(VariationMetric m) {
    switch (m) {
    case VariationMetric::TemporalTV: return "TV-temporal";
    case VariationMetric::LV: return "LV";
    case VariationMetric::TLV: return "TLV";
    case VariationMetric::TLVNormalized: return "TLV_N";
    }
    return "?";
}

int sign_phi(double delta) {
    return (delta > 0.0) - (delta < 0.0);
}

SignalSeries window_of(const SignalSeries& series, const WindowSpec& w) {
    if (w.r < 2) throw ArgumentError("window length must be >= 2");
    if (w.t_end < w.r || w.t_end > series.steps())
        throw ArgumentError("window end must lie in [r, T]");
    return series.window(w.t_end - w.r, w.r);
}

std::string to_csv(const VariationField& field, const std::vector<double>& time_axis) {
    if (static_cast<int>(time_axis.size()) != field.values.cols())
        throw ArgumentError("time axis length does not match field columns");
    std::ostringstream out;
    out << "node,time,metric,alpha,value\n";
    for (int t = 0; t < field.values.cols(); ++t)
        for (int i = 0; i < field.values.rows(); ++i)
            out << i << ',' << csv::format_double(time_axis[t]) << ','
                << to_string(field.metric) << ',' << csv::format_double(field.alpha) << ','
                << csv::format_double(field.values(i, t)) << '\n';
    return out.str();
}

Eigen::VectorXd local_variation(const Graph& g, const Eigen::VectorXd& x) {
    if (x.size() != g.size()) throw ArgumentError("signal length does not match graph");
    // summed in difference form: keeps constant signals at exactly zero,
    // which the windowed normalization would otherwise amplify
    const Eigen::MatrixXd& w = g.weights();
    const int n = g.size();
    Eigen::VectorXd lv = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const double wij = w(i, j);
            if (wij > 0.0) {
                const double d = x(i) - x(j);
                acc += d * d * wij;
            }
        }
        lv(i) = acc;
    }
    return lv;
}

Eigen::MatrixXd local_variation_series(const Graph& g, const Eigen::MatrixXd& X) {
    if (X.rows() != g.size()) throw ArgumentError("signal rows do not match graph");
    Eigen::MatrixXd out(X.rows(), X.cols());
    for (int t = 0; t < X.cols(); ++t)
        out.col(t) = local_variation(g, Eigen::VectorXd(X.col(t)));
    return out;
}

double total_variation(const Graph& g, const Eigen::VectorXd& x) {
    return local_variation(g, x).sum();
}

Eigen::MatrixXd temporal_variation(const Eigen::MatrixXd& X) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(X.rows(), X.cols());
    if (X.cols() > 1) {
        auto diff = X.rightCols(X.cols() - 1) - X.leftCols(X.cols() - 1);
        out.rightCols(X.cols() - 1) = diff.cwiseProduct(diff);
    }
    return out;
}

VariationField tlv(const Graph& g, const SignalSeries& X, double alpha) {
    X.validate();
    if (alpha < 0.0 || alpha > 1.0) throw ArgumentError("alpha must lie in [0, 1]");
    if (X.steps() < 2) throw ArgumentError("TLV needs at least 2 time steps");
    const Eigen::MatrixXd lv = local_variation_series(g, X.values);
    const Eigen::MatrixXd tv = temporal_variation(X.values);

    VariationField out;
    out.metric = VariationMetric::TLV;
    out.alpha = alpha;
    out.values = (1.0 - alpha) * lv;
    for (int t = 1; t < X.steps(); ++t)
        for (int i = 0; i < X.nodes(); ++i) {
            const double phi = sign_phi(X.values(i, t) - X.values(i, t - 1));
            out.values(i, t) += alpha * phi * tv(i, t);
        }
    return out;
}

VariationField tlv_normalized(const Graph& g, const SignalSeries& window, double alpha) {
    window.validate();
    if (alpha < 0.0 || alpha > 1.0) throw ArgumentError("alpha must lie in [0, 1]");
    if (window.steps() < 2) throw ArgumentError("windowed TLV needs at least 2 time steps");
    const Eigen::MatrixXd lv = local_variation_series(g, window.values);
    const Eigen::MatrixXd tv = temporal_variation(window.values);
    const double max_tv = tv.maxCoeff(); // unsigned maxima over the whole window
    const double max_lv = lv.maxCoeff();

    // Division (not reciprocal multiplication) keeps each scaled term in
    // [0, 1] exactly, so entries respect the [-1, 2] bound without tolerance.
    VariationField out;
    out.metric = VariationMetric::TLVNormalized;
    out.alpha = alpha;
    out.values.resize(window.nodes(), window.steps());
    for (int t = 0; t < window.steps(); ++t)
        for (int i = 0; i < window.nodes(); ++i) {
            const double local = max_lv > 0.0 ? lv(i, t) / max_lv : 0.0;
            double value = (1.0 - alpha) * local;
            if (t > 0) {
                const double phi = sign_phi(window.values(i, t) - window.values(i, t - 1));
                const double temporal = max_tv > 0.0 ? tv(i, t) / max_tv : 0.0;
                value += alpha * phi * temporal;
            }
            out.values(i, t) = value;
        }
    return out;
}

} // namespace gsv
