#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gsv/errors.hpp"

namespace gsv {

using SignalFrame = Eigen::VectorXd;

/// Temporally evolving graph signal: one column per time step.
struct SignalSeries {
    Eigen::MatrixXd values;        // N x T
    std::vector<double> time_axis; // strictly increasing, size T

    int nodes() const { return static_cast<int>(values.rows()); }
    int steps() const { return static_cast<int>(values.cols()); }

    /// Wraps a matrix with time stamps t0, t0+1, ...
    static SignalSeries with_unit_times(Eigen::MatrixXd v, double t0 = 1.0);

    /// Columns [first, first+count) as a series, keeping their time stamps.
    SignalSeries window(int first, int count) const;

    void validate() const;
};

/// Sums of `window_len` consecutive columns, advancing by `slide` columns;
/// each output column is stamped with the last time of its window.
SignalSeries sliding_window_sum(const SignalSeries& s, int window_len, int slide);

} // namespace gsv
