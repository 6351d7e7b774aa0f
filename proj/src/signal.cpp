#include "gsv/signal.hpp"

namespace gsv {

SignalSeries SignalSeries::with_unit_times(Eigen::MatrixXd v, double t0) {
    SignalSeries s;
    s.values = std::move(v);
    s.time_axis.resize(s.values.cols());
    for (int t = 0; t < s.values.cols(); ++t) s.time_axis[t] = t0 + t;
    return s;
}

SignalSeries SignalSeries::window(int first, int count) const {
    if (first < 0 || count < 0 || first + count > steps())
        throw ArgumentError("window out of range");
    SignalSeries out;
    out.values = values.middleCols(first, count);
    out.time_axis.assign(time_axis.begin() + first, time_axis.begin() + first + count);
    return out;
}

void SignalSeries::validate() const {
    if (static_cast<int>(time_axis.size()) != steps())
        throw ArgumentError("time axis length does not match column count");
    for (size_t k = 1; k < time_axis.size(); ++k)
        if (!(time_axis[k] > time_axis[k - 1]))
            throw ArgumentError("time axis must be strictly increasing");
    if (!values.allFinite()) throw ArgumentError("signal contains non-finite entries");
}

SignalSeries sliding_window_sum(const SignalSeries& s, int window_len, int slide) {
    if (window_len < 1 || slide < 1) throw ArgumentError("window_len and slide must be >= 1");
    if (s.steps() < window_len) throw ArgumentError("series shorter than the window");
    int count = 1 + (s.steps() - window_len) / slide;
    SignalSeries out;
    out.values.resize(s.nodes(), count);
    out.time_axis.resize(count);
    for (int k = 0; k < count; ++k) {
        int first = k * slide;
        out.values.col(k) = s.values.middleCols(first, window_len).rowwise().sum();
        out.time_axis[k] = s.time_axis[first + window_len - 1];
    }
    return out;
}

} // namespace gsv
