#pragma once

// Independent naive implementations used as test oracles. These deliberately
// mirror the defining sums element by element and share no code with the
// library implementations they check.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "gsv/graph.hpp"

namespace oracle {

inline double sign_of(double v) {
    if (v > 0) return 1.0;
    if (v < 0) return -1.0;
    return 0.0;
}

inline double total_variation(const Eigen::MatrixXd& w, const Eigen::VectorXd& x) {
    double acc = 0.0;
    for (int i = 0; i < w.rows(); ++i)
        for (int j = 0; j < w.cols(); ++j)
            if (j != i && w(i, j) > 0)
                acc += (x(i) - x(j)) * (x(i) - x(j)) * w(i, j);
    return acc;
}

inline Eigen::VectorXd local_variation(const Eigen::MatrixXd& w, const Eigen::VectorXd& x) {
    Eigen::VectorXd lv = Eigen::VectorXd::Zero(w.rows());
    for (int i = 0; i < w.rows(); ++i)
        for (int j = 0; j < w.cols(); ++j)
            if (j != i && w(i, j) > 0)
                lv(i) += (x(i) - x(j)) * (x(i) - x(j)) * w(i, j);
    return lv;
}

inline Eigen::MatrixXd temporal_variation(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd tv = Eigen::MatrixXd::Zero(x.rows(), x.cols());
    for (int i = 0; i < x.rows(); ++i)
        for (int t = 1; t < x.cols(); ++t) {
            const double d = x(i, t) - x(i, t - 1);
            tv(i, t) = d * d;
        }
    return tv;
}

inline Eigen::MatrixXd tlv(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x, double alpha) {
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (int t = 0; t < x.cols(); ++t) {
        const Eigen::VectorXd lv = local_variation(w, x.col(t));
        for (int i = 0; i < x.rows(); ++i) {
            double temporal = 0.0;
            if (t > 0) {
                const double d = x(i, t) - x(i, t - 1);
                temporal = sign_of(d) * d * d;
            }
            out(i, t) = alpha * temporal + (1.0 - alpha) * lv(i);
        }
    }
    return out;
}

inline Eigen::MatrixXd tlv_normalized(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x,
                                      double alpha) {
    const Eigen::MatrixXd tv = temporal_variation(x);
    Eigen::MatrixXd lv(x.rows(), x.cols());
    for (int t = 0; t < x.cols(); ++t) lv.col(t) = local_variation(w, x.col(t));
    const double max_tv = tv.maxCoeff();
    const double max_lv = lv.maxCoeff();
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (int t = 0; t < x.cols(); ++t)
        for (int i = 0; i < x.rows(); ++i) {
            double temporal = 0.0;
            if (t > 0 && max_tv > 0) {
                const double d = x(i, t) - x(i, t - 1);
                temporal = sign_of(d) * (tv(i, t) / max_tv);
            }
            const double local = max_lv > 0 ? lv(i, t) / max_lv : 0.0;
            out(i, t) = alpha * temporal + (1.0 - alpha) * local;
        }
    return out;
}

// ---- exhaustive centralities (Floyd-Warshall + path counting) ----

struct AllPairs {
    Eigen::MatrixXd dist;   // hop counts, inf when unreachable
    Eigen::MatrixXd counts; // number of distinct shortest paths
};

inline AllPairs all_pairs_shortest(const Eigen::MatrixXd& w) {
    const int n = static_cast<int>(w.rows());
    const double inf = std::numeric_limits<double>::infinity();
    AllPairs ap;
    ap.dist = Eigen::MatrixXd::Constant(n, n, inf);
    ap.counts = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        ap.dist(i, i) = 0;
        ap.counts(i, i) = 1;
        for (int j = 0; j < n; ++j)
            if (j != i && w(i, j) > 0) {
                ap.dist(i, j) = 1;
                ap.counts(i, j) = 1;
            }
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j || k == i || k == j) continue;
                const double through = ap.dist(i, k) + ap.dist(k, j);
                if (through < ap.dist(i, j)) {
                    ap.dist(i, j) = through;
                    ap.counts(i, j) = ap.counts(i, k) * ap.counts(k, j);
                } else if (through == ap.dist(i, j) && through < inf) {
                    ap.counts(i, j) += ap.counts(i, k) * ap.counts(k, j);
                }
            }
    return ap;
}

inline std::vector<double> betweenness(const Eigen::MatrixXd& w) {
    const int n = static_cast<int>(w.rows());
    const auto ap = all_pairs_shortest(w);
    std::vector<double> score(n, 0.0);
    for (int v = 0; v < n; ++v)
        for (int s = 0; s < n; ++s)
            for (int t = s + 1; t < n; ++t) {
                if (s == v || t == v || std::isinf(ap.dist(s, t))) continue;
                if (ap.dist(s, v) + ap.dist(v, t) == ap.dist(s, t))
                    score[v] += ap.counts(s, v) * ap.counts(v, t) / ap.counts(s, t);
            }
    return score;
}

inline std::vector<double> closeness(const Eigen::MatrixXd& w) {
    const int n = static_cast<int>(w.rows());
    const auto ap = all_pairs_shortest(w);
    std::vector<double> score(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double total = 0.0;
        int reached = 0;
        for (int j = 0; j < n; ++j)
            if (j != i && !std::isinf(ap.dist(i, j))) {
                total += ap.dist(i, j);
                ++reached;
            }
        score[i] = reached > 0 ? reached / total : 0.0;
    }
    return score;
}

} // namespace oracle
