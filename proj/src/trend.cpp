#include "leadlag/trend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

namespace leadlag {

CrossCorrelation cross_correlate(const TopicSignal& sci, const TopicSignal& ind) {
    if (sci.years != ind.years) throw NumericError("cross_correlate: mismatched year ranges");
    auto n = static_cast<int>(sci.values.size());
    if (n < 2) throw NumericError("cross_correlate: series too short");

    CrossCorrelation cc;
    cc.topic = sci.topic;
    cc.representation = sci.representation;
    cc.max_lag = n - 1;
    cc.values.assign(static_cast<std::size_t>(2 * cc.max_lag + 1), 0.0);

    for (int tau = -cc.max_lag; tau <= cc.max_lag; ++tau) {
        double acc = 0.0;
        int lo = std::max(0, -tau);
        int hi = std::min(n - 1, n - 1 - tau);
        for (int t = lo; t <= hi; ++t)
            acc += sci.values[static_cast<std::size_t>(t)] * ind.values[static_cast<std::size_t>(t + tau)];
        cc.values[static_cast<std::size_t>(tau + cc.max_lag)] = acc;
    }
    return cc;
}

CCAUCResult ccauc(const CrossCorrelation& cc) {
    CCAUCResult res;
    res.topic = cc.topic;
    res.representation = cc.representation;

    // The negative sum runs outward from tau = 0 so that a symmetric CC
    // (identical inputs) accumulates both sums in the same order and the
    // ratio comes out exactly 1.
    double pos = 0.0, neg = 0.0;
    for (int tau = 0; tau <= cc.max_lag; ++tau) pos += cc.at(tau);
    for (int tau = 0; tau >= -cc.max_lag; --tau) neg += cc.at(tau);
    res.ratio = (1.0 + pos) / (1.0 + neg);

    int best = 0;
    double best_value = cc.at(0);
    for (int tau = -cc.max_lag; tau <= cc.max_lag; ++tau) {
        double v = cc.at(tau);
        bool better = v > best_value;
        if (v == best_value) {
            if (std::abs(tau) < std::abs(best))
                better = true;
            else if (std::abs(tau) == std::abs(best) && tau > best)
                better = true;
        }
        if (better) {
            best = tau;
            best_value = v;
        }
    }
    res.mcc_lag = best;
    return res;
}

double chi_squared_upper_tail(double statistic, int dof) {
    if (statistic <= 0.0) return 1.0;
    if (std::isinf(statistic)) return 0.0;
    return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

namespace {

struct Fit {
    double rss = 0.0;
    bool ok = false;
};

Fit least_squares_rss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < x.cols()) return {};
    Eigen::VectorXd beta = qr.solve(y);
    return {(y - x * beta).squaredNorm(), true};
}

} // namespace

std::vector<GrangerResult> granger(const TopicSignal& sci, const TopicSignal& ind, int max_lag) {
    if (sci.years != ind.years) throw NumericError("granger: mismatched year ranges");
    auto t_len = static_cast<int>(ind.values.size());
    if (t_len < 4) throw NumericError("granger: series too short");
    if (max_lag < 1) throw NumericError("granger: max_lag must be positive");

    std::vector<GrangerResult> results;
    results.reserve(static_cast<std::size_t>(max_lag));

    for (int p = 1; p <= max_lag; ++p) {
        GrangerResult res;
        res.lag_order = p;
        int rows = t_len - p;
        if (rows < 2 * p + 2) { // not enough usable observations
            results.push_back(res);
            continue;
        }

        Eigen::VectorXd y(rows);
        Eigen::MatrixXd xr(rows, p + 1);
        Eigen::MatrixXd xu(rows, 2 * p + 1);
        for (int r = 0; r < rows; ++r) {
            int t = p + r;
            y(r) = ind.values[static_cast<std::size_t>(t)];
            xr(r, 0) = 1.0;
            xu(r, 0) = 1.0;
            for (int l = 1; l <= p; ++l) {
                xr(r, l) = ind.values[static_cast<std::size_t>(t - l)];
                xu(r, l) = ind.values[static_cast<std::size_t>(t - l)];
                xu(r, p + l) = sci.values[static_cast<std::size_t>(t - l)];
            }
        }

        Fit restricted = least_squares_rss(xr, y);
        Fit unrestricted = least_squares_rss(xu, y);
        if (!restricted.ok || !unrestricted.ok) {
            results.push_back(res);
            continue;
        }

        double gain = std::max(0.0, restricted.rss - unrestricted.rss);
        if (unrestricted.rss <= 1e-300) {
            if (gain <= 1e-300) { // both models fit perfectly: nothing to test
                results.push_back(res);
                continue;
            }
            res.statistic = std::numeric_limits<double>::infinity();
        } else {
            res.statistic = static_cast<double>(rows) * gain / unrestricted.rss;
        }
        res.p_value = chi_squared_upper_tail(res.statistic, p);
        res.feasible = true;
        results.push_back(res);
    }
    return results;
}

} // namespace leadlag
