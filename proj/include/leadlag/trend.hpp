#pragma once

#include <vector>

#include "leadlag/signals.hpp"

namespace leadlag {

// CC(tau) for tau in -max_lag..max_lag. Positive tau pairs the science value
// at year t with the industry value at year t + tau, so mass at positive lags
// means science leads industry.
struct CrossCorrelation {
    TopicKey topic;
    Representation representation = Representation::frequency;
    int max_lag = 0;
    std::vector<double> values; // index tau + max_lag

    double at(int tau) const { return values[static_cast<std::size_t>(tau + max_lag)]; }
};

struct CCAUCResult {
    TopicKey topic;
    Representation representation = Representation::frequency;
    double ratio = 1.0;
    int mcc_lag = 0;
};

struct GrangerResult {
    int lag_order = 0;
    double statistic = 0.0;
    double p_value = 1.0;
    bool feasible = false;
};

// Zero-padded cross-correlation of two equal-range scaled signals, with
// max_lag = length - 1.
CrossCorrelation cross_correlate(const TopicSignal& sci, const TopicSignal& ind);

// ratio = (1 + sum_{tau>=0} CC) / (1 + sum_{tau<=0} CC); tau = 0 contributes
// to both sums. mcc_lag is the argmax of CC, ties resolved toward the
// smallest |tau| and then the positive lag.
CCAUCResult ccauc(const CrossCorrelation& cc);

// Chi-squared Granger test of "science predicts industry" for lag orders
// 1..max_lag. For each feasible order p (T - p >= 2p + 2 usable rows) fits
// ind(t) ~ const + ind(t-1..t-p) with and without sci(t-1..t-p) by least
// squares; Wald statistic (T-p)*(RSS_r - RSS_u)/RSS_u against chi2(p).
// Rank-deficient regressions are flagged infeasible, never given a p-value.
std::vector<GrangerResult> granger(const TopicSignal& sci, const TopicSignal& ind, int max_lag);

// Upper tail of the chi-squared distribution (regularized upper incomplete
// gamma Q(dof/2, x/2)).
double chi_squared_upper_tail(double statistic, int dof);

} // namespace leadlag
