#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qkdline/bitkey.hpp"
#include "qkdline/channel.hpp"
#include "qkdline/secrecy.hpp"

namespace qkdline::sifting {

// Post-selection borders. Outcomes in [theta3, theta1] read as 0, outcomes in
// [theta2, theta4] read as 1, everything else is discarded.
struct Thresholds {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double theta3 = 0.0;
    double theta4 = 0.0;

    void validate() const;  // theta3 <= theta1 < theta2 <= theta4
};

enum class SiftOutcome { Zero, One, Fail };

struct SiftStats {
    double p_conc_0 = 0.0;
    double p_conc_1 = 0.0;
    double p_conc = 0.0;
    double p_err = 0.0;
};

struct SiftResult {
    BitKey raw_key;
    std::vector<std::size_t> kept_indices;
};

// Eve-side inputs the rate objective needs besides Bob's detection model.
struct SecrecyContext {
    secrecy::DiagonalState eve0;
    secrecy::DiagonalState eve1;
    double f = 1.15;
};

SecrecyContext make_secrecy_context(double r_e, double n0, double n1, double f);

struct RateBreakdown {
    SiftStats stats;
    double w0 = 0.0;  // posterior weight of bit 0 among conclusive outcomes
    double s_a = 0.0;
    double s_a_given_b = 0.0;
    double chi = 0.0;
    double rate = 0.0;  // secret bits per raw pulse; may be <= 0
};

struct ThresholdSearchResult {
    bool positive_rate = false;
    Thresholds thresholds;
    RateBreakdown breakdown;
    double imbalance = 0.0;  // |P(key bit = 0) - P(key bit = 1)| among kept outcomes
};

SiftOutcome classify(double value, const Thresholds& th);

SiftResult sift(std::span<const double> values, const BitKey& sent_bits, const Thresholds& th);

BitKey select_bits(const BitKey& bits, std::span<const std::size_t> indices);

SiftStats sift_stats(const channel::DetectionModel& model, const Thresholds& th);

RateBreakdown asymptotic_rate(const channel::DetectionModel& model, const Thresholds& th,
                              const SecrecyContext& ctx);

double key_imbalance(const channel::DetectionModel& model, const Thresholds& th);

// A sifted key is only useful when the 0/1 mix is close to even; the search
// treats borders above this imbalance as out of budget.
inline constexpr double kBalanceTolerance = 0.02;

ThresholdSearchResult optimize_thresholds(const channel::DetectionModel& model,
                                          const SecrecyContext& ctx);

}  // namespace qkdline::sifting
