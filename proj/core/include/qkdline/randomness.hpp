#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qkdline/bitkey.hpp"

namespace qkdline::postprocess {

struct TestResult {
    std::string name;
    bool applicable = false;
    // Uniformity p-value (chi-square over 10 bins) when >= 10 segments were
    // tested, otherwise the smallest per-segment p-value.
    double p_value = 0.0;
    double proportion = 0.0;  // fraction of segments with per-segment p > 0.01
    std::size_t segments = 0;
    bool pass = false;  // proportion > 0.96
};

struct RandomnessReport {
    std::vector<TestResult> tests;
    std::size_t segment_bits = 0;
    std::size_t segments = 0;
    bool aggregate_pass = false;  // every applicable test passed, none skipped
};

// Frequency, Block Frequency, Runs, Longest Run of Ones, Cumulative Sums
// (forward), evaluated per segment with the usual minimum-length rules.
RandomnessReport randomness_battery(const BitKey& key, std::size_t segment_bits = 100000);

// Individual per-segment statistics, exposed for focused checks.
double frequency_p_value(const BitKey& key, std::size_t offset, std::size_t bits);
double block_frequency_p_value(const BitKey& key, std::size_t offset, std::size_t bits);
double runs_p_value(const BitKey& key, std::size_t offset, std::size_t bits);
double longest_run_p_value(const BitKey& key, std::size_t offset, std::size_t bits);
double cusum_p_value(const BitKey& key, std::size_t offset, std::size_t bits);

struct BinomialSummary {
    std::size_t sequences = 0;
    std::size_t bits_per_sequence = 0;
    double sample_mean = 0.0;
    double sample_variance = 0.0;  // unbiased
    double sample_stddev = 0.0;
    double theory_mean = 0.0;      // n/2
    double theory_variance = 0.0;  // n/4
    double theory_stddev = 0.0;    // sqrt(n)/2
};

BinomialSummary binomial_summary(const std::vector<BitKey>& keys);

}  // namespace qkdline::postprocess
