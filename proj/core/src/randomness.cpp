#include "qkdline/randomness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "qkdline/math.hpp"

namespace qkdline::postprocess {

namespace {

constexpr double kAlpha = 0.01;
constexpr double kProportionFloor = 0.96;

std::size_t ones_in(const BitKey& key, std::size_t offset, std::size_t bits) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < bits; ++i) n += key.get(offset + i);
    return n;
}

std::size_t block_frequency_block(std::size_t bits) {
    std::size_t m = 128;
    while (m < bits / 100) m <<= 1;
    return m;
}

}  // namespace

double frequency_p_value(const BitKey& key, std::size_t offset, std::size_t bits) {
    const double ones = double(ones_in(key, offset, bits));
    const double s = std::abs(2.0 * ones - double(bits)) / std::sqrt(double(bits));
    return std::erfc(s / std::sqrt(2.0));
}

double block_frequency_p_value(const BitKey& key, std::size_t offset, std::size_t bits) {
    const std::size_t m = block_frequency_block(bits);
    const std::size_t blocks = bits / m;
    if (blocks == 0) return frequency_p_value(key, offset, bits);
    double chi2 = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        const double pi = double(ones_in(key, offset + b * m, m)) / double(m);
        chi2 += (pi - 0.5) * (pi - 0.5);
    }
    chi2 *= 4.0 * double(m);
    return math::gamma_q(double(blocks) / 2.0, chi2 / 2.0);
}

double runs_p_value(const BitKey& key, std::size_t offset, std::size_t bits) {
    const double pi = double(ones_in(key, offset, bits)) / double(bits);
    if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(double(bits))) return 0.0;
    std::size_t v = 1;
    for (std::size_t i = 0; i + 1 < bits; ++i)
        v += key.get(offset + i) != key.get(offset + i + 1);
    const double n = double(bits);
    const double expected = 2.0 * n * pi * (1.0 - pi);
    return std::erfc(std::abs(double(v) - expected) /
                     (2.0 * std::sqrt(2.0 * n) * pi * (1.0 - pi)));
}

double longest_run_p_value(const BitKey& key, std::size_t offset, std::size_t bits) {
    std::size_t m = 0;
    std::vector<double> probs;
    std::size_t v_min = 0;
    if (bits < 128) throw std::invalid_argument("longest-run test needs at least 128 bits");
    if (bits < 6272) {
        m = 8;
        v_min = 1;
        probs = {0.21484375, 0.3671875, 0.23046875, 0.1875};
    } else if (bits < 750000) {
        m = 128;
        v_min = 4;
        probs = {0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071, 0.112398847};
    } else {
        m = 10000;
        v_min = 10;
        probs = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
    }
    const std::size_t classes = probs.size();
    const std::size_t blocks = bits / m;
    std::vector<double> counts(classes, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        std::size_t longest = 0, run = 0;
        for (std::size_t i = 0; i < m; ++i) {
            run = key.get(offset + b * m + i) ? run + 1 : 0;
            longest = std::max(longest, run);
        }
        const std::size_t cls =
            longest <= v_min ? 0 : std::min(longest - v_min, classes - 1);
        counts[cls] += 1.0;
    }
    double chi2 = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        const double expect = double(blocks) * probs[c];
        chi2 += (counts[c] - expect) * (counts[c] - expect) / expect;
    }
    return math::gamma_q(double(classes - 1) / 2.0, chi2 / 2.0);
}

double cusum_p_value(const BitKey& key, std::size_t offset, std::size_t bits) {
    long long s = 0, z = 0;
    for (std::size_t i = 0; i < bits; ++i) {
        s += key.get(offset + i) ? 1 : -1;
        z = std::max(z, std::llabs(s));
    }
    if (z == 0) return 0.0;
    const double zd = double(z), sq = std::sqrt(double(bits));
    const long long nz = (long long)(bits) / z;
    double sum1 = 0.0;
    for (long long k = (-nz + 1) / 4; k <= (nz - 1) / 4; ++k)
        sum1 += math::normal_cdf(double(4 * k + 1) * zd / sq) -
                math::normal_cdf(double(4 * k - 1) * zd / sq);
    double sum2 = 0.0;
    for (long long k = (-nz - 3) / 4; k <= (nz - 1) / 4; ++k)
        sum2 += math::normal_cdf(double(4 * k + 3) * zd / sq) -
                math::normal_cdf(double(4 * k + 1) * zd / sq);
    return std::clamp(1.0 - sum1 + sum2, 0.0, 1.0);
}

RandomnessReport randomness_battery(const BitKey& key, std::size_t segment_bits) {
    if (segment_bits < 128) throw std::invalid_argument("segment size below test minima");
    RandomnessReport report;
    report.segment_bits = segment_bits;
    std::size_t segments = key.size() / segment_bits;
    std::size_t seg_len = segment_bits;
    if (segments == 0) {
        segments = 1;
        seg_len = key.size();
    }
    report.segments = segments;

    struct Test {
        const char* name;
        std::size_t min_bits;
        double (*fn)(const BitKey&, std::size_t, std::size_t);
    };
    const std::array<Test, 5> tests = {{
        {"frequency", 100, frequency_p_value},
        {"block_frequency", 100, block_frequency_p_value},
        {"runs", 100, runs_p_value},
        {"longest_run", 128, longest_run_p_value},
        {"cumulative_sums", 100, cusum_p_value},
    }};

    bool all_pass = true;
    for (const Test& t : tests) {
        TestResult res;
        res.name = t.name;
        res.segments = segments;
        if (seg_len < t.min_bits) {
            res.applicable = false;
            all_pass = false;
            report.tests.push_back(std::move(res));
            continue;
        }
        res.applicable = true;
        std::vector<double> pvals(segments);
        std::size_t passed = 0;
        for (std::size_t s = 0; s < segments; ++s) {
            pvals[s] = t.fn(key, s * seg_len, seg_len);
            passed += pvals[s] > kAlpha;
        }
        res.proportion = double(passed) / double(segments);
        res.pass = res.proportion > kProportionFloor;
        if (segments >= 10) {
            std::array<double, 10> bins{};
            for (double p : pvals) bins[std::min<std::size_t>(std::size_t(p * 10.0), 9)] += 1.0;
            const double expect = double(segments) / 10.0;
            double chi2 = 0.0;
            for (double b : bins) chi2 += (b - expect) * (b - expect) / expect;
            res.p_value = math::gamma_q(4.5, chi2 / 2.0);
        } else {
            res.p_value = *std::min_element(pvals.begin(), pvals.end());
        }
        all_pass = all_pass && res.pass;
        report.tests.push_back(std::move(res));
    }
    report.aggregate_pass = all_pass;
    return report;
}

BinomialSummary binomial_summary(const std::vector<BitKey>& keys) {
    if (keys.size() < 2) throw std::invalid_argument("binomial_summary needs >= 2 sequences");
    const std::size_t bits = keys.front().size();
    for (const BitKey& k : keys)
        if (k.size() != bits) throw std::invalid_argument("binomial_summary: unequal lengths");
    BinomialSummary s;
    s.sequences = keys.size();
    s.bits_per_sequence = bits;
    double sum = 0.0, sum2 = 0.0;
    for (const BitKey& k : keys) {
        const double ones = double(k.popcount());
        sum += ones;
        sum2 += ones * ones;
    }
    const double n = double(keys.size());
    s.sample_mean = sum / n;
    s.sample_variance = (sum2 - n * s.sample_mean * s.sample_mean) / (n - 1.0);
    s.sample_stddev = std::sqrt(std::max(0.0, s.sample_variance));
    s.theory_mean = double(bits) / 2.0;
    s.theory_variance = double(bits) / 4.0;
    s.theory_stddev = std::sqrt(double(bits)) / 2.0;
    return s;
}

}  // namespace qkdline::postprocess
