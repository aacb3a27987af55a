#include "qkdline/sifting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qkdline/math.hpp"

namespace qkdline::sifting {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Objective {
    const channel::DetectionModel& model;
    const SecrecyContext& ctx;
    std::vector<double> eve0, eve1;  // padded to a common truncation
    double h_eve0 = 0.0, h_eve1 = 0.0;
    mutable std::vector<double> mix;

    explicit Objective(const channel::DetectionModel& m, const SecrecyContext& c)
        : model(m), ctx(c) {
        ctx.eve0.validate();
        ctx.eve1.validate();
        const std::size_t n = std::max(ctx.eve0.probs.size(), ctx.eve1.probs.size());
        eve0 = ctx.eve0.probs;
        eve1 = ctx.eve1.probs;
        eve0.resize(n, 0.0);
        eve1.resize(n, 0.0);
        h_eve0 = math::shannon_entropy_bits(eve0);
        h_eve1 = math::shannon_entropy_bits(eve1);
        mix.resize(n);
    }

    // Rate of the four-threshold rule, kNegInf when nothing is conclusive.
    double rate(const Thresholds& th, RateBreakdown* out = nullptr) const {
        const double m0z = model.interval_mass(0, th.theta3, th.theta1);
        const double m0o = model.interval_mass(0, th.theta2, th.theta4);
        const double m1z = model.interval_mass(1, th.theta3, th.theta1);
        const double m1o = model.interval_mass(1, th.theta2, th.theta4);
        SiftStats stats;
        stats.p_conc_0 = m0z + m0o;
        stats.p_conc_1 = m1z + m1o;
        stats.p_conc = 0.5 * (stats.p_conc_0 + stats.p_conc_1);
        if (stats.p_conc <= 0.0) return kNegInf;
        stats.p_err = (0.5 * m0o + 0.5 * m1z) / stats.p_conc;

        const double w0 = stats.p_conc_0 / (2.0 * stats.p_conc);
        const double w1 = 1.0 - w0;
        for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = w0 * eve0[i] + w1 * eve1[i];
        const double chi = std::max(
            0.0, math::shannon_entropy_bits(mix) - w0 * h_eve0 - w1 * h_eve1);

        const double s_a = math::binary_entropy(std::clamp(w0, 0.0, 1.0));
        const double s_ab = math::binary_entropy(std::clamp(stats.p_err, 0.0, 1.0));
        const double r = stats.p_conc * (s_a - ctx.f * s_ab - chi);
        if (out) *out = RateBreakdown{stats, w0, s_a, s_ab, chi, r};
        return r;
    }
};

bool ordered(double t3, double t1, double t2, double t4) {
    return t3 <= t1 && t1 < t2 && t2 <= t4;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * double(i) / double(n - 1);
    return v;
}

}  // namespace

void Thresholds::validate() const {
    if (!(theta3 <= theta1 && theta1 < theta2 && theta2 <= theta4))
        throw std::invalid_argument("thresholds must satisfy theta3 <= theta1 < theta2 <= theta4");
}

SiftOutcome classify(double value, const Thresholds& th) {
    if (value >= th.theta3 && value <= th.theta1) return SiftOutcome::Zero;
    if (value >= th.theta2 && value <= th.theta4) return SiftOutcome::One;
    return SiftOutcome::Fail;
}

SiftResult sift(std::span<const double> values, const BitKey& sent_bits, const Thresholds& th) {
    th.validate();
    if (values.size() != sent_bits.size())
        throw std::invalid_argument("sift: outcome and sent-bit streams differ in length");
    SiftResult res;
    std::vector<std::uint8_t> kept_bits;
    kept_bits.reserve(values.size() / 16);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const SiftOutcome o = classify(values[i], th);
        if (o == SiftOutcome::Fail) continue;
        res.kept_indices.push_back(i);
        kept_bits.push_back(o == SiftOutcome::One ? 1 : 0);
    }
    res.raw_key = BitKey::from_bools(kept_bits);
    return res;
}

BitKey select_bits(const BitKey& bits, std::span<const std::size_t> indices) {
    BitKey out(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i)
        if (bits.get(indices[i])) out.set(i, true);
    return out;
}

SiftStats sift_stats(const channel::DetectionModel& model, const Thresholds& th) {
    th.validate();
    SiftStats stats;
    const double m0z = model.interval_mass(0, th.theta3, th.theta1);
    const double m0o = model.interval_mass(0, th.theta2, th.theta4);
    const double m1z = model.interval_mass(1, th.theta3, th.theta1);
    const double m1o = model.interval_mass(1, th.theta2, th.theta4);
    stats.p_conc_0 = m0z + m0o;
    stats.p_conc_1 = m1z + m1o;
    stats.p_conc = 0.5 * (stats.p_conc_0 + stats.p_conc_1);
    if (stats.p_conc <= 0.0) throw std::runtime_error("no conclusive region for these thresholds");
    stats.p_err = (0.5 * m0o + 0.5 * m1z) / stats.p_conc;
    return stats;
}

SecrecyContext make_secrecy_context(double r_e, double n0, double n1, double f) {
    if (f < 1.0) throw std::invalid_argument("error-correction efficiency must be >= 1");
    return SecrecyContext{secrecy::eve_state(r_e, n0), secrecy::eve_state(r_e, n1), f};
}

RateBreakdown asymptotic_rate(const channel::DetectionModel& model, const Thresholds& th,
                              const SecrecyContext& ctx) {
    th.validate();
    RateBreakdown out;
    if (Objective(model, ctx).rate(th, &out) == kNegInf)
        throw std::runtime_error("no conclusive region for these thresholds");
    return out;
}

double key_imbalance(const channel::DetectionModel& model, const Thresholds& th) {
    const double m0z = model.interval_mass(0, th.theta3, th.theta1);
    const double m1z = model.interval_mass(1, th.theta3, th.theta1);
    const double m0o = model.interval_mass(0, th.theta2, th.theta4);
    const double m1o = model.interval_mass(1, th.theta2, th.theta4);
    const double conc = 0.5 * (m0z + m1z + m0o + m1o);
    if (conc <= 0.0) throw std::runtime_error("no conclusive region for these thresholds");
    const double p_zero = 0.5 * (m0z + m1z) / conc;
    return std::abs(2.0 * p_zero - 1.0);
}

ThresholdSearchResult optimize_thresholds(const channel::DetectionModel& model,
                                          const SecrecyContext& ctx) {
    const double mu0 = model.mean(0), mu1 = model.mean(1);
    const Objective obj(model, ctx);

    const bool integer_axis = model.is_poisson();
    const double lo = std::min(model.quantile(0, 5e-4), model.quantile(1, 5e-4));
    const double hi = std::max(model.quantile(0, 1.0 - 5e-4), model.quantile(1, 1.0 - 5e-4));
    const double scale = std::max({mu1 - mu0, model.stddev(0), model.stddev(1)});
    const double tol = integer_axis ? 1.0 : 1e-3 * scale;

    auto imbalance_of = [&](const Thresholds& th) {
        const double m0z = model.interval_mass(0, th.theta3, th.theta1);
        const double m1z = model.interval_mass(1, th.theta3, th.theta1);
        const double m0o = model.interval_mass(0, th.theta2, th.theta4);
        const double m1o = model.interval_mass(1, th.theta2, th.theta4);
        const double conc = m0z + m1z + m0o + m1o;
        if (conc <= 0.0) return 2.0;
        return std::abs(2.0 * (m0z + m1z) / conc - 1.0);
    };

    // Coarse stage: full 15^4 scan of the bracketing box, split into borders
    // that keep the key mix even and the unconstrained rest. The rest only
    // matters as a fallback when no border set meets the balance budget.
    const auto axis = linspace(lo, hi, 15);
    struct Candidate {
        double rate;
        Thresholds th;
    };
    std::vector<Candidate> even, any;
    for (double t3 : axis)
        for (double t1 : axis)
            for (double t2 : axis)
                for (double t4 : axis) {
                    if (!ordered(t3, t1, t2, t4)) continue;
                    const Thresholds th{t1, t2, t3, t4};
                    const double r = obj.rate(th);
                    if (r == kNegInf) continue;
                    any.push_back({r, th});
                    if (imbalance_of(th) < kBalanceTolerance) even.push_back({r, th});
                }
    if (any.empty()) {
        // Degenerate axis (point-mass distributions): report the fallback box.
        const double upper = integer_axis ? lo + 1.0 : std::max(hi, lo + 1.0);
        const Thresholds th{lo, upper, lo, upper};
        const double r = obj.rate(th);
        if (r == kNegInf) throw std::runtime_error("threshold search found no conclusive region");
        any.push_back({r, th});
    }
    const bool constrained = !even.empty();
    std::vector<Candidate>& ranked = constrained ? even : any;
    std::sort(ranked.begin(), ranked.end(),
              [](const Candidate& a, const Candidate& b) { return a.rate > b.rate; });
    ranked.resize(std::min<std::size_t>(ranked.size(), 6));

    // Refine each start by coordinate descent with a shrinking step. Paired
    // moves let the search slide along the balance boundary when it binds.
    Candidate best = ranked.front();
    for (const Candidate& start : ranked) {
        Candidate cur = start;
        double step = (hi - lo) / 14.0;
        while (true) {
            if (integer_axis) step = std::max(1.0, std::round(step));
            bool improved = false;
            auto try_move = [&](double d3, double d1, double d2, double d4) {
                Thresholds th = cur.th;
                th.theta3 += d3 * step;
                th.theta1 += d1 * step;
                th.theta2 += d2 * step;
                th.theta4 += d4 * step;
                if (!ordered(th.theta3, th.theta1, th.theta2, th.theta4)) return;
                if (constrained && imbalance_of(th) >= kBalanceTolerance) return;
                const double r = obj.rate(th);
                if (r > cur.rate) {
                    cur = {r, th};
                    improved = true;
                }
            };
            for (double a : {-1.0, 1.0}) {
                try_move(a, 0, 0, 0);
                try_move(0, a, 0, 0);
                try_move(0, 0, a, 0);
                try_move(0, 0, 0, a);
                for (double b : {-1.0, 1.0}) {
                    try_move(a, b, 0, 0);
                    try_move(a, 0, b, 0);
                    try_move(a, 0, 0, b);
                    try_move(0, a, b, 0);
                    try_move(0, a, 0, b);
                    try_move(0, 0, a, b);
                }
            }
            if (!improved) {
                if (step <= tol) break;
                step *= 0.5;
                if (integer_axis && step < 1.0) break;
            }
        }
        if (cur.rate > best.rate) best = cur;
    }

    ThresholdSearchResult res;
    res.thresholds = best.th;
    obj.rate(best.th, &res.breakdown);
    res.positive_rate = res.breakdown.rate > 0.0;
    res.imbalance = key_imbalance(model, best.th);
    return res;
}

}  // namespace qkdline::sifting
