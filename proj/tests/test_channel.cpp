#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "qkdline/channel.hpp"
#include "reference.hpp"

using namespace qkdline;
using namespace qkdline::channel;

namespace {

double sample_mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double sample_sd(const std::vector<double>& v) {
    const double m = sample_mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / double(v.size() - 1));
}

}  // namespace

TEST_CASE("mean propagation through spans and amplifiers") {
    LineModel single;
    single.elements = {FiberSpan{50.0, 0.2}};
    CHECK(end_to_end_mean(single, 12300.0) == doctest::Approx(1230.0).epsilon(1e-12));

    LineModel restored = single;
    restored.elements.push_back(Amplifier{10.0, 0.0});
    CHECK(end_to_end_mean(restored, 12300.0) == doctest::Approx(12300.0).epsilon(1e-12));

    LineModel noisy;
    noisy.elements = {FiberSpan{50.0, 0.2}, Amplifier{10.0, 5.0}, FiberSpan{50.0, 0.2}};
    // (n/10 * 10 + 5) / 10 by hand
    CHECK(end_to_end_mean(noisy, 1000.0) == doctest::Approx((1000.0 + 5.0) / 10.0).epsilon(1e-12));

    CHECK_THROWS(end_to_end_mean(single, -1.0));
}

TEST_CASE("balanced line is the identity for any segment count") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> len(5.0, 80.0);
    for (int units : {1, 7, 21, 40}) {
        LineModel line;
        for (int u = 0; u < units; ++u) {
            const double km = len(rng);
            line.elements.push_back(FiberSpan{km, 0.2});
            line.elements.push_back(Amplifier{0.2 * km, 0.0});
        }
        CHECK(end_to_end_mean(line, 13700.0) == doctest::Approx(13700.0).epsilon(1e-9));
        CHECK(line.amplifier_count() == std::size_t(units));
        CHECK(std::fabs(line.total_loss_db()) < 1e-9);
    }
}

TEST_CASE("line bookkeeping and validation") {
    LineModel line;
    line.elements = {FiberSpan{50.0, 0.2}, Amplifier{10.0, 0.0}, FiberSpan{29.0, 0.2}};
    CHECK(line.total_length_km() == doctest::Approx(79.0));
    CHECK(line.amplifier_count() == 1);
    CHECK(line.total_loss_db() == doctest::Approx(50.0 * 0.2 + 29.0 * 0.2 - 10.0));

    LineModel bad;
    bad.elements = {FiberSpan{-1.0, 0.2}};
    CHECK_THROWS(bad.validate());
}

TEST_CASE("gaussian samples reproduce calibrated moments") {
    const auto model = DetectionModel::gaussian(0.138, 0.044, 0.176, 0.050, 1e-5);
    const auto v = model.sample(0, 1000000, 21);
    CHECK(std::fabs(sample_mean(v) - 0.138) < 0.001);
    CHECK(std::fabs(sample_sd(v) - 0.044) < 0.001);
    const auto w = model.sample(1, 200000, 22);
    CHECK(std::fabs(sample_mean(w) - 0.176) < 0.001);
    CHECK(model.mean(0) == doctest::Approx(0.138));
    CHECK(model.stddev(1) == doctest::Approx(0.050));
}

TEST_CASE("poisson samples: degenerate mean and variance law") {
    const auto zero = DetectionModel::poisson(0.0, 50.0);
    for (double x : zero.sample(0, 1000, 23)) CHECK(x == 0.0);

    const auto model = DetectionModel::poisson(100.0, 140.0);
    const auto v = model.sample(0, 200000, 24);
    const double m = sample_mean(v), sd = sample_sd(v);
    CHECK(std::fabs(m - 100.0) < 4.0 * std::sqrt(100.0 / 200000.0));
    CHECK(std::fabs(sd * sd - 100.0) < 0.05 * 100.0);

    CHECK_THROWS(model.sample(2, 10, 1));
    CHECK_THROWS(sample_bob(model, -1, 10, 1));
}

TEST_CASE("tap samples scale with the tapped fraction") {
    PulseSpec spec;
    spec.n0 = 12300.0;
    spec.n1 = 15100.0;
    spec.pulse_duration_ns = 10.0;

    for (double x : sample_eve(spec, EveTap{0.0}, 0, 5000, 31)) CHECK(x == 0);

    const auto one_pct = sample_eve(spec, EveTap{0.01}, 1, 200000, 32);
    double m = 0.0;
    for (auto x : one_pct) m += double(x);
    m /= double(one_pct.size());
    CHECK(std::fabs(m - 151.0) < 3.0 * std::sqrt(151.0 / 200000.0) + 0.05);

    const auto full = sample_eve(spec, EveTap{1.0}, 0, 200000, 33);
    double mf = 0.0;
    for (auto x : full) mf += double(x);
    mf /= double(full.size());
    CHECK(std::fabs(mf - 12300.0) < 4.0 * std::sqrt(12300.0 / 200000.0));

    CHECK_THROWS(EveTap{1.5}.validate());
    CHECK_THROWS(sample_eve(spec, EveTap{-0.1}, 0, 10, 1));
}

TEST_CASE("tap statistics depend only on the tapped mean") {
    PulseSpec a;
    a.n0 = 8000.0;
    a.n1 = 8000.0;
    a.pulse_duration_ns = 10.0;
    PulseSpec b;
    b.n0 = 4000.0;
    b.n1 = 4000.0;
    b.pulse_duration_ns = 10.0;
    const auto va = sample_eve(a, EveTap{0.01}, 0, 2000, 77);
    const auto vb = sample_eve(b, EveTap{0.02}, 0, 2000, 77);
    CHECK(va == vb);
}

TEST_CASE("analytic distributions: normalization, mode, moments") {
    const auto poi = DetectionModel::poisson(5.0, 9.0);
    const Pmf p = poi.analytic_pmf(0);
    CHECK(std::fabs(p.total_mass() - 1.0) < 1e-9);
    CHECK(p.probs[0] == doctest::Approx(std::exp(-5.0)).epsilon(1e-12));
    CHECK(p.mean() == doctest::Approx(5.0).epsilon(1e-9));

    const auto gau = DetectionModel::gaussian(0.138, 0.044, 0.176, 0.050, 1e-5);
    const Pmf g = gau.analytic_pmf(1);
    CHECK(std::fabs(g.total_mass() - 1.0) < 1e-9);
    const std::size_t mode =
        std::max_element(g.probs.begin(), g.probs.end()) - g.probs.begin();
    const double bin = g.values[1] - g.values[0];
    CHECK(std::fabs(g.values[mode] - 0.176) <= bin);
    CHECK(g.mean() == doctest::Approx(0.176).epsilon(1e-6));
}

TEST_CASE("interval mass matches the distribution functions") {
    const auto poi = DetectionModel::poisson(20.0, 30.0);
    const auto pmf = poi.analytic_pmf(0);
    double direct = 0.0;
    for (std::size_t k = 0; k < pmf.values.size(); ++k)
        if (pmf.values[k] >= 15.0 && pmf.values[k] <= 25.0) direct += pmf.probs[k];
    CHECK(poi.interval_mass(0, 15.0, 25.0) == doctest::Approx(direct).epsilon(1e-12));

    const auto gau = DetectionModel::gaussian(0.0, 1.0, 3.0, 1.0, 1.0);
    CHECK(gau.interval_mass(0, -1.0, 1.0) ==
          doctest::Approx(std::erf(1.0 / std::sqrt(2.0))).epsilon(1e-12));
}

TEST_CASE("sampled histograms match the analytic distribution") {
    // Poisson: exact counts on the integer grid.
    const auto poi = DetectionModel::poisson(40.0, 60.0);
    const auto pv = poi.sample(0, 1000000, 41);
    const Pmf pp = poi.analytic_pmf(0);
    std::vector<double> hist(pp.values.size(), 0.0);
    for (double x : pv) {
        const std::size_t k = std::size_t(x);
        if (k < hist.size()) hist[k] += 1.0;
    }
    double tv = 0.0;
    for (std::size_t k = 0; k < hist.size(); ++k)
        tv += std::fabs(hist[k] / double(pv.size()) - pp.probs[k]);
    CHECK(tv / 2.0 < 0.01);

    // Gaussian: binned on an explicit grid.
    const auto gau = DetectionModel::gaussian(0.138, 0.044, 0.176, 0.050, 1e-5);
    const double lo = 0.138 - 8.0 * 0.044, hi = 0.138 + 8.0 * 0.044;
    const std::size_t bins = 200;
    const Pmf gp = gau.analytic_pmf(0, lo, hi, bins);
    const auto gv = gau.sample(0, 1000000, 42);
    std::vector<double> ghist(bins, 0.0);
    const double width = (hi - lo) / double(bins);
    for (double x : gv) {
        const long b = long((x - lo) / width);
        if (b >= 0 && b < long(bins)) ghist[std::size_t(b)] += 1.0;
    }
    double gtv = 0.0;
    for (std::size_t b = 0; b < bins; ++b)
        gtv += std::fabs(ghist[b] / double(gv.size()) - gp.probs[b]);
    CHECK(gtv / 2.0 < 0.01);
}

TEST_CASE("sample mean matches analytic mean within four standard errors") {
    const auto poi = DetectionModel::poisson(33.0, 77.0);
    const auto gau = DetectionModel::gaussian(0.138, 0.044, 0.176, 0.050, 1e-5);
    for (int bit : {0, 1}) {
        const auto pv = poi.sample(bit, 1000000, 51 + bit);
        const double pse = poi.stddev(bit) / 1000.0;
        CHECK(std::fabs(sample_mean(pv) - poi.analytic_pmf(bit).mean()) < 4.0 * pse);
        const auto gv = gau.sample(bit, 1000000, 53 + bit);
        const double gse = gau.stddev(bit) / 1000.0;
        CHECK(std::fabs(sample_mean(gv) - gau.mean(bit)) < 4.0 * gse);
    }
}

TEST_CASE("sampling is seed-reproducible") {
    const auto model = DetectionModel::gaussian(0.1, 0.02, 0.2, 0.03, 1.0);
    CHECK(model.sample(0, 1000, 61) == model.sample(0, 1000, 61));
    CHECK(model.sample(0, 1000, 61) != model.sample(0, 1000, 62));
    PulseSpec spec;
    spec.n0 = 1000.0;
    spec.n1 = 2000.0;
    spec.pulse_duration_ns = 10.0;
    CHECK(sample_eve(spec, EveTap{0.01}, 1, 500, 63) == sample_eve(spec, EveTap{0.01}, 1, 500, 63));
}

TEST_CASE("line and detection construction from config text") {
    const ConfigMap cfg = ConfigMap::parse_string(
        "span = 50 0.2\n"
        "amp = 10 0\n"
        "span = 29 0.2\n"
        "wavelength = 1550\n"
        "n0 = 12300\n"
        "n1 = 13700\n"
        "pulse_duration = 10\n"
        "detection = gaussian\n"
        "v0 = 0.138\nsigma0 = 0.044\nv1 = 0.176\nsigma1 = 0.050\n"
        "volts_per_photon = 1e-5\n");
    const LineModel line = line_from_config(cfg);
    CHECK(line.total_length_km() == doctest::Approx(79.0));
    CHECK(line.amplifier_count() == 1);
    CHECK(line.wavelength_nm == 1550.0);

    const PulseSpec pulse = pulse_from_config(cfg);
    CHECK(pulse.n0 == 12300.0);
    CHECK(pulse.n1 == 13700.0);

    const DetectionModel det = detection_from_config(cfg, line, pulse);
    CHECK(det.is_gaussian());
    CHECK(det.as_gaussian().v0 == 0.138);

    const ConfigMap poi = ConfigMap::parse_string(
        "span = 50 0.2\nn0 = 12300\nn1 = 13700\npulse_duration = 10\ndetection = poisson\n");
    const DetectionModel pd =
        detection_from_config(poi, line_from_config(poi), pulse_from_config(poi));
    CHECK(pd.is_poisson());
    CHECK(pd.as_poisson().mean0 == doctest::Approx(1230.0));

    CHECK_THROWS(line_from_config(ConfigMap::parse_string("span = oops\n")));
}
