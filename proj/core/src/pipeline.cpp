#include "qkdline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qkdline/bitkey.hpp"
#include "qkdline/ldpc.hpp"
#include "qkdline/math.hpp"
#include "qkdline/rng.hpp"
#include "qkdline/toeplitz.hpp"

namespace qkdline::pipeline {

namespace {

using nlohmann::json;

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot hash missing file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    std::ostringstream out;
    out << "fnv64:" << std::hex << fnv1a64(bytes);
    return out.str();
}

BitKey random_bits(std::size_t count, std::uint64_t seed) {
    BitKey k(count);
    std::mt19937_64 rng(seed);
    for (auto& w : k.words()) w = rng();
    return BitKey::from_bytes(k.to_bytes(), count);
}

json thresholds_json(const sifting::Thresholds& th) {
    return json{{"theta1", th.theta1},
                {"theta2", th.theta2},
                {"theta3", th.theta3},
                {"theta4", th.theta4}};
}

json events_json(const std::vector<losscontrol::LossEvent>& events) {
    json arr = json::array();
    for (const auto& ev : events)
        arr.push_back({{"position_km", ev.position_km},
                       {"magnitude", ev.magnitude},
                       {"kind", losscontrol::event_kind_name(ev.kind)}});
    return arr;
}

json randomness_json(const postprocess::RandomnessReport& rep) {
    json tests = json::array();
    for (const auto& t : rep.tests)
        tests.push_back({{"test", t.name},
                         {"applicable", t.applicable},
                         {"p_value", t.p_value},
                         {"proportion", t.proportion},
                         {"segments", t.segments},
                         {"assessment", t.applicable ? (t.pass ? "pass" : "fail") : "n/a"}});
    return json{{"tests", tests},
                {"segment_bits", rep.segment_bits},
                {"segments", rep.segments},
                {"aggregate_pass", rep.aggregate_pass}};
}

json report_json(const RunReport& rep, const RunConfig& cfg) {
    json cfg_echo = json::array();
    for (const auto& e : cfg.raw.entries()) cfg_echo.push_back({{"key", e.key}, {"value", e.value}});
    json j;
    j["config"] = cfg_echo;
    j["seed"] = rep.seed;
    j["verdict"] = verdict_name(rep.verdict);
    j["reflectometry"] = {{"events", events_json(rep.otdr.events)},
                          {"amplifier_events", rep.otdr.amplifier_events},
                          {"leak_events", rep.otdr.leak_events},
                          {"intervention", rep.otdr.intervention},
                          {"trace_samples", rep.otdr.trace_samples},
                          {"resolution_km", rep.otdr.resolution_km}};
    j["transmittometry"] = {{"alarms", rep.transmit.alarms},
                            {"intervention", rep.transmit.intervention},
                            {"mean_loss", rep.transmit.mean_loss},
                            {"epochs", rep.transmit.epochs}};
    j["sift"] = {{"thresholds", thresholds_json(rep.thresholds)},
                 {"p_conc_0", rep.breakdown.stats.p_conc_0},
                 {"p_conc_1", rep.breakdown.stats.p_conc_1},
                 {"p_conc", rep.breakdown.stats.p_conc},
                 {"p_err", rep.breakdown.stats.p_err},
                 {"empirical_p_err", rep.empirical_p_err},
                 {"imbalance", rep.imbalance}};
    j["secrecy"] = {{"s_a", rep.budget.s_a},
                    {"s_a_given_b", rep.budget.s_a_given_b},
                    {"chi", rep.budget.chi},
                    {"f", rep.budget.f},
                    {"p_conc", rep.budget.p_conc},
                    {"raw_length", rep.budget.raw_length},
                    {"state_overlap", rep.overlap},
                    {"key_length_formula_bits", rep.budget_verdict.bits},
                    {"key_length_formula_secure", rep.budget_verdict.secure}};
    j["stages"] = {{"raw_bits", rep.stages.raw_bits},
                   {"sifted_bits", rep.stages.sifted_bits},
                   {"corrected_bits", rep.stages.corrected_bits},
                   {"final_bits", rep.stages.final_bits},
                   {"wall_seconds", rep.stages.wall_seconds},
                   {"raw_bps", rep.stages.raw_bps},
                   {"sifted_bps", rep.stages.sifted_bps},
                   {"corrected_bps", rep.stages.corrected_bps},
                   {"final_bps", rep.stages.final_bps}};
    j["error_correction"] = {{"block_length", rep.ec.block_length},
                             {"blocks", rep.ec.blocks},
                             {"succeeded", rep.ec.succeeded},
                             {"failed", rep.ec.failed},
                             {"dropped_bits", rep.ec.dropped_bits},
                             {"disclosed_bits", rep.ec.disclosed_bits},
                             {"effective_f", rep.ec.effective_f}};
    j["randomness"] = randomness_json(rep.randomness);
    json manifest = json::object();
    for (const auto& [name, digest] : rep.manifest) manifest[name] = digest;
    j["files"] = manifest;
    return j;
}

sifting::Thresholds parse_thresholds(const std::string& text, const std::string& origin) {
    const auto v = ConfigMap::tokens_as_doubles(text);
    if (v.size() != 4)
        throw std::runtime_error(origin + ": thresholds expect 'theta1 theta2 theta3 theta4'");
    sifting::Thresholds th{v[0], v[1], v[2], v[3]};
    th.validate();
    return th;
}

}  // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Secure: return "secure";
        case Verdict::Insecure: return "insecure";
        case Verdict::Intervention: return "intervention";
    }
    return "unknown";
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    return from_config(ConfigMap::parse_file(path));
}

RunConfig RunConfig::from_config(ConfigMap cfg) {
    RunConfig rc;
    rc.line = channel::line_from_config(cfg);
    rc.pulse = channel::pulse_from_config(cfg);
    rc.detection = channel::detection_from_config(cfg, rc.line, rc.pulse);

    rc.r_e = cfg.get_double("r_e", rc.r_e);
    if (!(rc.r_e >= 0.0 && rc.r_e <= 1.0))
        throw std::runtime_error(cfg.origin() + ": r_e outside [0,1]");
    rc.f = cfg.get_double("f", rc.f);
    const std::string th = cfg.get_string("thresholds", "optimize");
    if (th == "optimize") {
        rc.optimize_thresholds = true;
    } else {
        rc.optimize_thresholds = false;
        rc.thresholds = parse_thresholds(th, cfg.origin());
    }
    rc.code_rate = cfg.get_double("code_rate", rc.code_rate);
    rc.ec_block = cfg.get_uint64("ec_block", rc.ec_block);
    rc.pa_min_bits = cfg.get_uint64("pa_min_bits", rc.pa_min_bits);
    rc.raw_rate_bps = cfg.get_double("raw_rate", rc.raw_rate_bps);
    rc.duty_cycle = cfg.get_double("duty_cycle", rc.duty_cycle);
    if (!(rc.duty_cycle > 0.0 && rc.duty_cycle <= 1.0))
        throw std::runtime_error(cfg.origin() + ": duty_cycle outside (0,1]");
    rc.raw_bits = cfg.get_uint64("raw_bits", rc.raw_bits);

    rc.transmit_sigma = cfg.get_double("transmit_sigma", rc.transmit_sigma);
    rc.transmit_k = cfg.get_double("transmit_k", rc.transmit_k);
    rc.transmit_epochs = cfg.get_uint64("transmit_epochs", rc.transmit_epochs);
    rc.tap_fraction = cfg.get_double("tap_fraction", rc.tap_fraction);
    rc.tap_epoch = (long long)(cfg.get_double("tap_epoch", -1.0));

    rc.otdr_noise_db = cfg.get_double("otdr_noise", rc.otdr_noise_db);
    rc.otdr_pulse_s = cfg.get_double("otdr_pulse", rc.otdr_pulse_s);
    rc.otdr_averaging = cfg.get_uint64("otdr_averaging", rc.otdr_averaging);
    rc.otdr_lambda = cfg.get_double("otdr_lambda", rc.otdr_lambda);
    rc.otdr_jump_db = cfg.get_double("otdr_jump", rc.otdr_jump_db);
    rc.leak_alarm_fraction = cfg.get_double("leak_alarm", rc.leak_alarm_fraction);
    for (const std::string& leak : cfg.get_all("leak")) {
        const auto v = ConfigMap::tokens_as_doubles(leak);
        if (v.size() != 2)
            throw std::runtime_error(cfg.origin() + ": leak expects 'position_km fraction'");
        rc.injected_leaks.push_back({v[0], v[1], losscontrol::EventKind::Leak});
    }

    rc.battery_segment = cfg.get_uint64("battery_segment", rc.battery_segment);
    rc.emit_samples = cfg.get_bool("emit_samples", rc.emit_samples);
    rc.seed = cfg.get_uint64("seed", rc.seed);
    rc.output_dir = cfg.get_string("output_dir", rc.output_dir.string());
    rc.raw = std::move(cfg);
    return rc;
}

namespace {

OtdrSummary analyze_trace(const losscontrol::OTDRTrace& trace, const RunConfig& cfg,
                          bool emit_files) {
    const auto filtered = losscontrol::l1_trend_filter(trace, cfg.otdr_lambda);
    OtdrSummary sum;
    sum.events = losscontrol::localize_losses(filtered, cfg.otdr_jump_db);
    sum.trace_samples = trace.size();
    sum.resolution_km = trace.resolution_km;
    for (const auto& ev : sum.events) {
        if (ev.kind == losscontrol::EventKind::Amplifier) {
            ++sum.amplifier_events;
        } else {
            ++sum.leak_events;
            if (ev.magnitude >= cfg.leak_alarm_fraction) sum.intervention = true;
        }
    }
    if (emit_files) {
        std::filesystem::create_directories(cfg.output_dir);
        losscontrol::write_trace_csv(cfg.output_dir / "otdr_filtered.csv", filtered);
        json j;
        j["events"] = events_json(sum.events);
        j["intervention"] = sum.intervention;
        j["resolution_km"] = sum.resolution_km;
        std::ofstream out(cfg.output_dir / "otdr_events.json");
        out << j.dump(2) << '\n';
    }
    return sum;
}

}  // namespace

OtdrSummary run_otdr(const RunConfig& cfg, bool emit_files) {
    const auto trace = losscontrol::synthesize_otdr(cfg.line, cfg.injected_leaks,
                                                    cfg.otdr_noise_db, cfg.otdr_pulse_s,
                                                    cfg.otdr_averaging,
                                                    derive_seed(cfg.seed, "otdr"));
    if (emit_files) {
        std::filesystem::create_directories(cfg.output_dir);
        losscontrol::write_trace_csv(cfg.output_dir / "otdr_raw.csv", trace);
    }
    return analyze_trace(trace, cfg, emit_files);
}

OtdrSummary run_otdr_trace(const std::filesystem::path& trace_csv, const RunConfig& cfg,
                           bool emit_files) {
    return analyze_trace(losscontrol::read_trace_csv(trace_csv), cfg, emit_files);
}

TransmitSummary run_transmit(const RunConfig& cfg, bool emit_files) {
    std::mt19937_64 rng(derive_seed(cfg.seed, "transmit"));
    std::normal_distribution<double> noise(0.0, cfg.transmit_sigma);
    std::vector<double> losses(cfg.transmit_epochs);
    double sum = 0.0;
    for (std::size_t t = 0; t < losses.size(); ++t) {
        losses[t] = noise(rng);
        if (cfg.tap_epoch >= 0 && (long long)t >= cfg.tap_epoch) losses[t] += cfg.tap_fraction;
        sum += losses[t];
    }
    TransmitSummary out;
    out.epochs = losses.size();
    out.mean_loss = losses.empty() ? 0.0 : sum / double(losses.size());
    out.alarms = losscontrol::detect_intervention(losses, cfg.transmit_sigma, cfg.transmit_k);
    out.intervention = !out.alarms.empty();
    if (emit_files) {
        std::filesystem::create_directories(cfg.output_dir);
        std::ofstream csv(cfg.output_dir / "transmit_losses.csv");
        csv << "epoch,loss\n";
        csv.precision(10);
        for (std::size_t t = 0; t < losses.size(); ++t) csv << t << ',' << losses[t] << '\n';
        json j;
        j["alarms"] = out.alarms;
        j["intervention"] = out.intervention;
        j["mean_loss"] = out.mean_loss;
        std::ofstream jf(cfg.output_dir / "transmit_alarms.json");
        jf << j.dump(2) << '\n';
    }
    return out;
}

RunReport run_simulate(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    RunReport rep;
    rep.seed = cfg.seed;
    rep.overlap = secrecy::state_overlap(cfg.pulse.n0, cfg.pulse.n1, cfg.r_e);

    rep.otdr = run_otdr(cfg);
    rep.transmit = run_transmit(cfg);
    const bool line_clear = !rep.otdr.intervention && !rep.transmit.intervention;

    const double wall =
        double(cfg.raw_bits) / (cfg.raw_rate_bps * cfg.duty_cycle);
    rep.stages.raw_bits = cfg.raw_bits;
    rep.stages.wall_seconds = wall;
    rep.stages.raw_bps = double(cfg.raw_bits) / wall;

    const auto ctx = sifting::make_secrecy_context(cfg.r_e, cfg.pulse.n0, cfg.pulse.n1, cfg.f);
    if (cfg.optimize_thresholds) {
        const auto search = sifting::optimize_thresholds(cfg.detection, ctx);
        rep.thresholds = search.thresholds;
        rep.breakdown = search.breakdown;
        rep.imbalance = search.imbalance;
    } else {
        rep.thresholds = cfg.thresholds;
        rep.breakdown = sifting::asymptotic_rate(cfg.detection, cfg.thresholds, ctx);
        rep.imbalance = sifting::key_imbalance(cfg.detection, cfg.thresholds);
    }

    rep.budget.s_a = rep.breakdown.s_a;
    rep.budget.s_a_given_b = rep.breakdown.s_a_given_b;
    rep.budget.chi = rep.breakdown.chi;
    rep.budget.f = cfg.f;
    rep.budget.p_conc = rep.breakdown.stats.p_conc;
    rep.budget.raw_length = double(cfg.raw_bits);
    rep.budget_verdict = secrecy::final_key_length(rep.budget);

    BitKey final_key;
    if (line_clear && rep.breakdown.rate > 0.0) {
        const BitKey sent = random_bits(cfg.raw_bits, derive_seed(cfg.seed, "bits"));
        std::vector<double> values(cfg.raw_bits);
        {
            std::mt19937_64 rng(derive_seed(cfg.seed, "bob"));
            if (cfg.detection.is_poisson()) {
                std::poisson_distribution<long long> d0(std::max(cfg.detection.mean(0), 1e-12));
                std::poisson_distribution<long long> d1(std::max(cfg.detection.mean(1), 1e-12));
                for (std::size_t i = 0; i < values.size(); ++i)
                    values[i] = double(sent.get(i) ? d1(rng) : d0(rng));
            } else {
                std::normal_distribution<double> d0(cfg.detection.mean(0),
                                                    cfg.detection.stddev(0));
                std::normal_distribution<double> d1(cfg.detection.mean(1),
                                                    cfg.detection.stddev(1));
                for (std::size_t i = 0; i < values.size(); ++i)
                    values[i] = sent.get(i) ? d1(rng) : d0(rng);
            }
        }
        if (cfg.emit_samples) {
            std::vector<int> bits(cfg.raw_bits);
            for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = sent.get(i);
            channel::write_samples_csv(cfg.output_dir / "samples.csv", bits, values);
        }

        const auto sifted = sifting::sift(values, sent, rep.thresholds);
        const BitKey alice = sifting::select_bits(sent, sifted.kept_indices);
        rep.stages.sifted_bits = sifted.raw_key.size();
        rep.empirical_p_err =
            sifted.raw_key.empty()
                ? 0.0
                : double(alice.hamming_distance(sifted.raw_key)) / double(sifted.raw_key.size());

        rep.ec.block_length = cfg.ec_block;
        rep.ec.blocks = sifted.raw_key.size() / cfg.ec_block;
        rep.ec.dropped_bits = sifted.raw_key.size() - rep.ec.blocks * cfg.ec_block;
        BitKey corrected;
        if (rep.ec.blocks > 0) {
            const auto code =
                postprocess::LdpcCode::make(cfg.ec_block, cfg.code_rate, derive_seed(cfg.seed, "ldpc"));
            const std::uint64_t verify_base = derive_seed(cfg.seed, "verify");
            const double p_dec = std::clamp(rep.breakdown.stats.p_err, 1e-4, 0.499);
            for (std::size_t b = 0; b < rep.ec.blocks; ++b) {
                const BitKey a = alice.slice(b * cfg.ec_block, cfg.ec_block);
                const BitKey v = sifted.raw_key.slice(b * cfg.ec_block, cfg.ec_block);
                const auto rr = postprocess::reconcile(a, v, code, p_dec, splitmix64(verify_base ^ b));
                if (rr.success) {
                    corrected.append(rr.corrected);
                    rep.ec.disclosed_bits += rr.disclosed_bits;
                    ++rep.ec.succeeded;
                } else {
                    ++rep.ec.failed;
                }
            }
        }
        rep.stages.corrected_bits = corrected.size();
        if (corrected.size() > 0 && rep.breakdown.stats.p_err > 0.0)
            rep.ec.effective_f = (double(rep.ec.disclosed_bits) / double(corrected.size())) /
                                 math::binary_entropy(rep.breakdown.stats.p_err);

        // Privacy amplification budget: the formula's f*S(A|B) term instantiated
        // with the bits actually disclosed during correction.
        const double n_budget =
            double(corrected.size()) * (rep.budget.s_a - rep.budget.chi) -
            double(rep.ec.disclosed_bits);
        if (corrected.size() >= cfg.pa_min_bits && n_budget >= 1.0) {
            const std::size_t n_f = std::size_t(std::floor(n_budget));
            const auto seed_t = postprocess::ToeplitzSeed::random(
                n_f, corrected.size(), derive_seed(cfg.seed, "toeplitz"));
            final_key = postprocess::privacy_amplify(corrected, n_f, seed_t);
            rep.stages.final_bits = final_key.size();
            rep.verdict = Verdict::Secure;
        } else {
            rep.verdict = Verdict::Insecure;
        }
    } else {
        rep.verdict = line_clear ? Verdict::Insecure : Verdict::Intervention;
    }

    rep.stages.sifted_bps = double(rep.stages.sifted_bits) / wall;
    rep.stages.corrected_bps = double(rep.stages.corrected_bits) / wall;
    rep.stages.final_bps = double(rep.stages.final_bits) / wall;

    if (rep.verdict == Verdict::Secure) {
        if (final_key.size() >= 128)
            rep.randomness = postprocess::randomness_battery(final_key, cfg.battery_segment);
        rep.key_path = cfg.output_dir / "final_key.qkey";
        final_key.save(rep.key_path);
        rep.manifest["final_key.qkey"] = file_digest(rep.key_path);
    }
    if (cfg.emit_samples)
        rep.manifest["samples.csv"] = file_digest(cfg.output_dir / "samples.csv");

    rep.report_path = cfg.output_dir / "report.json";
    std::ofstream out(rep.report_path);
    if (!out) throw std::runtime_error("cannot write report: " + rep.report_path.string());
    out << report_json(rep, cfg).dump(2) << '\n';
    return rep;
}

std::vector<SweepRow> run_sweep(const RunConfig& base, const std::string& parameter,
                                const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("sweep grid is empty");
    if (parameter != "r_e" && parameter != "spans")
        throw std::invalid_argument("unsupported sweep parameter: " + parameter);
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < values.size(); ++i) {
        SweepRow row;
        row.value = values[i];
        try {
            RunConfig cfg = base;
            cfg.output_dir = base.output_dir / "sweep" / (parameter + "_" + std::to_string(i));
            if (parameter == "r_e") {
                if (!(values[i] >= 0.0 && values[i] <= 1.0))
                    throw std::invalid_argument("r_e outside [0,1]");
                cfg.r_e = values[i];
            } else {
                const long long units = std::llround(values[i]);
                if (units < 1) throw std::invalid_argument("span count must be >= 1");
                const channel::FiberSpan* span0 = nullptr;
                const channel::Amplifier* amp0 = nullptr;
                for (const auto& e : base.line.elements) {
                    if (!span0) span0 = std::get_if<channel::FiberSpan>(&e);
                    if (!amp0) amp0 = std::get_if<channel::Amplifier>(&e);
                    if (span0 && amp0) break;
                }
                if (!span0) throw std::invalid_argument("base line has no fiber span to repeat");
                cfg.line.elements.clear();
                for (long long u = 0; u < units; ++u) {
                    cfg.line.elements.push_back(*span0);
                    if (amp0) cfg.line.elements.push_back(*amp0);
                }
                cfg.detection = channel::detection_from_config(base.raw, cfg.line, cfg.pulse);
            }
            const RunReport rep = run_simulate(cfg);
            row.analytic_rate = rep.breakdown.rate;
            row.final_bps = rep.stages.final_bps;
            row.verdict = verdict_name(rep.verdict);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::string& parameter,
                     const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write sweep CSV: " + path.string());
    out << "parameter,value,analytic_rate,final_bps,verdict,error\n";
    out.precision(12);
    for (const auto& r : rows) {
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        out << parameter << ',' << r.value << ',' << r.analytic_rate << ',' << r.final_bps << ','
            << r.verdict << ',' << err << '\n';
    }
}

}  // namespace qkdline::pipeline
