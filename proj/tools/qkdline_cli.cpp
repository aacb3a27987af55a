#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qkdline/pipeline.hpp"
#include "qkdline/randomness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInsecure = 2;
constexpr int kExitIntervention = 3;

qkdline::pipeline::RunConfig load_config(const std::string& path,
                                         const std::optional<std::uint64_t>& seed,
                                         const std::string& output) {
    auto cfg = qkdline::pipeline::RunConfig::from_file(path);
    if (seed) cfg.seed = *seed;
    if (const char* env = std::getenv("QKDLINE_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
    if (!output.empty()) cfg.output_dir = output;
    return cfg;
}

void print_report(const qkdline::pipeline::RunReport& rep) {
    using std::cout;
    cout << "verdict: " << qkdline::pipeline::verdict_name(rep.verdict) << '\n';
    cout << "reflectometry: " << rep.otdr.events.size() << " events ("
         << rep.otdr.amplifier_events << " amplifiers, " << rep.otdr.leak_events << " leaks)\n";
    cout << "transmittometry: " << rep.transmit.alarms.size() << " alarms over "
         << rep.transmit.epochs << " epochs\n";
    cout << "sift: p_conc " << rep.breakdown.stats.p_conc << ", p_err "
         << rep.breakdown.stats.p_err << ", imbalance " << rep.imbalance << '\n';
    cout << "secrecy: S(A) " << rep.budget.s_a << ", chi " << rep.budget.chi << ", overlap "
         << rep.overlap << '\n';
    cout << "bits: raw " << rep.stages.raw_bits << " -> sifted " << rep.stages.sifted_bits
         << " -> corrected " << rep.stages.corrected_bits << " -> final "
         << rep.stages.final_bits << '\n';
    cout << "throughput: " << rep.stages.final_bps << " bit/s final ("
         << rep.stages.raw_bps << " bit/s raw)\n";
    if (!rep.key_path.empty()) cout << "key file: " << rep.key_path.string() << '\n';
    cout << "report: " << rep.report_path.string() << '\n';
}

int verdict_exit(qkdline::pipeline::Verdict v) {
    switch (v) {
        case qkdline::pipeline::Verdict::Secure: return kExitOk;
        case qkdline::pipeline::Verdict::Insecure: return kExitInsecure;
        case qkdline::pipeline::Verdict::Intervention: return kExitIntervention;
    }
    return kExitError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Loss-controlled QKD line simulator and toolkit"};
    app.require_subcommand(1);

    std::string config_path, output_dir, trace_path, key_path, param = "r_e";
    std::optional<std::uint64_t> seed;
    std::vector<double> values;
    std::size_t segment_bits = 100000;

    auto add_common = [&](CLI::App* cmd, bool need_config) {
        auto* opt = cmd->add_option("-c,--config", config_path, "key=value config file");
        if (need_config) opt->required();
        cmd->add_option("-s,--seed", seed, "root seed override");
        cmd->add_option("-o,--output", output_dir, "output directory override");
    };

    auto* sim = app.add_subcommand("simulate", "run the full protocol pipeline");
    add_common(sim, true);

    auto* sweep = app.add_subcommand("sweep", "key rate across a parameter grid");
    add_common(sweep, true);
    sweep->add_option("-p,--param", param, "swept parameter: r_e or spans");
    sweep->add_option("-v,--values", values, "grid values")->required();

    auto* otdr = app.add_subcommand("otdr", "reflectometry synthesis/analysis");
    add_common(otdr, true);
    otdr->add_option("-t,--trace", trace_path, "existing trace CSV instead of synthesis");

    auto* transmit = app.add_subcommand("transmit", "transmittometry monitoring run");
    add_common(transmit, true);

    auto* keytest = app.add_subcommand("keytest", "randomness battery on a key file");
    keytest->add_option("-k,--key", key_path, "packed key file")->required();
    keytest->add_option("--segment", segment_bits, "segment size in bits");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            const auto rep = qkdline::pipeline::run_simulate(load_config(config_path, seed, output_dir));
            print_report(rep);
            return verdict_exit(rep.verdict);
        }
        if (sweep->parsed()) {
            const auto cfg = load_config(config_path, seed, output_dir);
            const auto rows = qkdline::pipeline::run_sweep(cfg, param, values);
            std::filesystem::create_directories(cfg.output_dir);
            const auto csv = cfg.output_dir / "sweep.csv";
            qkdline::pipeline::write_sweep_csv(csv, param, rows);
            for (const auto& r : rows)
                std::cout << param << " = " << r.value << ": rate " << r.analytic_rate
                          << ", final " << r.final_bps << " bit/s, " << r.verdict
                          << (r.error.empty() ? "" : " [" + r.error + "]") << '\n';
            std::cout << "table: " << csv.string() << '\n';
            return kExitOk;
        }
        if (otdr->parsed()) {
            const auto cfg = load_config(config_path, seed, output_dir);
            const auto sum = trace_path.empty()
                                 ? qkdline::pipeline::run_otdr(cfg, true)
                                 : qkdline::pipeline::run_otdr_trace(trace_path, cfg, true);
            for (const auto& ev : sum.events)
                std::cout << qkdline::losscontrol::event_kind_name(ev.kind) << " at "
                          << ev.position_km << " km, magnitude " << ev.magnitude << '\n';
            std::cout << sum.events.size() << " events (" << sum.amplifier_events
                      << " amplifiers); intervention: " << (sum.intervention ? "yes" : "no")
                      << '\n';
            return sum.intervention ? kExitIntervention : kExitOk;
        }
        if (transmit->parsed()) {
            const auto cfg = load_config(config_path, seed, output_dir);
            const auto sum = qkdline::pipeline::run_transmit(cfg, true);
            std::cout << sum.alarms.size() << " alarms over " << sum.epochs
                      << " epochs, mean loss " << sum.mean_loss << '\n';
            return sum.intervention ? kExitIntervention : kExitOk;
        }
        if (keytest->parsed()) {
            const auto key = qkdline::BitKey::load(key_path);
            const auto rep = qkdline::postprocess::randomness_battery(key, segment_bits);
            for (const auto& t : rep.tests)
                std::cout << t.name << ": "
                          << (t.applicable
                                  ? (t.pass ? "pass" : "fail")
                                  : "n/a")
                          << " (p " << t.p_value << ", proportion " << t.proportion << ")\n";
            std::cout << "aggregate: " << (rep.aggregate_pass ? "pass" : "fail") << '\n';
            return rep.aggregate_pass ? kExitOk : kExitInsecure;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
