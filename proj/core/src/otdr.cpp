#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "qkdline/losscontrol.hpp"
#include "qkdline/math.hpp"

namespace qkdline::losscontrol {

namespace {

struct StepPoint {
    double position_km;
    double step_db;
};

double median_of(std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + long(mid), v.end());
    return v[mid];
}

}  // namespace

const char* event_kind_name(EventKind kind) {
    switch (kind) {
        case EventKind::Leak: return "leak";
        case EventKind::Splice: return "splice";
        case EventKind::Amplifier: return "amplifier";
    }
    return "unknown";
}

double otdr_resolution_km(double pulse_duration_s) {
    if (pulse_duration_s <= 0) throw std::invalid_argument("pulse duration must be positive");
    const double v_fiber = math::speed_of_light / math::fiber_group_index;  // m/s
    return v_fiber * pulse_duration_s / 2.0 / 1000.0;
}

OTDRTrace synthesize_otdr(const channel::LineModel& line, const std::vector<LossEvent>& events,
                          double noise_std_db, double pulse_duration_s, std::size_t averaging,
                          std::uint64_t seed) {
    line.validate();
    if (averaging < 1) throw std::invalid_argument("averaging count must be at least 1");
    if (noise_std_db < 0) throw std::invalid_argument("noise std must be nonnegative");
    const double length_km = line.total_length_km();

    // Attenuation profile plus discrete steps: amplifiers appear twice in the
    // two-way backscatter path, configured events use their stated one-way dB.
    struct Segment {
        double start_km, end_km, att_db_per_km;
    };
    std::vector<Segment> segments;
    std::vector<StepPoint> steps;
    double z = 0.0;
    for (const auto& e : line.elements) {
        if (const auto* s = std::get_if<channel::FiberSpan>(&e)) {
            segments.push_back({z, z + s->length_km, s->attenuation_db_per_km});
            z += s->length_km;
        } else {
            steps.push_back({z, 2.0 * std::get<channel::Amplifier>(e).gain_db});
        }
    }
    for (const LossEvent& ev : events) {
        if (ev.position_km < 0 || ev.position_km > length_km)
            throw std::invalid_argument("loss event lies beyond the line end");
        if (ev.magnitude >= 1.0) throw std::invalid_argument("loss event magnitude must be < 1");
        steps.push_back({ev.position_km, 10.0 * std::log10(1.0 - ev.magnitude)});
    }
    std::sort(steps.begin(), steps.end(),
              [](const StepPoint& a, const StepPoint& b) { return a.position_km < b.position_km; });

    OTDRTrace trace;
    trace.resolution_km = otdr_resolution_km(pulse_duration_s);
    trace.pulse_duration_s = pulse_duration_s;
    trace.averaging = averaging;
    const std::size_t samples = std::size_t(std::floor(length_km / trace.resolution_km)) + 1;
    trace.power_db.resize(samples);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_std_db / std::sqrt(double(averaging)));
    std::size_t seg = 0, stp = 0;
    double level = 0.0, seg_done_km = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double zi = trace.distance_km(i);
        while (seg < segments.size() && zi >= segments[seg].end_km) {
            level -= 2.0 * segments[seg].att_db_per_km * (segments[seg].end_km - seg_done_km);
            seg_done_km = segments[seg].end_km;
            ++seg;
        }
        if (seg < segments.size() && zi > seg_done_km) {
            level -= 2.0 * segments[seg].att_db_per_km * (zi - seg_done_km);
            seg_done_km = zi;
        }
        while (stp < steps.size() && steps[stp].position_km <= zi) level += steps[stp++].step_db;
        trace.power_db[i] = level + (noise_std_db > 0 ? noise(rng) : 0.0);
    }
    return trace;
}

std::vector<LossEvent> localize_losses(const OTDRTrace& filtered, double jump_threshold_db) {
    if (jump_threshold_db <= 0) throw std::invalid_argument("jump threshold must be positive");
    std::vector<LossEvent> events;
    const std::size_t n = filtered.size();
    if (n < 3) return events;
    const std::size_t nd = n - 1;
    const auto& x = filtered.power_db;

    std::vector<double> deriv(nd);
    for (std::size_t i = 0; i < nd; ++i) deriv[i] = x[i + 1] - x[i];

    // The fiber slope is the background; a rolling median of the derivative
    // tracks it without being dragged by the step outliers.
    const std::size_t half = 50;
    std::vector<double> slope(nd);
    std::vector<double> buf;
    for (std::size_t i = 0; i < nd; ++i) {
        const std::size_t lo = i > half ? i - half : 0;
        const std::size_t hi = std::min(nd, i + half + 1);
        buf.assign(deriv.begin() + long(lo), deriv.begin() + long(hi));
        slope[i] = median_of(buf);
    }

    // Step statistic at derivative index j: difference of the mean levels in
    // windows on either side, skipping a guard zone around the step itself and
    // removing the background slope. Integrating over a window keeps small
    // steps visible even after the filter has spread them over a few samples.
    const std::size_t window = 12, guard = 3, pos_window = 4;
    auto step_db = [&](std::size_t j, double bg, std::size_t w, std::size_t g) {
        if (j < w + g || j + w + g >= n) {
            g = 0;
            w = std::min(std::min(w, j + 1), n - 1 - j);
            if (w == 0) return 0.0;
        }
        const std::size_t r1 = j + 1 + g, r2 = j + g + w;
        const std::size_t l2 = j - g, l1 = j - g + 1 - w;
        double right = 0.0, left = 0.0;
        for (std::size_t k = r1; k <= r2; ++k) right += x[k];
        for (std::size_t k = l1; k <= l2; ++k) left += x[k];
        right /= double(r2 - r1 + 1);
        left /= double(l2 - l1 + 1);
        const double centers = (double(r1 + r2) - double(l1 + l2)) / 2.0;
        return right - left - bg * centers;
    };

    std::vector<double> stat(nd);
    for (std::size_t j = 0; j < nd; ++j) stat[j] = step_db(j, slope[j], window, guard);

    struct Raw {
        std::size_t index;
        double total_db;
    };
    std::vector<Raw> raw;
    std::size_t i = 0;
    while (i < nd) {
        if (std::abs(stat[i]) <= jump_threshold_db) {
            ++i;
            continue;
        }
        const bool positive = stat[i] > 0;
        std::size_t peak = i, j = i;
        for (; j < nd && std::abs(stat[j]) > jump_threshold_db && (stat[j] > 0) == positive; ++j)
            if (std::abs(stat[j]) > std::abs(stat[peak])) peak = j;

        // The guarded statistic plateaus around the step; a narrow unguarded
        // scan pins the exact sample.
        std::size_t best = peak;
        double best_score = 0.0;
        const std::size_t scan = guard + 2;
        for (std::size_t k = peak >= scan ? peak - scan : 0;
             k <= std::min(nd - 1, peak + scan); ++k) {
            const double s = std::abs(step_db(k, slope[peak], pos_window, 0));
            if (s > best_score) {
                best_score = s;
                best = k;
            }
        }
        raw.push_back({best, step_db(best, slope[peak], window, guard)});
        i = j;
    }

    // Events closer than the analysis window belong to the same physical step:
    // keep the strongest of each same-sign group, then drop small opposite
    // lobes sitting next to a dominant step.
    const std::size_t merge_radius = window + guard + 3;
    std::vector<Raw> merged;
    for (const Raw& r : raw) {
        bool absorbed = false;
        for (Raw& m : merged) {
            const std::size_t dist = r.index > m.index ? r.index - m.index : m.index - r.index;
            if (dist <= merge_radius && (r.total_db > 0) == (m.total_db > 0)) {
                if (std::abs(r.total_db) > std::abs(m.total_db)) m = r;
                absorbed = true;
                break;
            }
        }
        if (!absorbed) merged.push_back(r);
    }
    for (const Raw& r : merged) {
        bool side_lobe = false;
        for (const Raw& m : merged) {
            const std::size_t dist = r.index > m.index ? r.index - m.index : m.index - r.index;
            if (&m != &r && dist <= merge_radius && std::abs(m.total_db) > 5.0 * std::abs(r.total_db))
                side_lobe = true;
        }
        if (side_lobe) continue;
        LossEvent ev;
        ev.position_km = filtered.distance_km(r.index + 1);
        ev.magnitude = 1.0 - std::pow(10.0, r.total_db / 10.0);
        ev.kind = r.total_db > 0 ? EventKind::Amplifier : EventKind::Leak;
        events.push_back(ev);
    }
    return events;
}

double splice_leak_budget(double transmittance, double reflectance, double external_fraction) {
    if (transmittance < 0 || reflectance < 0)
        throw std::invalid_argument("transmittance and reflectance must be nonnegative");
    if (transmittance + reflectance > 1.0)
        throw std::invalid_argument("transmittance + reflectance exceeds 1");
    if (external_fraction < 0 || external_fraction > 1)
        throw std::invalid_argument("external fraction outside [0,1]");
    const double scattered = 1.0 - transmittance - reflectance;
    return scattered * external_fraction;
}

void write_trace_csv(const std::filesystem::path& path, const OTDRTrace& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open trace CSV for writing: " + path.string());
    out << "distance_km,power_db\n";
    out.precision(10);
    for (std::size_t i = 0; i < trace.size(); ++i)
        out << trace.distance_km(i) << ',' << trace.power_db[i] << '\n';
}

OTDRTrace read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace CSV: " + path.string());
    OTDRTrace trace;
    std::string line;
    int line_no = 0;
    double prev_z = 0.0, first_z = 0.0;
    bool have_first = false, have_second = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line.find("distance_km") != std::string::npos) continue;
        std::istringstream row(line);
        double zkm = 0.0, db = 0.0;
        char comma = 0;
        if (!(row >> zkm >> comma >> db) || comma != ',')
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": expected 'distance_km,power_db'");
        if (!have_first) {
            first_z = zkm;
            have_first = true;
        } else if (!have_second) {
            trace.resolution_km = zkm - first_z;
            if (trace.resolution_km <= 0)
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                         ": distances must increase");
            have_second = true;
        } else {
            const double step = zkm - prev_z;
            if (std::abs(step - trace.resolution_km) > 1e-6 * trace.resolution_km)
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                         ": non-uniform distance grid");
        }
        prev_z = zkm;
        trace.power_db.push_back(db);
    }
    if (trace.power_db.size() < 2)
        throw std::runtime_error(path.string() + ": trace needs at least 2 samples");
    return trace;
}

}  // namespace qkdline::losscontrol
