#include "msspeech/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "msspeech/error.hpp"
#include "msspeech/rng.hpp"

namespace msspeech::testkit {

namespace {

constexpr double kPi = std::numbers::pi;

struct VowelQuality {
    const char* label;
    double f[3];
    double bw[3];
};

// three canonical qualities, cycled through the pseudo-text
constexpr VowelQuality kVowels[] = {
    {"a", {730.0, 1090.0, 2440.0}, {80.0, 90.0, 120.0}},
    {"e", {530.0, 1840.0, 2480.0}, {70.0, 100.0, 120.0}},
    {"i", {390.0, 1990.0, 2550.0}, {60.0, 100.0, 130.0}},
};

constexpr const char* kStops[] = {"t", "p", "k", "c"};

std::size_t duration_to_samples(double duration_s, int rate_hz) {
    return static_cast<std::size_t>(std::llround(duration_s * rate_hz));
}

}  // namespace

SpeakerProfile default_control_profile() { return SpeakerProfile{}; }

SpeakerProfile default_case_profile() {
    SpeakerProfile p;
    p.f0_range_semitones = 2.8;
    p.vowel_duration_s = {0.104, 0.24};
    p.stop_closure_s = 0.084;
    p.s_centroid_hz = {5200.0, 260.0};
    p.pause_probability = 0.37;
    p.intensity_wobble_db = 5.5;
    return p;
}

Waveform synth_tone(double freq_hz, double duration_s, int rate_hz, double amplitude) {
    if (!(freq_hz > 0.0) || !(freq_hz < 0.5 * rate_hz)) {
        throw ContractError("synth_tone: frequency must lie in (0, rate/2)");
    }
    const std::size_t n = duration_to_samples(duration_s, rate_hz);
    const std::size_t ramp = std::min(n / 2, duration_to_samples(0.010, rate_hz));

    Waveform w;
    w.sample_rate_hz = rate_hz;
    w.samples.resize(n);
    const double omega = 2.0 * kPi * freq_hz / rate_hz;
    for (std::size_t i = 0; i < n; ++i) {
        double env = 1.0;
        if (i < ramp) {
            env = 0.5 - 0.5 * std::cos(kPi * static_cast<double>(i) / static_cast<double>(ramp));
        } else if (i >= n - ramp) {
            env = 0.5 - 0.5 * std::cos(kPi * static_cast<double>(n - 1 - i) /
                                       static_cast<double>(ramp));
        }
        w.samples[i] = amplitude * env * std::sin(omega * static_cast<double>(i));
    }
    return w;
}

Waveform synth_vowel(double f0_hz, const std::vector<std::pair<double, double>>& formants,
                     double duration_s, int rate_hz) {
    if (formants.empty()) throw ContractError("synth_vowel: needs formants");
    double prev = 0.0;
    for (const auto& [f, bw] : formants) {
        if (!(f > prev) || !(f < 0.5 * rate_hz) || !(bw > 0.0)) {
            throw ContractError("synth_vowel: formants must be ascending and below rate/2");
        }
        prev = f;
    }
    if (!(f0_hz > 0.0) || !(f0_hz < 0.5 * rate_hz)) {
        throw ContractError("synth_vowel: f0 must lie in (0, rate/2)");
    }

    const std::size_t n = duration_to_samples(duration_s, rate_hz);
    std::vector<double> x(n, 0.0);
    const std::size_t period = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(rate_hz / f0_hz)));
    for (std::size_t i = 0; i < n; i += period) x[i] = 1.0;

    // cascaded two-pole resonators
    for (const auto& [f, bw] : formants) {
        const double r = std::exp(-kPi * bw / rate_hz);
        const double theta = 2.0 * kPi * f / rate_hz;
        const double a1 = 2.0 * r * std::cos(theta);
        const double a2 = -r * r;
        double y1 = 0.0, y2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double y = x[i] + a1 * y1 + a2 * y2;
            y2 = y1;
            y1 = y;
            x[i] = y;
        }
    }

    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::fabs(v));
    const double scale = peak > 0.0 ? 0.5 / peak : 0.0;

    Waveform w;
    w.sample_rate_hz = rate_hz;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) w.samples[i] = x[i] * scale;
    return w;
}

Waveform synth_sibilant(double center_hz, double bandwidth_hz, double duration_s, int rate_hz,
                        std::uint64_t seed) {
    const double lo = center_hz - 0.5 * bandwidth_hz;
    const double hi = center_hz + 0.5 * bandwidth_hz;
    if (!(lo > 0.0) || !(hi < 0.5 * rate_hz)) {
        throw ContractError("synth_sibilant: band must lie inside (0, rate/2)");
    }
    const std::size_t n = duration_to_samples(duration_s, rate_hz);
    const int n_components =
        std::max(100, static_cast<int>(std::lround(bandwidth_hz * duration_s)));

    Rng rng(seed);
    std::vector<double> acc(n, 0.0);
    for (int c = 0; c < n_components; ++c) {
        const double f = rng.uniform(lo, hi);
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        const double omega = 2.0 * kPi * f / rate_hz;
        // stable two-term cosine recurrence, one multiply per sample
        const double k = 2.0 * std::cos(omega);
        double c0 = std::cos(phase);
        double c1 = std::cos(omega + phase);
        if (n > 0) acc[0] += c0;
        if (n > 1) acc[1] += c1;
        for (std::size_t i = 2; i < n; ++i) {
            const double c2 = k * c1 - c0;
            acc[i] += c2;
            c0 = c1;
            c1 = c2;
        }
    }

    double peak = 0.0;
    for (double v : acc) peak = std::max(peak, std::fabs(v));
    const double scale = peak > 0.0 ? 0.4 / peak : 0.0;

    Waveform w;
    w.sample_rate_hz = rate_hz;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) w.samples[i] = acc[i] * scale;
    return w;
}

// ---------------------------------------------------------------------------
// synthetic reading

namespace {

struct ReadingBuilder {
    int rate;
    Waveform audio;
    AnnotationTier tier;

    explicit ReadingBuilder(int rate_hz) : rate(rate_hz) { audio.sample_rate_hz = rate_hz; }

    void append(const std::string& label, const std::vector<double>& samples) {
        const double t0 = static_cast<double>(audio.samples.size()) / rate;
        audio.samples.insert(audio.samples.end(), samples.begin(), samples.end());
        const double t1 = static_cast<double>(audio.samples.size()) / rate;
        tier.intervals.push_back({label, t0, t1});
    }

    void append_silence(const std::string& label, double duration_s) {
        append(label, std::vector<double>(duration_to_samples(duration_s, rate), 0.0));
    }
};

double jittered(Rng& rng, const MeanJitter& mj, double min_value) {
    const double v = mj.mean * (1.0 + mj.jitter * (2.0 * rng.uniform01() - 1.0));
    return std::max(v, min_value);
}

}  // namespace

std::pair<Waveform, AnnotationTier> synth_reading(const SpeakerProfile& profile) {
    if (!(profile.base_f0_hz > 0.0) || profile.n_slots < 8 || profile.sample_rate_hz < 8000) {
        throw ContractError("synth_reading: invalid profile");
    }
    Rng rng(profile.seed);
    ReadingBuilder out(profile.sample_rate_hz);

    out.append_silence("", 0.25);

    // slow amplitude modulation within voiced/noisy segments; its |delta|
    // mass grows with segment time, so the per-second intensity CSI tracks
    // the wobble depth instead of being washed out by longer readings
    auto apply_wobble = [&profile, &rng](std::vector<double>& samples, int rate) {
        const double depth_db = profile.intensity_wobble_db;
        const double f_mod = rng.uniform(3.5, 6.5);
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double t = static_cast<double>(i) / rate;
            samples[i] *= std::pow(10.0, depth_db * std::sin(2.0 * kPi * f_mod * t + phase) /
                                             20.0);
        }
    };

    int vowel_cycle = 0, stop_cycle = 0;
    int emitted = 0;
    while (emitted < profile.n_slots) {
        // one group: vowel, stop, vowel, sibilant
        for (int part = 0; part < 4 && emitted < profile.n_slots; ++part, ++emitted) {
            const double gain_db = 1.0 * (2.0 * rng.uniform01() - 1.0);  // level texture
            // 0.45 headroom keeps peak below full scale at the deepest wobble
            const double gain = 0.45 * std::pow(10.0, gain_db / 20.0);
            if (part == 0 || part == 2) {
                const VowelQuality& q = kVowels[vowel_cycle % 3];
                ++vowel_cycle;
                const double semis =
                    profile.f0_range_semitones * (rng.uniform01() - 0.5);
                const double f0 = profile.base_f0_hz * std::pow(2.0, semis / 12.0);
                const double dur = jittered(rng, profile.vowel_duration_s, 0.03);
                Waveform v = synth_vowel(
                    f0, {{q.f[0], q.bw[0]}, {q.f[1], q.bw[1]}, {q.f[2], q.bw[2]}}, dur,
                    profile.sample_rate_hz);
                for (auto& s : v.samples) s *= gain;
                apply_wobble(v.samples, profile.sample_rate_hz);
                out.append(q.label, v.samples);
            } else if (part == 1) {
                // closure silence plus a short burst, one labeled interval
                const char* label = kStops[stop_cycle % 4];
                ++stop_cycle;
                const double closure =
                    std::max(0.02, profile.stop_closure_s *
                                       (1.0 + 0.15 * (2.0 * rng.uniform01() - 1.0)));
                std::vector<double> seg(duration_to_samples(closure, profile.sample_rate_hz),
                                        0.0);
                const std::size_t burst =
                    duration_to_samples(0.006, profile.sample_rate_hz);
                for (std::size_t i = 0; i < burst; ++i) {
                    seg.push_back(0.22 * gain * (2.0 * rng.uniform01() - 1.0));
                }
                out.append(label, seg);
            } else {
                const double center = rng.normal(profile.s_centroid_hz.mean,
                                                 profile.s_centroid_hz.jitter);
                const double max_center = 0.5 * profile.sample_rate_hz - 900.0;
                const double c = std::clamp(center, 1200.0, max_center);
                const double dur = 0.11 * (1.0 + 0.2 * (2.0 * rng.uniform01() - 1.0));
                Waveform s = synth_sibilant(c, 1600.0, dur, profile.sample_rate_hz,
                                            rng.next_u64());
                for (auto& x : s.samples) x *= gain;
                apply_wobble(s.samples, profile.sample_rate_hz);
                out.append("s", s.samples);
            }
        }
        if (rng.bernoulli(profile.pause_probability)) {
            const double dur = 0.25 * (1.0 + (2.0 * rng.uniform01() - 1.0) * 0.5);
            out.append_silence("", dur);
        }
    }

    out.append_silence("", 0.25);
    return {std::move(out.audio), std::move(out.tier)};
}

// ---------------------------------------------------------------------------
// cohort synthesis

namespace {

SpeakerProfile draw_subject_profile(const SpeakerProfile& base, double spread, bool female,
                                    Rng& rng) {
    SpeakerProfile p = base;
    auto scale = [&rng, spread](double v) { return v * std::exp(spread * rng.normal()); };
    p.base_f0_hz = (female ? 195.0 : 115.0) * std::exp(0.05 * rng.normal());
    p.f0_range_semitones = scale(base.f0_range_semitones);
    p.vowel_duration_s.mean = scale(base.vowel_duration_s.mean);
    p.vowel_duration_s.jitter = std::min(0.8, scale(base.vowel_duration_s.jitter));
    p.stop_closure_s = scale(base.stop_closure_s);
    p.s_centroid_hz.mean = std::clamp(scale(base.s_centroid_hz.mean), 3000.0,
                                      0.5 * base.sample_rate_hz - 1200.0);
    p.s_centroid_hz.jitter = scale(base.s_centroid_hz.jitter);
    p.pause_probability =
        std::clamp(base.pause_probability + 0.08 * rng.normal(), 0.02, 0.9);
    p.intensity_wobble_db = scale(base.intensity_wobble_db);
    p.seed = rng.next_u64();
    return p;
}

std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

}  // namespace

std::string synth_cohort(const CohortSpec& spec, const std::string& out_dir) {
    if (spec.n_cases < 2 || spec.n_controls < 2) {
        throw ContractError("synth_cohort: need at least 2 subjects per cohort");
    }
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("synth_cohort: cannot create " + out_dir + ": " + ec.message());

    std::ostringstream manifest;
    manifest << "subject_id,cohort,age_years,gender_code,wav_path,annotation_path\n";

    const Rng root(spec.seed);
    for (int cohort = 0; cohort < 2; ++cohort) {
        const bool is_case = cohort == 1;
        const int count = is_case ? spec.n_cases : spec.n_controls;
        const SpeakerProfile& base = is_case ? spec.case_profile : spec.control_profile;
        const double age_mean = is_case ? spec.case_age_mean : spec.control_age_mean;
        const double age_sd = is_case ? spec.case_age_sd : spec.control_age_sd;
        for (int i = 0; i < count; ++i) {
            Rng rng = root.derive(is_case ? "case" : "control")
                          .derive(static_cast<std::uint64_t>(i));
            const bool female = rng.bernoulli(spec.female_fraction);
            const double age = std::clamp(rng.normal(age_mean, age_sd), 18.0, 85.0);
            const SpeakerProfile profile =
                draw_subject_profile(base, spec.between_subject_spread, female, rng);

            char id[32];
            std::snprintf(id, sizeof(id), "%s_%03d", is_case ? "case" : "control", i + 1);
            const std::string wav_name = std::string(id) + ".wav";
            const std::string grid_name = std::string(id) + ".TextGrid";

            auto [audio, tier] = synth_reading(profile);
            write_wav(audio, (fs::path(out_dir) / wav_name).string());
            const std::string grid = emit_textgrid({{"phones", tier}}, audio.duration_s());
            std::ofstream gf(fs::path(out_dir) / grid_name, std::ios::trunc);
            if (!gf) throw IoError("synth_cohort: cannot write " + grid_name);
            gf << grid;

            manifest << id << ',' << (is_case ? "case" : "control") << ',' << fmt1(age) << ','
                     << (female ? 0 : 1) << ',' << wav_name << ',' << grid_name << '\n';
        }
    }

    const std::string manifest_path = (fs::path(out_dir) / "manifest.csv").string();
    std::ofstream mf(manifest_path, std::ios::trunc);
    if (!mf) throw IoError("synth_cohort: cannot write manifest");
    mf << manifest.str();
    return manifest_path;
}

// ---------------------------------------------------------------------------
// cohort spec JSON

CohortSpec CohortSpec::from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("cohort spec JSON: ") + e.what());
    }

    CohortSpec spec;
    auto read_profile = [](const nlohmann::json& pj, SpeakerProfile base) {
        for (const auto& [key, value] : pj.items()) {
            if (key == "base_f0_hz") base.base_f0_hz = value.get<double>();
            else if (key == "f0_range_semitones") base.f0_range_semitones = value.get<double>();
            else if (key == "vowel_duration_mean_s") base.vowel_duration_s.mean = value.get<double>();
            else if (key == "vowel_duration_jitter") base.vowel_duration_s.jitter = value.get<double>();
            else if (key == "stop_closure_mean_s") base.stop_closure_s = value.get<double>();
            else if (key == "s_centroid_mean_hz") base.s_centroid_hz.mean = value.get<double>();
            else if (key == "s_centroid_jitter_hz") base.s_centroid_hz.jitter = value.get<double>();
            else if (key == "pause_probability") base.pause_probability = value.get<double>();
            else if (key == "intensity_wobble_db") base.intensity_wobble_db = value.get<double>();
            else if (key == "n_slots") base.n_slots = value.get<int>();
            else throw ConfigError("cohort spec JSON: unknown profile key '" + key + "'");
        }
        return base;
    };

    for (const auto& [key, value] : j.items()) {
        if (key == "n_cases") spec.n_cases = value.get<int>();
        else if (key == "n_controls") spec.n_controls = value.get<int>();
        else if (key == "seed") spec.seed = value.get<std::uint64_t>();
        else if (key == "sample_rate_hz") {
            spec.control_profile.sample_rate_hz = value.get<int>();
            spec.case_profile.sample_rate_hz = value.get<int>();
        } else if (key == "female_fraction") spec.female_fraction = value.get<double>();
        else if (key == "between_subject_spread") spec.between_subject_spread = value.get<double>();
        else if (key == "control_age_mean") spec.control_age_mean = value.get<double>();
        else if (key == "control_age_sd") spec.control_age_sd = value.get<double>();
        else if (key == "case_age_mean") spec.case_age_mean = value.get<double>();
        else if (key == "case_age_sd") spec.case_age_sd = value.get<double>();
        else if (key == "control_profile") spec.control_profile = read_profile(value, spec.control_profile);
        else if (key == "case_profile") spec.case_profile = read_profile(value, spec.case_profile);
        else throw ConfigError("cohort spec JSON: unknown key '" + key + "'");
    }
    return spec;
}

}  // namespace msspeech::testkit
