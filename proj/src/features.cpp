#include "msspeech/features.hpp"

#include <algorithm>
#include <cmath>

#include "msspeech/error.hpp"
#include "msspeech/kernels.hpp"

namespace msspeech {

namespace {

struct SpeechWindow {
    double start_s = 0.0;
    double end_s = 0.0;
};

SpeechWindow speech_window(const AnnotationTier& tier, const PhonemeClassMap& map) {
    double first = -1.0, last = -1.0;
    for (const auto& iv : tier.intervals) {
        if (map.classify(iv.label) == PhonemeClass::Silence) continue;
        if (first < 0.0) first = iv.t_start_s;
        last = iv.t_end_s;
    }
    if (first < 0.0) throw InsufficientDataError("speech_duration: tier contains no speech");
    return {first, last};
}

double sample_sd(std::span<const double> v) {
    const std::size_t n = v.size();
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

double quantile(std::vector<double> sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// sum of |deltas| within contiguous defined runs; no terms across gaps
double contour_abs_diff_sum(const Contour& c) {
    double total = 0.0;
    std::vector<double> run;
    for (const auto& v : c.values) {
        if (v) {
            run.push_back(*v);
        } else if (!run.empty()) {
            total += kernels::abs_diff_sum(run);
            run.clear();
        }
    }
    if (!run.empty()) total += kernels::abs_diff_sum(run);
    return total;
}

}  // namespace

const std::array<std::string, 12>& feature_names() {
    static const std::array<std::string, 12> names = {
        "speech_duration_s",   "silence_to_speech_ratio", "vowel_to_speech_ratio",
        "csi_vowel_duration",  "csi_f0",                  "f0_quantile_diff",
        "unvoiced_stop_mean_ms", "csi_intensity",         "s_centroid_sd_hz",
        "f1_sd_hz",            "f2_sd_hz",                "f3_sd_hz"};
    return names;
}

double feature_by_name(const FeatureSet& fs, const std::string& name) {
    if (name == "speech_duration_s") return fs.speech_duration_s;
    if (name == "silence_to_speech_ratio") return fs.silence_to_speech_ratio;
    if (name == "vowel_to_speech_ratio") return fs.vowel_to_speech_ratio;
    if (name == "csi_vowel_duration") return fs.csi_vowel_duration;
    if (name == "csi_f0") return fs.csi_f0;
    if (name == "f0_quantile_diff") return fs.f0_quantile_diff;
    if (name == "unvoiced_stop_mean_ms") return fs.unvoiced_stop_mean_ms;
    if (name == "csi_intensity") return fs.csi_intensity;
    if (name == "s_centroid_sd_hz") return fs.s_centroid_sd_hz;
    if (name == "f1_sd_hz") return fs.f1_sd_hz;
    if (name == "f2_sd_hz") return fs.f2_sd_hz;
    if (name == "f3_sd_hz") return fs.f3_sd_hz;
    throw ConfigError("unknown feature name: " + name);
}

const std::array<std::string, 9>& model_vector_names() {
    static const std::array<std::string, 9> names = {
        "speech_duration_s", "vowel_to_speech_ratio", "csi_vowel_duration",
        "f0_quantile_diff",  "unvoiced_stop_mean_ms", "csi_intensity",
        "s_centroid_sd_hz",  "age_years",             "gender_code"};
    return names;
}

double csi(std::span<const double> x, double normalizer_s) {
    if (x.size() < 2) throw InsufficientDataError("csi: needs at least 2 values");
    if (!(normalizer_s > 0.0)) throw ContractError("csi: normalizer must be positive");
    return kernels::abs_diff_sum(x) / normalizer_s;
}

double speech_duration(const AnnotationTier& tier, const PhonemeClassMap& map) {
    const SpeechWindow sw = speech_window(tier, map);
    return sw.end_s - sw.start_s;
}

double silence_to_speech_ratio(const AnnotationTier& tier, const PhonemeClassMap& map) {
    const SpeechWindow sw = speech_window(tier, map);
    double silent = 0.0;
    for (const auto& iv : tier.intervals) {
        if (map.classify(iv.label) != PhonemeClass::Silence) continue;
        const double lo = std::max(iv.t_start_s, sw.start_s);
        const double hi = std::min(iv.t_end_s, sw.end_s);
        if (hi > lo) silent += hi - lo;
    }
    return silent / (sw.end_s - sw.start_s);
}

double vowel_to_speech_ratio(const AnnotationTier& tier, const PhonemeClassMap& map) {
    const SpeechWindow sw = speech_window(tier, map);
    double vowels = 0.0;
    for (const auto& iv : tier.intervals) {
        if (map.classify(iv.label) == PhonemeClass::Vowel) vowels += iv.duration_s();
    }
    return vowels / (sw.end_s - sw.start_s);
}

double csi_vowel_duration(const AnnotationTier& tier, const PhonemeClassMap& map) {
    const double speech = speech_duration(tier, map);
    std::vector<double> durations;
    for (const auto& iv : tier.intervals) {
        if (map.classify(iv.label) == PhonemeClass::Vowel) durations.push_back(iv.duration_s());
    }
    if (durations.size() < 2) {
        throw InsufficientDataError("csi_vowel_duration: needs at least 2 vowels");
    }
    return csi(durations, speech);
}

double f0_quantile_diff(const Contour& f0) {
    std::vector<double> v = f0.defined_values();
    if (v.size() < 4) {
        throw InsufficientDataError("f0_quantile_diff: needs at least 4 voiced frames");
    }
    std::sort(v.begin(), v.end());
    return quantile(v, 0.75) - quantile(v, 0.25);
}

double unvoiced_stop_mean_duration_ms(const AnnotationTier& tier, const PhonemeClassMap& map) {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& iv : tier.intervals) {
        if (map.classify(iv.label) == PhonemeClass::UnvoicedStop) {
            total += iv.duration_s();
            ++count;
        }
    }
    if (count == 0) {
        throw InsufficientDataError("unvoiced_stop_mean_duration: no unvoiced stops");
    }
    return total / static_cast<double>(count) * 1000.0;
}

double csi_f0(const Contour& f0, double speech_dur_s) {
    if (f0.defined_count() < 2) {
        throw InsufficientDataError("csi_f0: needs at least 2 voiced frames");
    }
    if (!(speech_dur_s > 0.0)) throw ContractError("csi_f0: speech duration must be positive");
    return contour_abs_diff_sum(f0) / speech_dur_s;
}

double csi_intensity(const Contour& intensity, double speech_dur_s) {
    if (intensity.defined_count() < 2) {
        throw InsufficientDataError("csi_intensity: needs at least 2 defined frames");
    }
    if (!(speech_dur_s > 0.0)) {
        throw ContractError("csi_intensity: speech duration must be positive");
    }
    return contour_abs_diff_sum(intensity) / speech_dur_s;
}

double s_centroid_sd(const Waveform& w, const AnnotationTier& tier, const PhonemeClassMap& map) {
    std::vector<double> centroids;
    const double dur = w.duration_s();
    for (const auto& iv : tier.intervals) {
        if (map.classify(iv.label) != PhonemeClass::SibilantS) continue;
        const double lo = std::max(iv.t_start_s, 0.0);
        const double hi = std::min(iv.t_end_s, dur);
        if (hi - lo < 0.01) continue;
        centroids.push_back(spectral_centroid(w, lo, hi));
    }
    if (centroids.size() < 2) {
        throw InsufficientDataError("s_centroid_sd: needs at least 2 /s/ intervals");
    }
    return sample_sd(centroids);
}

FormantSds formant_sds(const Waveform& w, const AnnotationTier& tier, const PhonemeClassMap& map,
                       const FormantConfig& cfg) {
    std::vector<std::pair<double, double>> vowel_spans;
    for (const auto& iv : tier.intervals) {
        if (map.classify(iv.label) == PhonemeClass::Vowel) {
            vowel_spans.emplace_back(iv.t_start_s, iv.t_end_s);
        }
    }
    if (vowel_spans.size() < 2) {
        throw InsufficientDataError("formant_sds: needs at least 2 vowel intervals");
    }

    const std::vector<FormantFrame> frames = formant_tracks(w, cfg);
    std::vector<double> f1, f2, f3;
    std::size_t span_idx = 0;
    for (const auto& fr : frames) {
        while (span_idx < vowel_spans.size() && vowel_spans[span_idx].second < fr.t_s) {
            ++span_idx;
        }
        if (span_idx >= vowel_spans.size()) break;
        if (fr.t_s < vowel_spans[span_idx].first) continue;
        if (fr.f1_hz) f1.push_back(*fr.f1_hz);
        if (fr.f2_hz) f2.push_back(*fr.f2_hz);
        if (fr.f3_hz) f3.push_back(*fr.f3_hz);
    }

    if (f1.size() < 2 || f2.size() < 2 || f3.size() < 2) {
        throw InsufficientDataError("formant_sds: too few defined formant frames inside vowels");
    }
    return {sample_sd(f1), sample_sd(f2), sample_sd(f3)};
}

FeatureSet extract_all(const Waveform& w, const AnnotationTier& tier, const PhonemeClassMap& map,
                       const AnalysisConfig& cfg) {
    if (has_error(qc_check(tier, w.duration_s()))) {
        throw ContractError("extract_all: annotation failed QC with ERROR findings");
    }

    const SpeechWindow sw = speech_window(tier, map);
    const double window_start = std::max(sw.start_s, 0.0);
    const double window_end = std::min(sw.end_s, w.duration_s());
    const Waveform speech = slice(w, window_start, window_end);

    FeatureSet fs;
    fs.speech_duration_s = speech_duration(tier, map);
    fs.silence_to_speech_ratio = silence_to_speech_ratio(tier, map);
    fs.vowel_to_speech_ratio = vowel_to_speech_ratio(tier, map);
    fs.csi_vowel_duration = csi_vowel_duration(tier, map);

    const Contour f0 = f0_contour(speech, cfg.pitch);
    fs.csi_f0 = csi_f0(f0, fs.speech_duration_s);
    fs.f0_quantile_diff = f0_quantile_diff(f0);

    fs.unvoiced_stop_mean_ms = unvoiced_stop_mean_duration_ms(tier, map);

    const Contour intensity =
        intensity_contour(speech, cfg.intensity_window_s, cfg.intensity_step_s);
    fs.csi_intensity = csi_intensity(intensity, fs.speech_duration_s);

    fs.s_centroid_sd_hz = s_centroid_sd(w, tier, map);

    const FormantSds sds = formant_sds(w, tier, map, cfg.formant);
    fs.f1_sd_hz = sds.f1_sd_hz;
    fs.f2_sd_hz = sds.f2_sd_hz;
    fs.f3_sd_hz = sds.f3_sd_hz;
    return fs;
}

ModelVector build_model_vector(const FeatureSet& fs, double age_years, int gender_code) {
    if (gender_code != 0 && gender_code != 1) {
        throw ContractError("build_model_vector: gender_code must be 0 (female) or 1 (male)");
    }
    if (!(age_years > 0.0) || !std::isfinite(age_years)) {
        throw ContractError("build_model_vector: age must be positive and finite");
    }
    const ModelVector v = {fs.speech_duration_s,
                           fs.vowel_to_speech_ratio,
                           fs.csi_vowel_duration,
                           fs.f0_quantile_diff,
                           fs.unvoiced_stop_mean_ms,
                           fs.csi_intensity,
                           fs.s_centroid_sd_hz,
                           age_years,
                           static_cast<double>(gender_code)};
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw ContractError("build_model_vector: non-finite feature value");
        }
    }
    return v;
}

}  // namespace msspeech
