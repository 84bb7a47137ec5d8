#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "msspeech/annotation.hpp"
#include "msspeech/audio_io.hpp"
#include "msspeech/dsp.hpp"

namespace msspeech {

// The 12 acoustic features, in report order.
struct FeatureSet {
    double speech_duration_s = 0.0;
    double silence_to_speech_ratio = 0.0;
    double vowel_to_speech_ratio = 0.0;
    double csi_vowel_duration = 0.0;   // dimensionless (seconds / seconds)
    double csi_f0 = 0.0;               // semitones per second
    double f0_quantile_diff = 0.0;     // semitones
    double unvoiced_stop_mean_ms = 0.0;
    double csi_intensity = 0.0;        // dB per second
    double s_centroid_sd_hz = 0.0;
    double f1_sd_hz = 0.0;
    double f2_sd_hz = 0.0;
    double f3_sd_hz = 0.0;
};

// CSV column names matching FeatureSet field order.
const std::array<std::string, 12>& feature_names();

double feature_by_name(const FeatureSet& fs, const std::string& name);

// Classifier input: the 7 validated features followed by age and gender
// (female = 0, male = 1).
using ModelVector = std::array<double, 9>;

constexpr std::size_t kModelVectorAgeIndex = 7;
constexpr std::size_t kModelVectorGenderIndex = 8;

// Names for the 9 model-vector positions.
const std::array<std::string, 9>& model_vector_names();

struct AnalysisConfig {
    PitchConfig pitch;
    FormantConfig formant;
    double intensity_window_s = 0.032;
    double intensity_step_s = 0.008;
};

// Cumulative Slope Index: sum of |x[n+1] - x[n]| divided by the normalizer.
double csi(std::span<const double> x, double normalizer_s);

double speech_duration(const AnnotationTier& tier, const PhonemeClassMap& map);
double silence_to_speech_ratio(const AnnotationTier& tier, const PhonemeClassMap& map);
double vowel_to_speech_ratio(const AnnotationTier& tier, const PhonemeClassMap& map);
double csi_vowel_duration(const AnnotationTier& tier, const PhonemeClassMap& map);

// Q3 - Q1 over voiced frames; quantiles by linear interpolation at (n-1)*p.
double f0_quantile_diff(const Contour& f0);

double unvoiced_stop_mean_duration_ms(const AnnotationTier& tier, const PhonemeClassMap& map);

// CSI over a contour, skipping differences across undefined gaps.
double csi_f0(const Contour& f0, double speech_dur_s);
double csi_intensity(const Contour& intensity, double speech_dur_s);

double s_centroid_sd(const Waveform& w, const AnnotationTier& tier, const PhonemeClassMap& map);

struct FormantSds {
    double f1_sd_hz = 0.0;
    double f2_sd_hz = 0.0;
    double f3_sd_hz = 0.0;
};

FormantSds formant_sds(const Waveform& w, const AnnotationTier& tier, const PhonemeClassMap& map,
                       const FormantConfig& cfg);

// All 12 features; f0/intensity contours are restricted to the speech window.
FeatureSet extract_all(const Waveform& w, const AnnotationTier& tier, const PhonemeClassMap& map,
                       const AnalysisConfig& cfg = {});

ModelVector build_model_vector(const FeatureSet& fs, double age_years, int gender_code);

}  // namespace msspeech
