#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "msspeech/annotation.hpp"
#include "msspeech/audio_io.hpp"

namespace msspeech::testkit {

struct MeanJitter {
    double mean = 0.0;
    double jitter = 0.0;  // relative for durations, Hz for centroids
};

// Controls one synthetic speaker. Case-like speech shifts these in the
// directions the clinical literature reports: longer vowels and stop
// closures, reduced pitch range, noisier /s/ spectra, larger intensity
// fluctuation, more pausing.
struct SpeakerProfile {
    double base_f0_hz = 115.0;
    double f0_range_semitones = 4.0;
    MeanJitter vowel_duration_s = {0.09, 0.15};
    double stop_closure_s = 0.07;
    MeanJitter s_centroid_hz = {5200.0, 150.0};
    double pause_probability = 0.25;
    double intensity_wobble_db = 1.0;
    std::uint64_t seed = 0;
    int sample_rate_hz = 16000;
    int n_slots = 60;  // length of the synthetic pseudo-text
};

SpeakerProfile default_control_profile();
SpeakerProfile default_case_profile();

struct CohortSpec {
    int n_cases = 60;
    int n_controls = 60;
    SpeakerProfile control_profile = default_control_profile();
    SpeakerProfile case_profile = default_case_profile();
    double control_age_mean = 45.5, control_age_sd = 11.2;
    double case_age_mean = 43.9, case_age_sd = 10.5;
    double female_fraction = 0.63;
    double between_subject_spread = 0.22;  // lognormal sigma on profile scalars
    std::uint64_t seed = 1;

    static CohortSpec from_json(const std::string& json_text);
};

// Sine with 10 ms raised-cosine onset/offset ramps.
Waveform synth_tone(double freq_hz, double duration_s, int rate_hz, double amplitude);

// Impulse train at f0 through cascaded two-pole resonators; peak-normalized
// to 0.5. formants = {(freq, bandwidth)} x3, ascending.
Waveform synth_vowel(double f0_hz, const std::vector<std::pair<double, double>>& formants,
                     double duration_s, int rate_hz);

// Band-limited noise around center_hz, built from a seeded random-phase
// oscillator bank spanning [center - bw/2, center + bw/2].
Waveform synth_sibilant(double center_hz, double bandwidth_hz, double duration_s, int rate_hz,
                        std::uint64_t seed);

// A pseudo-reading: ~n_slots phoneme slots cycling vowel / unvoiced stop /
// vowel / sibilant with probabilistic pauses, plus edge silences. The
// annotation matches the synthesis boundaries to the sample.
std::pair<Waveform, AnnotationTier> synth_reading(const SpeakerProfile& profile);

// Synthesizes WAV + TextGrid per subject and a manifest CSV
// (subject_id,cohort,age_years,gender_code,wav_path,annotation_path).
// Returns the manifest path.
std::string synth_cohort(const CohortSpec& spec, const std::string& out_dir);

}  // namespace msspeech::testkit
