#pragma once

#include <optional>
#include <vector>

#include "msspeech/audio_io.hpp"

namespace msspeech {

// Uniformly time-stepped scalar track; nullopt marks unvoiced/invalid frames.
struct Contour {
    double t0_s = 0.0;  // center time of the first frame
    double dt_s = 0.0;
    std::vector<std::optional<double>> values;

    std::vector<double> defined_values() const;
    std::size_t defined_count() const;
};

struct PitchConfig {
    double floor_hz = 75.0;
    double ceiling_hz = 600.0;
    double time_step_s = 0.75 / 75.0;  // 0.75 / floor
    double voicing_threshold = 0.45;   // on the normalized autocorrelation peak
};

struct FormantConfig {
    double max_formant_hz = 5500.0;
    int n_formants = 5;
    int lpc_order = 10;  // 2 * n_formants
    double window_s = 0.025;
    double time_step_s = 0.00625;
    double preemphasis_from_hz = 50.0;
};

struct FormantFrame {
    double t_s = 0.0;
    std::optional<double> f1_hz, f2_hz, f3_hz;
};

// Fundamental-frequency contour in semitones re 100 Hz, by the autocorrelation
// method: Hann-windowed frames of length 3/floor, autocorrelation normalized
// by the window's own autocorrelation, peak picked in [1/ceiling, 1/floor]
// with parabolic interpolation. A frame is voiced iff the normalized peak
// reaches cfg.voicing_threshold. Octave jumps are not post-corrected.
Contour f0_contour(const Waveform& w, const PitchConfig& cfg = {});

double hz_to_semitones(double f_hz, double ref_hz = 100.0);

// Intensity in dB per frame: 10*log10(mean((hann*x)^2) / 2e-10). Frames of
// exact digital silence are undefined.
Contour intensity_contour(const Waveform& w, double window_s = 0.032,
                          double time_step_s = 0.008);

// Center of mass of the average magnitude spectrum over 50%-overlapped 20 ms
// Hann frames inside [t_start_s, t_end_s].
double spectral_centroid(const Waveform& w, double t_start_s, double t_end_s);

// Burg-method formant tracks: decimate to 2*max_formant_hz, pre-emphasize,
// per-window Burg LPC, keep pole frequencies in (50, max_formant) with
// bandwidth < 400 Hz; the three lowest become F1..F3.
std::vector<FormantFrame> formant_tracks(const Waveform& w, const FormantConfig& cfg = {});

// Sample-aligned sub-waveform; boundaries round to the nearest sample, ties
// toward the earlier sample.
Waveform slice(const Waveform& w, double t_start_s, double t_end_s);

// Polyphase windowed-sinc resampler (used by the formant pipeline).
Waveform resample(const Waveform& w, int target_rate_hz);

}  // namespace msspeech
