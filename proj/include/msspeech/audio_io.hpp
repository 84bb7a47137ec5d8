#pragma once

#include <string>
#include <vector>

namespace msspeech {

// Mono sampled audio, amplitudes normalized to [-1, 1].
struct Waveform {
    std::vector<double> samples;
    int sample_rate_hz = 0;

    double duration_s() const {
        return static_cast<double>(samples.size()) / static_cast<double>(sample_rate_hz);
    }
};

// Decodes a RIFF/WAVE file with 16-bit integer PCM. Multi-channel input yields
// channel 0 only; samples are scaled by 1/32768.
Waveform read_wav(const std::string& path);

// Writes mono 16-bit PCM. Samples must lie in [-1, 1]; values are rounded to
// the nearest integer step, so a read-back differs by at most 1/32768.
void write_wav(const Waveform& w, const std::string& path);

}  // namespace msspeech
