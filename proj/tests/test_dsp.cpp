#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "msspeech/dsp.hpp"
#include "msspeech/error.hpp"
#include "msspeech/rng.hpp"
#include "msspeech/testkit.hpp"

using namespace msspeech;

namespace {

double median(std::vector<double> v) {
    REQUIRE(!v.empty());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// voiced fraction and median over frames whose window avoids the onset ramps
struct PitchSummary {
    double voiced_fraction = 0.0;
    double median_semitones = 0.0;
};

PitchSummary summarize_interior(const Contour& c, double duration_s, double margin_s = 0.05) {
    std::vector<double> voiced;
    std::size_t interior = 0;
    for (std::size_t i = 0; i < c.values.size(); ++i) {
        const double t = c.t0_s + static_cast<double>(i) * c.dt_s;
        if (t < margin_s || t > duration_s - margin_s) continue;
        ++interior;
        if (c.values[i]) voiced.push_back(*c.values[i]);
    }
    PitchSummary s;
    s.voiced_fraction =
        interior > 0 ? static_cast<double>(voiced.size()) / static_cast<double>(interior) : 0.0;
    if (!voiced.empty()) s.median_semitones = median(voiced);
    return s;
}

}  // namespace

TEST_SUITE("dsp") {

TEST_CASE("hz_to_semitones") {
    CHECK(hz_to_semitones(100.0) == doctest::Approx(0.0));
    CHECK(hz_to_semitones(200.0) == doctest::Approx(12.0));
    CHECK(hz_to_semitones(50.0) == doctest::Approx(-12.0));
    CHECK_THROWS_AS(hz_to_semitones(0.0), ContractError);
    CHECK_THROWS_AS(hz_to_semitones(-5.0), ContractError);
}

TEST_CASE("pure tone pitch within 0.1 semitone") {
    const Waveform w = testkit::synth_tone(220.0, 2.0, 48000, 0.6);
    const Contour c = f0_contour(w);
    const PitchSummary s = summarize_interior(c, 2.0);
    CHECK(s.voiced_fraction >= 0.90);
    CHECK(std::fabs(s.median_semitones - hz_to_semitones(220.0)) <= 0.1);
}

TEST_CASE("pure tone sweep stays within 0.2 semitone for 90% of frames") {
    for (double f : {110.0, 150.0, 220.0, 330.0}) {
        const Waveform w = testkit::synth_tone(f, 1.0, 48000, 0.5);
        const Contour c = f0_contour(w);
        const double target = hz_to_semitones(f);
        std::size_t hits = 0, interior = 0;
        for (std::size_t i = 0; i < c.values.size(); ++i) {
            const double t = c.t0_s + static_cast<double>(i) * c.dt_s;
            if (t < 0.05 || t > 0.95) continue;
            ++interior;
            if (c.values[i] && std::fabs(*c.values[i] - target) <= 0.2) ++hits;
        }
        INFO("f = ", f);
        CHECK(interior > 0);
        CHECK(static_cast<double>(hits) >= 0.9 * static_cast<double>(interior));
    }
}

TEST_CASE("silence is unvoiced") {
    Waveform w;
    w.sample_rate_hz = 48000;
    w.samples.assign(96000, 0.0);
    const Contour c = f0_contour(w);
    CHECK(c.values.size() > 0);
    CHECK(c.defined_count() == 0);
}

TEST_CASE("two-segment tone gives piecewise medians") {
    Waveform w = testkit::synth_tone(110.0, 1.0, 48000, 0.5);
    const Waveform second = testkit::synth_tone(220.0, 1.0, 48000, 0.5);
    w.samples.insert(w.samples.end(), second.samples.begin(), second.samples.end());

    const Contour c = f0_contour(w);
    std::vector<double> first_half, second_half;
    for (std::size_t i = 0; i < c.values.size(); ++i) {
        if (!c.values[i]) continue;
        const double t = c.t0_s + static_cast<double>(i) * c.dt_s;
        if (t > 0.06 && t < 0.94) first_half.push_back(*c.values[i]);
        if (t > 1.06 && t < 1.94) second_half.push_back(*c.values[i]);
    }
    CHECK(std::fabs(median(first_half) - hz_to_semitones(110.0)) <= 0.2);
    CHECK(std::fabs(median(second_half) - hz_to_semitones(220.0)) <= 0.2);
}

TEST_CASE("pitch rejects too-short signals") {
    Waveform w;
    w.sample_rate_hz = 48000;
    w.samples.assign(480, 0.0);  // 10 ms < 2 / 75 Hz
    CHECK_THROWS_AS(f0_contour(w), ContractError);
}

TEST_CASE("intensity of a stationary sine is flat") {
    const Waveform w = testkit::synth_tone(300.0, 1.0, 48000, 0.9);
    const Contour c = intensity_contour(w);
    double lo = 1e9, hi = -1e9;
    for (std::size_t i = 0; i < c.values.size(); ++i) {
        const double t = c.t0_s + static_cast<double>(i) * c.dt_s;
        if (t < 0.06 || t > 0.94) continue;
        REQUIRE(c.values[i].has_value());
        lo = std::min(lo, *c.values[i]);
        hi = std::max(hi, *c.values[i]);
    }
    CHECK(hi - lo <= 0.1);
}

TEST_CASE("halving the amplitude lowers intensity by 6.02 dB") {
    const Waveform w = testkit::synth_tone(300.0, 0.8, 48000, 0.8);
    Waveform half = w;
    for (auto& s : half.samples) s *= 0.5;
    const Contour a = intensity_contour(w);
    const Contour b = intensity_contour(half);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (!a.values[i] || !b.values[i]) continue;
        CHECK(std::fabs((*a.values[i] - *b.values[i]) - 20.0 * std::log10(2.0)) <= 0.05);
    }
}

TEST_CASE("all-zero signal has no defined intensity frames") {
    Waveform w;
    w.sample_rate_hz = 16000;
    w.samples.assign(16000, 0.0);
    const Contour c = intensity_contour(w);
    CHECK(c.values.size() > 0);
    CHECK(c.defined_count() == 0);
}

TEST_CASE("intensity is shift-invariant by a whole frame step") {
    const Waveform w = testkit::synth_tone(250.0, 0.6, 16000, 0.7);
    const Contour a = intensity_contour(w);
    Waveform shifted;
    shifted.sample_rate_hz = w.sample_rate_hz;
    const std::size_t step = static_cast<std::size_t>(std::lround(0.008 * w.sample_rate_hz));
    shifted.samples.assign(step, 0.0);
    shifted.samples.insert(shifted.samples.end(), w.samples.begin(), w.samples.end());
    const Contour b = intensity_contour(shifted);
    REQUIRE(b.values.size() >= a.values.size());
    for (std::size_t i = 0; i + 1 < a.values.size(); ++i) {
        if (!a.values[i] || !b.values[i + 1]) continue;
        CHECK(std::fabs(*a.values[i] - *b.values[i + 1]) <= 0.1);
    }
}

TEST_CASE("spectral centroid oracles") {
    SUBCASE("pure 1 kHz tone") {
        const Waveform w = testkit::synth_tone(1000.0, 0.5, 48000, 0.5);
        const double bin = 48000.0 / 1024.0;
        CHECK(std::fabs(spectral_centroid(w, 0.0, 0.5) - 1000.0) <= bin);
    }
    SUBCASE("flat-spectrum noise lands near Nyquist/2") {
        Rng rng(99);
        Waveform w;
        w.sample_rate_hz = 48000;
        for (int i = 0; i < 48000; ++i) w.samples.push_back(rng.uniform(-0.9, 0.9));
        const double c = spectral_centroid(w, 0.0, 1.0);
        CHECK(std::fabs(c - 12000.0) <= 0.05 * 12000.0);
    }
    SUBCASE("two equal tones average") {
        Waveform w = testkit::synth_tone(1000.0, 0.5, 48000, 0.4);
        const Waveform t2 = testkit::synth_tone(3000.0, 0.5, 48000, 0.4);
        for (std::size_t i = 0; i < w.samples.size(); ++i) w.samples[i] += t2.samples[i];
        const double bin = 48000.0 / 1024.0;
        CHECK(std::fabs(spectral_centroid(w, 0.0, 0.5) - 2000.0) <= bin);
    }
    SUBCASE("amplitude invariance") {
        const Waveform w = testkit::synth_tone(2200.0, 0.3, 48000, 0.3);
        Waveform scaled = w;
        for (auto& s : scaled.samples) s *= 7.5;
        const double a = spectral_centroid(w, 0.0, 0.3);
        const double b = spectral_centroid(scaled, 0.0, 0.3);
        CHECK(std::fabs(a - b) / a < 1e-9);
    }
    SUBCASE("degenerate interval") {
        const Waveform w = testkit::synth_tone(1000.0, 0.5, 48000, 0.5);
        CHECK_THROWS_AS(spectral_centroid(w, 0.1, 0.105), ContractError);
    }
}

TEST_CASE("formant oracle: synthetic vowel") {
    const Waveform w = testkit::synth_vowel(
        120.0, {{500.0, 80.0}, {1500.0, 90.0}, {2500.0, 100.0}}, 1.0, 48000);
    const auto frames = formant_tracks(w);
    std::vector<double> f1, f2, f3;
    for (const auto& fr : frames) {
        if (fr.t_s < 0.05 || fr.t_s > 0.95) continue;
        if (fr.f1_hz) f1.push_back(*fr.f1_hz);
        if (fr.f2_hz) f2.push_back(*fr.f2_hz);
        if (fr.f3_hz) f3.push_back(*fr.f3_hz);
    }
    REQUIRE(f1.size() > 10);
    REQUIRE(f2.size() > 10);
    REQUIRE(f3.size() > 10);
    CHECK(std::fabs(median(f1) - 500.0) <= 50.0);
    CHECK(std::fabs(median(f2) - 1500.0) <= 50.0);
    CHECK(std::fabs(median(f3) - 2500.0) <= 50.0);
}

TEST_CASE("formant oracle: noise through the same filter") {
    Rng rng(5);
    Waveform noise;
    noise.sample_rate_hz = 48000;
    for (int i = 0; i < 48000; ++i) noise.samples.push_back(rng.uniform(-1.0, 1.0));
    // run the synth_vowel resonator cascade over noise
    Waveform filtered = noise;
    const double targets[3] = {500.0, 1500.0, 2500.0};
    const double bws[3] = {80.0, 90.0, 100.0};
    for (int k = 0; k < 3; ++k) {
        const double r = std::exp(-std::acos(-1.0) * bws[k] / 48000.0);
        const double theta = 2.0 * std::acos(-1.0) * targets[k] / 48000.0;
        const double a1 = 2.0 * r * std::cos(theta);
        const double a2 = -r * r;
        double y1 = 0.0, y2 = 0.0;
        for (auto& s : filtered.samples) {
            const double y = s + a1 * y1 + a2 * y2;
            y2 = y1;
            y1 = y;
            s = y;
        }
    }
    double peak = 0.0;
    for (double s : filtered.samples) peak = std::max(peak, std::fabs(s));
    for (auto& s : filtered.samples) s *= 0.5 / peak;

    const auto frames = formant_tracks(filtered);
    std::vector<double> f1, f2, f3;
    for (const auto& fr : frames) {
        if (fr.f1_hz) f1.push_back(*fr.f1_hz);
        if (fr.f2_hz) f2.push_back(*fr.f2_hz);
        if (fr.f3_hz) f3.push_back(*fr.f3_hz);
    }
    CHECK(std::fabs(median(f1) - 500.0) <= 75.0);
    CHECK(std::fabs(median(f2) - 1500.0) <= 75.0);
    CHECK(std::fabs(median(f3) - 2500.0) <= 75.0);
}

TEST_CASE("formants of silence are undefined, ordering invariant holds") {
    Waveform w;
    w.sample_rate_hz = 48000;
    w.samples.assign(48000, 0.0);
    for (const auto& fr : formant_tracks(w)) {
        CHECK_FALSE(fr.f1_hz.has_value());
        CHECK_FALSE(fr.f2_hz.has_value());
        CHECK_FALSE(fr.f3_hz.has_value());
    }

    const Waveform v = testkit::synth_vowel(
        110.0, {{600.0, 90.0}, {1700.0, 100.0}, {2600.0, 120.0}}, 0.5, 48000);
    for (const auto& fr : formant_tracks(v)) {
        if (fr.f1_hz && fr.f2_hz) CHECK(*fr.f1_hz < *fr.f2_hz);
        if (fr.f2_hz && fr.f3_hz) CHECK(*fr.f2_hz < *fr.f3_hz);
    }
}

TEST_CASE("slice") {
    const Waveform w = testkit::synth_tone(440.0, 1.0, 48000, 0.5);

    SUBCASE("identity") {
        const Waveform s = slice(w, 0.0, w.duration_s());
        CHECK(s.samples == w.samples);
    }
    SUBCASE("length rounding") {
        const Waveform s = slice(w, 0.25, 0.75);
        CHECK(std::llabs(static_cast<long long>(s.samples.size()) - 24000) <= 1);
    }
    SUBCASE("partition property") {
        Rng rng(11);
        for (int trial = 0; trial < 20; ++trial) {
            const double mid = rng.uniform(0.1, 0.9);
            const Waveform a = slice(w, 0.0, mid);
            const Waveform b = slice(w, mid, 1.0);
            std::vector<double> joined = a.samples;
            joined.insert(joined.end(), b.samples.begin(), b.samples.end());
            CHECK(joined == w.samples);
        }
    }
    SUBCASE("out of range") {
        CHECK_THROWS_AS(slice(w, -0.5, 0.5), ContractError);
        CHECK_THROWS_AS(slice(w, 0.5, 1.5), ContractError);
        CHECK_THROWS_AS(slice(w, 0.7, 0.7), ContractError);
    }
}

TEST_CASE("resampler preserves a tone") {
    const Waveform w = testkit::synth_tone(440.0, 0.5, 48000, 0.5);
    const Waveform r = resample(w, 11000);
    CHECK(r.sample_rate_hz == 11000);
    CHECK(std::fabs(r.duration_s() - 0.5) < 0.01);
    // the tone survives: dominant autocorrelation period maps back to 440 Hz
    const Contour c = f0_contour(r, {});
    const PitchSummary s = summarize_interior(c, r.duration_s());
    CHECK(std::fabs(s.median_semitones - hz_to_semitones(440.0)) <= 0.2);
}

}  // TEST_SUITE
