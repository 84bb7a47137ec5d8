#include "msspeech/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "msspeech/error.hpp"
#include "msspeech/fft.hpp"
#include "msspeech/kernels.hpp"

namespace msspeech {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n);
    if (n == 1) {
        w[0] = 1.0;
        return w;
    }
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                    static_cast<double>(n - 1));
    }
    return w;
}

// nearest sample, ties toward the earlier sample
std::int64_t time_to_sample(double t_s, double rate) {
    return static_cast<std::int64_t>(std::ceil(t_s * rate - 0.5));
}

struct Framing {
    std::size_t window = 0;
    std::size_t step = 0;
    std::size_t count = 0;
};

Framing make_framing(std::size_t n_samples, double window_s, double step_s, double rate) {
    Framing f;
    f.window = static_cast<std::size_t>(std::lround(window_s * rate));
    f.step = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(step_s * rate)));
    f.count = n_samples >= f.window ? (n_samples - f.window) / f.step + 1 : 0;
    return f;
}

}  // namespace

std::vector<double> Contour::defined_values() const {
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& v : values) {
        if (v) out.push_back(*v);
    }
    return out;
}

std::size_t Contour::defined_count() const {
    std::size_t n = 0;
    for (const auto& v : values) {
        if (v) ++n;
    }
    return n;
}

double hz_to_semitones(double f_hz, double ref_hz) {
    if (!(f_hz > 0.0) || !(ref_hz > 0.0)) {
        throw ContractError("hz_to_semitones: frequency must be positive");
    }
    return 12.0 * std::log2(f_hz / ref_hz);
}

// ---------------------------------------------------------------------------
// pitch

Contour f0_contour(const Waveform& w, const PitchConfig& cfg) {
    if (!(cfg.floor_hz > 0.0) || !(cfg.floor_hz < cfg.ceiling_hz) ||
        !(cfg.ceiling_hz < 0.5 * w.sample_rate_hz) || !(cfg.time_step_s > 0.0)) {
        throw ContractError("f0_contour: invalid pitch config");
    }
    if (w.duration_s() < 2.0 / cfg.floor_hz) {
        throw ContractError("f0_contour: signal shorter than 2 pitch-floor periods");
    }

    const double rate = w.sample_rate_hz;
    const Framing fr = make_framing(w.samples.size(), 3.0 / cfg.floor_hz, cfg.time_step_s, rate);
    const std::size_t n = fr.window;

    Contour c;
    c.t0_s = (static_cast<double>(n) - 1.0) / 2.0 / rate;
    c.dt_s = static_cast<double>(fr.step) / rate;
    c.values.resize(fr.count);
    if (fr.count == 0) return c;

    const std::vector<double> win = hann_window(n);

    std::size_t kmin = static_cast<std::size_t>(std::floor(rate / cfg.ceiling_hz));
    std::size_t kmax = static_cast<std::size_t>(std::ceil(rate / cfg.floor_hz));
    kmin = std::max<std::size_t>(kmin, 2);
    kmax = std::min(kmax, n - 2);
    if (kmin + 1 >= kmax) throw ContractError("f0_contour: empty lag range");

    // The windowed autocorrelation is divided by the window's own normalized
    // autocorrelation; the raw peak is biased toward shorter lags by the
    // window taper.
    const double rw0 = kernels::sum_sq(win);
    std::vector<double> rw(kmax + 2, 1.0);
    for (std::size_t k = kmin - 1; k <= kmax + 1; ++k) {
        rw[k] = kernels::dot(std::span(win).first(n - k), std::span(win).subspan(k)) / rw0;
    }

    std::vector<double> frame(n), rho(kmax + 2, 0.0);
    const double octave_penalty = 0.01;  // per-octave lag-length penalty among candidates

    for (std::size_t j = 0; j < fr.count; ++j) {
        const double* src = w.samples.data() + j * fr.step;
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += src[i];
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) frame[i] = src[i] - mean;
        kernels::mul(frame, win, frame);

        const double r0 = kernels::sum_sq(frame);
        if (r0 <= 0.0) continue;  // silence: unvoiced

        for (std::size_t k = kmin - 1; k <= kmax + 1; ++k) {
            const double rk =
                kernels::dot(std::span<const double>(frame).first(n - k),
                             std::span<const double>(frame).subspan(k));
            rho[k] = (rk / r0) / rw[k];
        }

        double best_score = -1e9, best_lag = 0.0, best_peak = 0.0;
        for (std::size_t k = kmin; k <= kmax; ++k) {
            if (!(rho[k] > rho[k - 1] && rho[k] >= rho[k + 1])) continue;
            double lag = static_cast<double>(k);
            double peak = rho[k];
            const double denom = rho[k - 1] - 2.0 * rho[k] + rho[k + 1];
            if (std::fabs(denom) > 1e-300) {
                double delta = 0.5 * (rho[k - 1] - rho[k + 1]) / denom;
                delta = std::clamp(delta, -0.5, 0.5);
                lag += delta;
                peak -= 0.25 * (rho[k - 1] - rho[k + 1]) * delta;
            }
            const double score =
                peak - octave_penalty * std::log2(lag / rate * cfg.floor_hz);
            if (score > best_score) {
                best_score = score;
                best_lag = lag;
                best_peak = peak;
            }
        }

        if (best_lag > 0.0 && best_peak >= cfg.voicing_threshold) {
            c.values[j] = hz_to_semitones(rate / best_lag);
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// intensity

Contour intensity_contour(const Waveform& w, double window_s, double time_step_s) {
    if (!(window_s > 0.0) || !(time_step_s > 0.0)) {
        throw ContractError("intensity_contour: invalid framing");
    }
    if (w.duration_s() < window_s) {
        throw ContractError("intensity_contour: signal shorter than one window");
    }
    const double rate = w.sample_rate_hz;
    const Framing fr = make_framing(w.samples.size(), window_s, time_step_s, rate);
    const std::vector<double> win = hann_window(fr.window);

    Contour c;
    c.t0_s = (static_cast<double>(fr.window) - 1.0) / 2.0 / rate;
    c.dt_s = static_cast<double>(fr.step) / rate;
    c.values.resize(fr.count);

    std::vector<double> buf(fr.window);
    for (std::size_t j = 0; j < fr.count; ++j) {
        const std::span<const double> src(w.samples.data() + j * fr.step, fr.window);
        kernels::mul(src, win, buf);
        const double ms = kernels::sum_sq(buf) / static_cast<double>(fr.window);
        if (ms > 0.0) c.values[j] = 10.0 * std::log10(ms / 2e-10);
    }
    return c;
}

// ---------------------------------------------------------------------------
// spectral centroid

double spectral_centroid(const Waveform& w, double t_start_s, double t_end_s) {
    const double dur = w.duration_s();
    if (!(t_start_s >= -1e-9) || !(t_start_s < t_end_s) || !(t_end_s <= dur + 1e-9)) {
        throw ContractError("spectral_centroid: interval outside waveform");
    }
    if (t_end_s - t_start_s < 0.01) {
        throw ContractError("spectral_centroid: interval shorter than 10 ms");
    }
    const double rate = w.sample_rate_hz;
    const auto i0 = static_cast<std::size_t>(std::max<std::int64_t>(0, time_to_sample(t_start_s, rate)));
    const auto i1 = static_cast<std::size_t>(
        std::min<std::int64_t>(static_cast<std::int64_t>(w.samples.size()),
                               time_to_sample(t_end_s, rate)));
    const std::size_t n_int = i1 - i0;

    std::size_t frame_len = static_cast<std::size_t>(std::lround(0.02 * rate));
    frame_len = std::min(frame_len, n_int);
    const std::size_t hop = std::max<std::size_t>(1, frame_len / 2);
    const std::size_t nfft = next_pow2(frame_len);

    const std::vector<double> win = hann_window(frame_len);
    std::vector<std::complex<double>> spec(nfft);
    std::vector<double> re(nfft / 2 + 1), im(nfft / 2 + 1), mag(nfft / 2 + 1);
    std::vector<double> avg(nfft / 2 + 1, 0.0);
    std::vector<double> buf(frame_len);

    std::size_t n_frames = 0;
    for (std::size_t s = i0; s + frame_len <= i1; s += hop) {
        kernels::mul(std::span<const double>(w.samples.data() + s, frame_len), win, buf);
        std::fill(spec.begin(), spec.end(), std::complex<double>(0.0, 0.0));
        for (std::size_t i = 0; i < frame_len; ++i) spec[i] = buf[i];
        fft_inplace(spec);
        for (std::size_t k = 0; k <= nfft / 2; ++k) {
            re[k] = spec[k].real();
            im[k] = spec[k].imag();
        }
        kernels::magnitude(re, im, mag);
        for (std::size_t k = 0; k <= nfft / 2; ++k) avg[k] += mag[k];
        ++n_frames;
    }
    if (n_frames == 0) throw ContractError("spectral_centroid: no full frame fits interval");

    double num = 0.0, den = 0.0;
    for (std::size_t k = 1; k <= nfft / 2; ++k) {  // f in (0, Nyquist]
        const double f = static_cast<double>(k) * rate / static_cast<double>(nfft);
        num += f * avg[k];
        den += avg[k];
    }
    if (den <= 0.0) throw InsufficientDataError("spectral_centroid: interval is silent");
    return num / den;
}

// ---------------------------------------------------------------------------
// resampler

Waveform resample(const Waveform& w, int target_rate_hz) {
    if (target_rate_hz <= 0) throw ContractError("resample: bad target rate");
    if (target_rate_hz == w.sample_rate_hz) return w;

    const std::int64_t in_rate = w.sample_rate_hz;
    const std::int64_t out_rate = target_rate_hz;
    const std::int64_t g = std::gcd(in_rate, out_rate);
    const std::int64_t phases = out_rate / g;  // output position advances M/L input samples
    const std::int64_t m_step = in_rate / g;

    const double ratio = static_cast<double>(out_rate) / static_cast<double>(in_rate);
    const double fc = 0.46 * std::min(1.0, ratio);  // cycles per input sample
    const int half = static_cast<int>(std::ceil(8.0 / (2.0 * fc)));
    const int taps = 2 * half + 1;

    auto make_taps = [&](double frac, double* h) {
        double sum = 0.0;
        for (int j = -half; j <= half; ++j) {
            const double t = static_cast<double>(j) - frac;
            const double x = 2.0 * fc * t;
            const double sinc = x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x);
            const double u = t / static_cast<double>(half + 1);
            const double window = std::fabs(u) <= 1.0 ? 0.5 + 0.5 * std::cos(kPi * u) : 0.0;
            h[j + half] = 2.0 * fc * sinc * window;
            sum += h[j + half];
        }
        for (int j = 0; j < taps; ++j) h[j] /= sum;  // unit DC gain per phase
    };

    std::vector<double> table;
    const bool precomputed = phases <= 8192;
    if (precomputed) {
        table.resize(static_cast<std::size_t>(phases) * taps);
        for (std::int64_t r = 0; r < phases; ++r) {
            make_taps(static_cast<double>(r) / static_cast<double>(phases),
                      table.data() + r * taps);
        }
    }

    const std::int64_t n_in = static_cast<std::int64_t>(w.samples.size());
    const std::int64_t n_out = n_in > 0 ? (n_in - 1) * phases / m_step + 1 : 0;

    Waveform out;
    out.sample_rate_hz = target_rate_hz;
    out.samples.resize(static_cast<std::size_t>(n_out));

    std::vector<double> scratch(taps);
    for (std::int64_t nidx = 0; nidx < n_out; ++nidx) {
        const std::int64_t num = nidx * m_step;
        const std::int64_t q = num / phases;
        const std::int64_t r = num % phases;
        const double* h;
        if (precomputed) {
            h = table.data() + r * taps;
        } else {
            make_taps(static_cast<double>(r) / static_cast<double>(phases), scratch.data());
            h = scratch.data();
        }
        const std::int64_t lo = q - half;
        const std::int64_t hi = q + half;
        double acc;
        if (lo >= 0 && hi < n_in) {
            acc = kernels::dot(std::span<const double>(w.samples.data() + lo,
                                                       static_cast<std::size_t>(taps)),
                               std::span<const double>(h, static_cast<std::size_t>(taps)));
        } else {
            acc = 0.0;
            for (std::int64_t j = std::max<std::int64_t>(lo, 0);
                 j <= std::min<std::int64_t>(hi, n_in - 1); ++j) {
                acc += w.samples[static_cast<std::size_t>(j)] * h[j - lo];
            }
        }
        out.samples[static_cast<std::size_t>(nidx)] = acc;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Burg LPC and formants

namespace {

// Burg recursion; returns prediction polynomial a[0..order] with a[0] = 1,
// or empty on degenerate input.
std::vector<double> burg_lpc(std::span<const double> x, int order) {
    const std::size_t n = x.size();
    if (n <= static_cast<std::size_t>(order) + 1) return {};

    std::vector<double> ef(x.begin(), x.end());
    std::vector<double> eb(x.begin(), x.end());
    std::vector<double> a(static_cast<std::size_t>(order) + 1, 0.0);
    std::vector<double> a_prev(a.size(), 0.0);
    a[0] = 1.0;

    for (int m = 1; m <= order; ++m) {
        const std::size_t len = n - static_cast<std::size_t>(m);
        const std::span<const double> f(ef.data() + m, len);
        const std::span<const double> b(eb.data() + m - 1, len);
        const double num = 2.0 * kernels::dot(f, b);
        const double den = kernels::sum_sq(f) + kernels::sum_sq(b);
        if (!(den > 0.0) || !std::isfinite(num)) return {};
        const double k = num / den;

        a_prev = a;
        for (int j = 1; j <= m; ++j) a[j] = a_prev[j] - k * a_prev[m - j];

        for (std::size_t i = n - 1; i >= static_cast<std::size_t>(m); --i) {
            const double fi = ef[i];
            const double bi = eb[i - 1];
            ef[i] = fi - k * bi;
            eb[i] = bi - k * fi;
        }
    }
    for (double v : a) {
        if (!std::isfinite(v)) return {};
    }
    return a;
}

// Durand-Kerner iteration; coeffs are for z^p + c[1] z^(p-1) + ... + c[p].
std::vector<std::complex<double>> poly_roots(const std::vector<double>& coeffs) {
    const int p = static_cast<int>(coeffs.size()) - 1;
    std::vector<std::complex<double>> z(p);
    const std::complex<double> seed(0.4, 0.9);
    std::complex<double> acc(1.0, 0.0);
    for (int i = 0; i < p; ++i) {
        acc *= seed;
        z[i] = acc;
    }
    auto eval = [&](std::complex<double> v) {
        std::complex<double> r(coeffs[0], 0.0);
        for (int j = 1; j <= p; ++j) r = r * v + coeffs[j];
        return r;
    };
    for (int iter = 0; iter < 120; ++iter) {
        double max_step = 0.0;
        for (int i = 0; i < p; ++i) {
            std::complex<double> d(1.0, 0.0);
            for (int j = 0; j < p; ++j) {
                if (j != i) d *= z[i] - z[j];
            }
            if (std::abs(d) < 1e-300) {
                z[i] += std::complex<double>(1e-6, 1e-6);
                max_step = 1.0;
                continue;
            }
            const std::complex<double> step = eval(z[i]) / d;
            z[i] -= step;
            max_step = std::max(max_step, std::abs(step) / (1.0 + std::abs(z[i])));
        }
        if (max_step < 1e-13) break;
    }
    return z;
}

}  // namespace

std::vector<FormantFrame> formant_tracks(const Waveform& w, const FormantConfig& cfg) {
    if (cfg.lpc_order % 2 != 0 || cfg.lpc_order < 2 * cfg.n_formants ||
        !(cfg.window_s > cfg.time_step_s) || !(cfg.max_formant_hz > 0.0)) {
        throw ContractError("formant_tracks: invalid formant config");
    }
    if (w.duration_s() < cfg.window_s) {
        throw ContractError("formant_tracks: signal shorter than one window");
    }

    const int target_rate = static_cast<int>(std::lround(2.0 * cfg.max_formant_hz));
    Waveform d = w.sample_rate_hz > target_rate ? resample(w, target_rate) : w;
    const double rate = d.sample_rate_hz;

    // pre-emphasis
    const double alpha = std::exp(-2.0 * kPi * cfg.preemphasis_from_hz / rate);
    for (std::size_t i = d.samples.size(); i-- > 1;) {
        d.samples[i] -= alpha * d.samples[i - 1];
    }

    const Framing fr = make_framing(d.samples.size(), cfg.window_s, cfg.time_step_s, rate);
    const std::vector<double> win = hann_window(fr.window);
    std::vector<double> frame(fr.window);

    std::vector<FormantFrame> out(fr.count);
    for (std::size_t j = 0; j < fr.count; ++j) {
        FormantFrame& ff = out[j];
        ff.t_s = (static_cast<double>(j * fr.step) + (static_cast<double>(fr.window) - 1.0) / 2.0) /
                 rate;

        const double* src = d.samples.data() + j * fr.step;
        double mean = 0.0;
        for (std::size_t i = 0; i < fr.window; ++i) mean += src[i];
        mean /= static_cast<double>(fr.window);
        for (std::size_t i = 0; i < fr.window; ++i) frame[i] = src[i] - mean;
        kernels::mul(frame, win, frame);
        if (kernels::sum_sq(frame) <= 0.0) continue;

        const std::vector<double> a = burg_lpc(frame, cfg.lpc_order);
        if (a.empty()) continue;

        std::vector<double> candidates;
        for (const auto& root : poly_roots(a)) {
            if (root.imag() <= 0.0) continue;  // keep one of each conjugate pair
            const double radius = std::abs(root);
            if (!(radius > 0.0) || radius > 1.0) continue;
            const double f = std::atan2(root.imag(), root.real()) * rate / (2.0 * kPi);
            const double bw = -std::log(radius) * rate / kPi;
            if (f > 50.0 && f < cfg.max_formant_hz && bw < 400.0) candidates.push_back(f);
        }
        std::sort(candidates.begin(), candidates.end());
        if (candidates.size() > 0) ff.f1_hz = candidates[0];
        if (candidates.size() > 1) ff.f2_hz = candidates[1];
        if (candidates.size() > 2) ff.f3_hz = candidates[2];
    }
    return out;
}

// ---------------------------------------------------------------------------
// slicing

Waveform slice(const Waveform& w, double t_start_s, double t_end_s) {
    const double dur = w.duration_s();
    if (!(t_start_s >= -1e-9) || !(t_start_s < t_end_s) || !(t_end_s <= dur + 1e-9)) {
        throw ContractError("slice: range outside waveform");
    }
    const double rate = w.sample_rate_hz;
    std::int64_t i0 = time_to_sample(t_start_s, rate);
    std::int64_t i1 = time_to_sample(t_end_s, rate);
    i0 = std::clamp<std::int64_t>(i0, 0, static_cast<std::int64_t>(w.samples.size()));
    i1 = std::clamp<std::int64_t>(i1, 0, static_cast<std::int64_t>(w.samples.size()));
    if (i1 <= i0) throw ContractError("slice: empty after rounding");

    Waveform out;
    out.sample_rate_hz = w.sample_rate_hz;
    out.samples.assign(w.samples.begin() + i0, w.samples.begin() + i1);
    return out;
}

}  // namespace msspeech
