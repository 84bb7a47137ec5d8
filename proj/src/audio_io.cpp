#include "msspeech/audio_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "msspeech/error.hpp"

namespace msspeech {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& s, std::uint32_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& s, std::uint16_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

Waveform read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open WAV file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());

    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw FormatError("not a RIFF/WAVE file: " + path);
    }

    int channels = 0;
    int sample_rate = 0;
    int bits = 0;
    int audio_format = 0;
    bool have_fmt = false;
    std::size_t data_off = 0, data_len = 0;

    // chunk walk; chunks are word-aligned
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
        const std::uint32_t size = read_u32(bytes.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (body + size > bytes.size()) throw FormatError("truncated chunk in WAV file: " + path);
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (size < 16) throw FormatError("fmt chunk too short: " + path);
            audio_format = read_u16(bytes.data() + body);
            channels = read_u16(bytes.data() + body + 2);
            sample_rate = static_cast<int>(read_u32(bytes.data() + body + 4));
            bits = read_u16(bytes.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data_off = body;
            data_len = size;
        }
        pos = body + size + (size & 1);
    }

    if (!have_fmt || data_off == 0) throw FormatError("missing fmt or data chunk: " + path);
    if (audio_format != 1 || bits != 16) {
        throw FormatError("unsupported encoding (need 16-bit integer PCM): " + path);
    }
    if (channels < 1 || sample_rate <= 0) throw FormatError("bad fmt chunk: " + path);

    const std::size_t frame_bytes = static_cast<std::size_t>(channels) * 2;
    const std::size_t n_frames = data_len / frame_bytes;

    Waveform w;
    w.sample_rate_hz = sample_rate;
    w.samples.resize(n_frames);
    for (std::size_t i = 0; i < n_frames; ++i) {
        const unsigned char* p = bytes.data() + data_off + i * frame_bytes;  // channel 0
        const std::int16_t v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
        w.samples[i] = static_cast<double>(v) / 32768.0;
    }
    return w;
}

void write_wav(const Waveform& w, const std::string& path) {
    for (double s : w.samples) {
        if (!(s >= -1.0 && s <= 1.0)) {
            throw ContractError("write_wav: sample outside [-1, 1]");
        }
    }
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);

    std::string out;
    out.reserve(44 + data_bytes);
    out.append("RIFF");
    put_u32(out, 36 + data_bytes);
    out.append("WAVE");
    out.append("fmt ");
    put_u32(out, 16);
    put_u16(out, 1);  // PCM
    put_u16(out, 1);  // mono
    put_u32(out, static_cast<std::uint32_t>(w.sample_rate_hz));
    put_u32(out, static_cast<std::uint32_t>(w.sample_rate_hz) * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    out.append("data");
    put_u32(out, data_bytes);
    for (double s : w.samples) {
        long v = std::lround(s * 32768.0);
        if (v > 32767) v = 32767;
        if (v < -32768) v = -32768;
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write failed: " + path);
}

}  // namespace msspeech
