#include "plclab/wav_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "plclab/common.hpp"

// Minimal RIFF/WAVE reader-writer. Little-endian throughout per RIFF;
// unknown chunks are skipped (word-aligned).

namespace plclab {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t read_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(v & 0xFF);
    out.push_back((v >> 8) & 0xFF);
    out.push_back((v >> 16) & 0xFF);
    out.push_back((v >> 24) & 0xFF);
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(v & 0xFF);
    out.push_back((v >> 8) & 0xFF);
}

}  // namespace

AudioBuffer load_wav(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open WAV file: " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw DataError("not a RIFF/WAVE file: " + path.string());

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t sample_rate = 0;
    const uint8_t* data = nullptr;
    size_t data_len = 0;
    bool have_fmt = false;

    size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
        const uint32_t len = read_u32(bytes.data() + pos + 4);
        const size_t body = pos + 8;
        if (body + len > bytes.size()) throw DataError("truncated WAV chunk: " + path.string());
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (len < 16) throw DataError("malformed fmt chunk: " + path.string());
            format = read_u16(bytes.data() + body);
            channels = read_u16(bytes.data() + body + 2);
            sample_rate = read_u32(bytes.data() + body + 4);
            bits = read_u16(bytes.data() + body + 14);
            if (format == kFormatExtensible) {
                if (len < 40) throw DataError("malformed extensible fmt chunk: " + path.string());
                format = read_u16(bytes.data() + body + 24);  // first GUID word
            }
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data = bytes.data() + body;
            data_len = len;
        }
        pos = body + len + (len & 1);  // chunks are word-aligned
    }

    if (!have_fmt || data == nullptr) throw DataError("missing fmt/data chunk: " + path.string());
    if (channels == 0) throw DataError("zero channels: " + path.string());
    const bool pcm16 = format == kFormatPcm && bits == 16;
    const bool f32 = format == kFormatFloat && bits == 32;
    if (!pcm16 && !f32)
        throw DataError("unsupported WAV encoding (need PCM16 or float32): " + path.string());

    const size_t bytes_per_sample = bits / 8;
    const size_t frame_bytes = bytes_per_sample * channels;
    const size_t n_frames = data_len / frame_bytes;
    if (n_frames == 0) throw DataError("zero-length audio: " + path.string());

    AudioBuffer out;
    out.sample_rate = static_cast<int>(sample_rate);
    out.samples.resize(n_frames);
    for (size_t i = 0; i < n_frames; ++i) {
        double acc = 0.0;
        for (size_t c = 0; c < channels; ++c) {
            const uint8_t* p = data + i * frame_bytes + c * bytes_per_sample;
            if (pcm16) {
                const int16_t v = static_cast<int16_t>(read_u16(p));
                acc += static_cast<double>(v) / 32768.0;
            } else {
                uint32_t raw = read_u32(p);
                float fv = std::bit_cast<float>(raw);
                if (!std::isfinite(fv))
                    throw DataError("non-finite sample in float WAV: " + path.string());
                acc += std::clamp(static_cast<double>(fv), -1.0, 1.0);
            }
        }
        out.samples[i] = acc / channels;
    }
    return out;
}

WavSaveStats save_wav(const AudioBuffer& buffer, const std::filesystem::path& path) {
    if (buffer.samples.empty()) throw DataError("refusing to write empty WAV: " + path.string());
    if (buffer.sample_rate <= 0) throw DataError("invalid sample rate on save");

    WavSaveStats stats;
    const uint32_t n = static_cast<uint32_t>(buffer.samples.size());
    const uint32_t data_bytes = n * 2;
    std::vector<uint8_t> out;
    out.reserve(44 + data_bytes);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    put_u32(out, 36 + data_bytes);
    out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    put_u32(out, 16);
    put_u16(out, kFormatPcm);
    put_u16(out, 1);  // mono
    put_u32(out, static_cast<uint32_t>(buffer.sample_rate));
    put_u32(out, static_cast<uint32_t>(buffer.sample_rate) * 2);
    put_u16(out, 2);   // block align
    put_u16(out, 16);  // bits
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    put_u32(out, data_bytes);
    for (double s : buffer.samples) {
        if (!std::isfinite(s)) throw DataError("non-finite sample on save");
        double x = s;
        if (x < -1.0 || x > 1.0) {
            x = std::clamp(x, -1.0, 1.0);
            ++stats.clipped;
        }
        const long q = std::lround(x * 32768.0);
        const int16_t v = static_cast<int16_t>(std::clamp<long>(q, -32768, 32767));
        put_u16(out, static_cast<uint16_t>(v));
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open for writing: " + path.string());
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("short write: " + path.string());
    return stats;
}

}  // namespace plclab
