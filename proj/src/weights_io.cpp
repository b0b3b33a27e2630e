#include "plclab/weights_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "plclab/common.hpp"

namespace plclab {

namespace {

constexpr uint16_t kVersion = 1;
constexpr char kMagic[4] = {'P', 'L', 'C', 'W'};

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(v & 0xFF);
    out.push_back((v >> 8) & 0xFF);
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

uint16_t read_u16(const uint8_t* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }

uint32_t read_u32(const uint8_t* p) {
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

uint64_t read_u64(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string build_header(const ModelWeights& w) {
    const auto& f = w.meta.features;
    std::ostringstream h;
    h << "format=plclab-weights\n";
    h << "mode=" << to_string(w.meta.mode) << "\n";
    h << "n_mels=" << f.n_mels << "\n";
    h << "win_ms=" << f.win_ms << "\n";
    h << "hop_ms=" << f.hop_ms << "\n";
    h << "sample_rate=" << f.sample_rate << "\n";
    h << "fft_size=" << f.fft_size << "\n";
    h << "fmin_hz=" << format_double(f.fmin_hz) << "\n";
    h << "fmax_hz=" << format_double(f.fmax_hz) << "\n";
    h << "log_floor=" << format_double(f.log_floor) << "\n";
    h << "in_ch=" << w.enc.in_ch << "\n";
    h << "conv_ch=" << w.enc.conv_ch << "\n";
    h << "latent=" << w.enc.latent_dim << "\n";
    h << "in_h=" << w.enc.in_h << "\n";
    h << "in_w=" << w.enc.in_w << "\n";
    h << "packet=" << w.synth.packet_dim << "\n";
    h << "hidden=" << w.synth.hidden_dim << "\n";
    h << "epochs=" << w.meta.epochs << "\n";
    h << "best_epoch=" << w.meta.best_epoch << "\n";
    h << "seed=" << w.meta.seed << "\n";
    h << "batch_size=" << w.meta.batch_size << "\n";
    h << "val_fraction=" << format_double(w.meta.val_fraction) << "\n";
    h << "n_samples=" << w.meta.n_samples << "\n";
    return h.str();
}

std::map<std::string, std::string> parse_header(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

int header_int(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw DataError("weight header missing key: " + key);
    return std::stoi(it->second);
}

double header_double(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw DataError("weight header missing key: " + key);
    return std::stod(it->second);
}

std::vector<uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open weight file: " + path.string());
    return std::vector<uint8_t>((std::istreambuf_iterator<char>(f)),
                                std::istreambuf_iterator<char>());
}

}  // namespace

void save_weights(const ModelWeights& w, const std::filesystem::path& path) {
    auto& enc = const_cast<nn::EncoderParams<float>&>(w.enc);
    auto& synth = const_cast<nn::SynthesizerParams<float>&>(w.synth);
    const auto views = nn::param_views(enc, synth);

    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u16(out, kVersion);
    const std::string header = build_header(w);
    put_u32(out, static_cast<uint32_t>(header.size()));
    out.insert(out.end(), header.begin(), header.end());

    uint64_t count = 0;
    for (const auto& v : views) count += v.size;
    put_u64(out, count);
    size_t base = out.size();
    out.resize(base + count * 4);
    for (const auto& v : views) {
        if constexpr (std::endian::native == std::endian::little) {
            std::memcpy(out.data() + base, v.data, v.size * 4);
            base += v.size * 4;
        } else {
            for (size_t i = 0; i < v.size; ++i) {
                const uint32_t bits = std::bit_cast<uint32_t>(v.data[i]);
                for (int b = 0; b < 4; ++b) out[base++] = (bits >> (8 * b)) & 0xFF;
            }
        }
    }
    const uint32_t crc = static_cast<uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(out.data()), static_cast<uInt>(out.size())));
    put_u32(out, crc);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write weight file: " + path.string());
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("short write: " + path.string());
}

ModelWeights load_weights(const std::filesystem::path& path) {
    const std::vector<uint8_t> bytes = read_file(path);
    if (bytes.size() < 4 + 2 + 4 + 8 + 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw DataError("not a plclab weight file: " + path.string());
    const uint16_t version = read_u16(bytes.data() + 4);
    if (version != kVersion)
        throw DataError("unsupported weight file version " + std::to_string(version));

    const uint32_t stored_crc = read_u32(bytes.data() + bytes.size() - 4);
    const uint32_t actual_crc = static_cast<uint32_t>(crc32(
        0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size() - 4)));
    if (stored_crc != actual_crc) throw DataError("weight file checksum mismatch: " + path.string());

    const uint32_t header_len = read_u32(bytes.data() + 6);
    size_t pos = 10;
    if (pos + header_len + 8 > bytes.size()) throw DataError("truncated weight header");
    const std::string header(reinterpret_cast<const char*>(bytes.data() + pos), header_len);
    pos += header_len;
    const auto kv = parse_header(header);

    ModelWeights w;
    w.meta.mode = context_mode_from_string(kv.count("mode") ? kv.at("mode") : "multi");
    auto& f = w.meta.features;
    f.n_mels = header_int(kv, "n_mels");
    f.win_ms = header_int(kv, "win_ms");
    f.hop_ms = header_int(kv, "hop_ms");
    f.sample_rate = header_int(kv, "sample_rate");
    f.fft_size = header_int(kv, "fft_size");
    f.fmin_hz = header_double(kv, "fmin_hz");
    f.fmax_hz = header_double(kv, "fmax_hz");
    f.log_floor = header_double(kv, "log_floor");
    w.meta.epochs = header_int(kv, "epochs");
    w.meta.best_epoch = header_int(kv, "best_epoch");
    w.meta.seed = static_cast<uint64_t>(std::stoull(kv.at("seed")));
    w.meta.batch_size = header_int(kv, "batch_size");
    w.meta.val_fraction = header_double(kv, "val_fraction");
    w.meta.n_samples = header_int(kv, "n_samples");

    const int in_ch = header_int(kv, "in_ch");
    const int conv_ch = header_int(kv, "conv_ch");
    const int latent = header_int(kv, "latent");
    const int in_h = header_int(kv, "in_h");
    const int in_w = header_int(kv, "in_w");
    const int packet = header_int(kv, "packet");
    const int hidden = header_int(kv, "hidden");
    // the concealment pipeline is compiled for this architecture
    if (in_ch != 3 || conv_ch != 64 || latent != 512 || in_h != 100 || in_w != 200 ||
        packet != 128 || hidden != 1024)
        throw DataError("weight file architecture does not match this build: " + path.string());
    w.enc = nn::make_encoder<float>(in_ch, conv_ch, latent, in_h, in_w);
    w.synth = nn::make_synthesizer<float>(packet, latent, hidden);

    const uint64_t count = read_u64(bytes.data() + pos);
    pos += 8;
    const auto views = nn::param_views(w.enc, w.synth);
    uint64_t expect = 0;
    for (const auto& v : views) expect += v.size;
    if (count != expect) throw DataError("weight payload count does not match dims");
    if (pos + count * 4 + 4 != bytes.size()) throw DataError("weight payload length mismatch");
    for (const auto& v : views) {
        if constexpr (std::endian::native == std::endian::little) {
            std::memcpy(v.data, bytes.data() + pos, v.size * 4);
            pos += v.size * 4;
        } else {
            for (size_t i = 0; i < v.size; ++i) {
                v.data[i] = std::bit_cast<float>(read_u32(bytes.data() + pos));
                pos += 4;
            }
        }
    }
    return w;
}

std::map<std::string, std::string> read_weights_header(const std::filesystem::path& path) {
    const std::vector<uint8_t> bytes = read_file(path);
    if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw DataError("not a plclab weight file: " + path.string());
    const uint32_t header_len = read_u32(bytes.data() + 6);
    if (10 + static_cast<size_t>(header_len) > bytes.size())
        throw DataError("truncated weight header");
    return parse_header(std::string(reinterpret_cast<const char*>(bytes.data() + 10), header_len));
}

}  // namespace plclab
