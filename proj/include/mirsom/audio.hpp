#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mirsom/common.hpp"
#include "mirsom/csv.hpp"
#include "mirsom/flac.hpp"

namespace mirsom {

constexpr double kPeakTarget = 0.9;
constexpr std::uint32_t kMinSampleRate = 8000;

// Analysis-ready mono signal. Immutable after decode; safe to share read-only.
struct AudioClip {
    std::string id;
    std::vector<double> samples;  // in [-1, 1]
    std::uint32_t sample_rate = 0;

    double duration() const {
        return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
    }
};

struct ManifestEntry {
    std::string id;
    std::filesystem::path path;  // resolved against the manifest directory
    std::string group;
    std::string notes;
};

struct CorpusManifest {
    std::vector<ManifestEntry> entries;

    std::set<std::string> groups() const {
        std::set<std::string> g;
        for (const auto& e : entries) g.insert(e.group);
        return g;
    }
};

enum class WavFormat { pcm16, pcm24, pcm32, f32, f64 };

namespace audio_detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

inline std::uint32_t rd_u32le(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t rd_u16le(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0]) | (static_cast<std::uint16_t>(p[1]) << 8);
}

inline std::string wave_codec_name(std::uint16_t tag) {
    switch (tag) {
        case 0x0002: return "MS ADPCM";
        case 0x0006: return "A-law";
        case 0x0007: return "mu-law";
        case 0x0011: return "IMA ADPCM";
        case 0x0050: return "MPEG";
        case 0x0055: return "MPEG Layer 3";
        default: return "WAVE format tag " + std::to_string(tag);
    }
}

struct RawAudio {
    std::vector<std::vector<double>> channels;
    std::uint32_t sample_rate = 0;
};

inline RawAudio decode_wav_bytes(const std::vector<std::uint8_t>& b) {
    if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 || std::memcmp(b.data() + 8, "WAVE", 4) != 0)
        throw DecodeError("not a RIFF WAVE stream");

    std::uint16_t format_tag = 0, num_channels = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    bool have_fmt = false;
    const std::uint8_t* data_ptr = nullptr;
    std::size_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= b.size()) {
        const char* cid = reinterpret_cast<const char*>(b.data() + pos);
        std::uint32_t csize = rd_u32le(b.data() + pos + 4);
        pos += 8;
        if (pos + csize > b.size()) csize = static_cast<std::uint32_t>(b.size() - pos);
        if (std::memcmp(cid, "fmt ", 4) == 0) {
            if (csize < 16) throw DecodeError("WAVE: fmt chunk too small");
            format_tag = rd_u16le(b.data() + pos);
            num_channels = rd_u16le(b.data() + pos + 2);
            sample_rate = rd_u32le(b.data() + pos + 4);
            bits = rd_u16le(b.data() + pos + 14);
            if (format_tag == 0xFFFE) {
                if (csize < 40) throw DecodeError("WAVE: truncated extensible fmt chunk");
                format_tag = rd_u16le(b.data() + pos + 24);  // first bytes of SubFormat GUID
            }
            have_fmt = true;
        } else if (std::memcmp(cid, "data", 4) == 0) {
            data_ptr = b.data() + pos;
            data_size = csize;
        }
        pos += csize + (csize & 1);  // chunks are word-aligned
    }

    if (!have_fmt) throw DecodeError("WAVE: missing fmt chunk");
    if (data_ptr == nullptr) throw DecodeError("WAVE: missing data chunk");
    if (num_channels == 0) throw DecodeError("WAVE: zero channels");
    if (format_tag != 1 && format_tag != 3)
        throw DecodeError("unsupported codec: " + wave_codec_name(format_tag));
    if (format_tag == 1 && bits != 16 && bits != 24 && bits != 32)
        throw DecodeError("unsupported codec: PCM " + std::to_string(bits) + "-bit");
    if (format_tag == 3 && bits != 32 && bits != 64)
        throw DecodeError("unsupported codec: IEEE float " + std::to_string(bits) + "-bit");

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t frame_bytes = bytes_per_sample * num_channels;
    const std::size_t frames = frame_bytes == 0 ? 0 : data_size / frame_bytes;
    if (frames == 0) throw DataError("empty input: WAVE data chunk holds no samples");

    RawAudio raw;
    raw.sample_rate = sample_rate;
    raw.channels.assign(num_channels, std::vector<double>(frames));
    for (std::size_t f = 0; f < frames; ++f) {
        for (std::uint16_t c = 0; c < num_channels; ++c) {
            const std::uint8_t* p = data_ptr + f * frame_bytes + c * bytes_per_sample;
            double v = 0.0;
            if (format_tag == 1) {
                if (bits == 16) {
                    const std::int16_t s = static_cast<std::int16_t>(rd_u16le(p));
                    v = static_cast<double>(s) / 32768.0;
                } else if (bits == 24) {
                    std::int32_t s = static_cast<std::int32_t>(p[0]) | (static_cast<std::int32_t>(p[1]) << 8) |
                                     (static_cast<std::int32_t>(p[2]) << 16);
                    if (s & 0x800000) s |= ~0xFFFFFF;
                    v = static_cast<double>(s) / 8388608.0;
                } else {
                    const std::int32_t s = static_cast<std::int32_t>(rd_u32le(p));
                    v = static_cast<double>(s) / 2147483648.0;
                }
            } else {
                if (bits == 32) {
                    std::uint32_t u = rd_u32le(p);
                    float fv;
                    std::memcpy(&fv, &u, 4);
                    v = static_cast<double>(fv);
                } else {
                    std::uint64_t u = static_cast<std::uint64_t>(rd_u32le(p)) |
                                      (static_cast<std::uint64_t>(rd_u32le(p + 4)) << 32);
                    double dv;
                    std::memcpy(&dv, &u, 8);
                    v = dv;
                }
            }
            raw.channels[c][f] = v;
        }
    }
    return raw;
}

inline RawAudio decode_flac_bytes(const std::vector<std::uint8_t>& b) {
    FlacStream fs = decode_flac(b.data(), b.size());
    if (fs.channel_samples.empty() || fs.channel_samples[0].empty())
        throw DataError("empty input: FLAC stream holds no samples");
    RawAudio raw;
    raw.sample_rate = fs.sample_rate;
    const double scale = 1.0 / static_cast<double>(1ll << (fs.bits_per_sample - 1));
    raw.channels.reserve(fs.channel_samples.size());
    for (const auto& ch : fs.channel_samples) {
        std::vector<double> d(ch.size());
        for (std::size_t i = 0; i < ch.size(); ++i) d[i] = static_cast<double>(ch[i]) * scale;
        raw.channels.push_back(std::move(d));
    }
    return raw;
}

}  // namespace audio_detail

inline std::vector<double> mix_to_mono(const std::vector<std::vector<double>>& channels) {
    if (channels.empty()) return {};
    const std::size_t n = channels[0].size();
    std::vector<double> mono(n, 0.0);
    for (const auto& ch : channels) {
        const std::size_t m = std::min(n, ch.size());
        for (std::size_t i = 0; i < m; ++i) mono[i] += ch[i];
    }
    const double inv = 1.0 / static_cast<double>(channels.size());
    for (auto& s : mono) s *= inv;
    return mono;
}

// Rescales so the absolute peak sits at `target`; silent signals pass through.
inline void peak_normalize(std::vector<double>& samples, double target = kPeakTarget) {
    double peak = 0.0;
    for (double s : samples) peak = std::max(peak, std::fabs(s));
    if (peak <= 0.0) return;
    const double g = target / peak;
    for (auto& s : samples) s *= g;
}

inline AudioClip decode(const std::filesystem::path& path) {
    const auto bytes = audio_detail::read_file_bytes(path);
    if (bytes.empty()) throw DataError("empty input: " + path.string());

    audio_detail::RawAudio raw;
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "RIFF", 4) == 0)
        raw = audio_detail::decode_wav_bytes(bytes);
    else if (bytes.size() >= 4 && std::memcmp(bytes.data(), "fLaC", 4) == 0)
        raw = audio_detail::decode_flac_bytes(bytes);
    else
        throw DecodeError("unsupported container: " + path.filename().string());

    if (raw.sample_rate < kMinSampleRate)
        throw DecodeError("sample rate " + std::to_string(raw.sample_rate) + " Hz below supported minimum");

    AudioClip clip;
    clip.id = path.stem().string();
    clip.sample_rate = raw.sample_rate;
    clip.samples = mix_to_mono(raw.channels);
    if (clip.samples.empty()) throw DataError("empty input: " + path.string());
    peak_normalize(clip.samples);
    return clip;
}

inline void write_wav(const std::filesystem::path& path, const std::vector<std::vector<double>>& channels,
                      std::uint32_t sample_rate, WavFormat format = WavFormat::pcm16) {
    if (channels.empty() || channels[0].empty()) throw std::invalid_argument("write_wav: no samples");
    const std::uint16_t nch = static_cast<std::uint16_t>(channels.size());
    const std::size_t frames = channels[0].size();
    std::uint16_t bits = 0, tag = 1;
    switch (format) {
        case WavFormat::pcm16: bits = 16; break;
        case WavFormat::pcm24: bits = 24; break;
        case WavFormat::pcm32: bits = 32; break;
        case WavFormat::f32: bits = 32; tag = 3; break;
        case WavFormat::f64: bits = 64; tag = 3; break;
    }
    const std::uint32_t byte_rate = sample_rate * nch * bits / 8;
    const std::uint16_t block_align = static_cast<std::uint16_t>(nch * bits / 8);
    const std::uint32_t data_size = static_cast<std::uint32_t>(frames * nch * bits / 8);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    auto w16 = [&](std::uint16_t v) { out.put(static_cast<char>(v & 0xFF)).put(static_cast<char>(v >> 8)); };
    auto w32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
    };
    out.write("RIFF", 4);
    w32(36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    w32(16);
    w16(tag);
    w16(nch);
    w32(sample_rate);
    w32(byte_rate);
    w16(block_align);
    w16(bits);
    out.write("data", 4);
    w32(data_size);

    for (std::size_t f = 0; f < frames; ++f) {
        for (std::uint16_t c = 0; c < nch; ++c) {
            const double v = std::clamp(channels[c][f], -1.0, 1.0);
            switch (format) {
                case WavFormat::pcm16: {
                    const int s = static_cast<int>(std::lrint(v * 32767.0));
                    w16(static_cast<std::uint16_t>(static_cast<std::int16_t>(s)));
                    break;
                }
                case WavFormat::pcm24: {
                    const std::int32_t s = static_cast<std::int32_t>(std::lrint(v * 8388607.0));
                    out.put(static_cast<char>(s & 0xFF));
                    out.put(static_cast<char>((s >> 8) & 0xFF));
                    out.put(static_cast<char>((s >> 16) & 0xFF));
                    break;
                }
                case WavFormat::pcm32: {
                    const std::int64_t s = static_cast<std::int64_t>(std::llrint(v * 2147483647.0));
                    w32(static_cast<std::uint32_t>(static_cast<std::int32_t>(s)));
                    break;
                }
                case WavFormat::f32: {
                    const float fv = static_cast<float>(v);
                    std::uint32_t u;
                    std::memcpy(&u, &fv, 4);
                    w32(u);
                    break;
                }
                case WavFormat::f64: {
                    std::uint64_t u;
                    std::memcpy(&u, &v, 8);
                    w32(static_cast<std::uint32_t>(u & 0xFFFFFFFF));
                    w32(static_cast<std::uint32_t>(u >> 32));
                    break;
                }
            }
        }
    }
}

inline CorpusManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest: " + path.string());
    const std::filesystem::path base = path.parent_path();

    std::string line;
    if (!std::getline(in, line)) throw ValidationError("manifest is empty: " + path.string());
    const auto header = split_csv_record(line);
    if (header.size() < 4 || header[0] != "id" || header[1] != "path" || header[2] != "group" ||
        header[3] != "notes")
        throw ValidationError("manifest header must be id,path,group,notes");

    CorpusManifest manifest;
    std::map<std::string, int> id_counts;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_record(line);
        if (fields.size() < 3)
            throw ValidationError("manifest line " + std::to_string(line_no) + ": expected id,path,group[,notes]");
        ManifestEntry e;
        e.id = fields[0];
        e.path = base / std::filesystem::path(fields[1]);
        e.group = fields[2];
        e.notes = fields.size() > 3 ? fields[3] : "";
        if (e.id.empty()) throw ValidationError("manifest line " + std::to_string(line_no) + ": empty id");
        if (e.group.empty())
            throw ValidationError("manifest line " + std::to_string(line_no) + ": empty group label for id " + e.id);
        ++id_counts[e.id];
        manifest.entries.push_back(std::move(e));
    }

    std::string dupes;
    for (const auto& [id, count] : id_counts)
        if (count > 1) dupes += (dupes.empty() ? "" : ", ") + id;
    if (!dupes.empty()) throw ValidationError("duplicate piece ids in manifest: " + dupes);
    return manifest;
}

}  // namespace mirsom
