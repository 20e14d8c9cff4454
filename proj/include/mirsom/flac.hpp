#pragma once

// Native FLAC decoder covering the parts of the format that lossless field
// recordings actually use: constant/verbatim/fixed/LPC subframes, rice-coded
// residuals, independent channels and the three stereo decorrelation modes.
// Header and frame CRCs are verified.

#include <cstdint>
#include <string>
#include <vector>

#include "mirsom/common.hpp"

namespace mirsom {

struct FlacStream {
    std::uint32_t sample_rate = 0;
    std::uint32_t channels = 0;
    std::uint32_t bits_per_sample = 0;
    std::uint64_t total_samples = 0;  // 0 when the header leaves it unknown
    std::vector<std::vector<std::int64_t>> channel_samples;
};

namespace flac_detail {

inline std::uint8_t crc8(const std::uint8_t* data, std::size_t n) {
    std::uint8_t crc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        crc ^= data[i];
        for (int b = 0; b < 8; ++b)
            crc = static_cast<std::uint8_t>((crc & 0x80) ? (crc << 1) ^ 0x07 : crc << 1);
    }
    return crc;
}

inline std::uint16_t crc16(const std::uint8_t* data, std::size_t n) {
    std::uint16_t crc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        crc ^= static_cast<std::uint16_t>(data[i]) << 8;
        for (int b = 0; b < 8; ++b)
            crc = static_cast<std::uint16_t>((crc & 0x8000) ? (crc << 1) ^ 0x8005 : crc << 1);
    }
    return crc;
}

class BitReader {
public:
    BitReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    bool eof() const { return byte_ >= size_; }
    std::size_t byte_pos() const { return byte_; }
    bool byte_aligned() const { return bit_ == 0; }

    std::uint64_t read_bits(unsigned n) {
        std::uint64_t v = 0;
        for (unsigned i = 0; i < n; ++i) {
            if (byte_ >= size_) throw DecodeError("FLAC: truncated stream");
            v = (v << 1) | ((data_[byte_] >> (7 - bit_)) & 1u);
            if (++bit_ == 8) {
                bit_ = 0;
                ++byte_;
            }
        }
        return v;
    }

    std::int64_t read_signed(unsigned n) {
        std::uint64_t v = read_bits(n);
        if (n > 0 && (v & (1ull << (n - 1)))) v |= ~((1ull << n) - 1);
        return static_cast<std::int64_t>(v);
    }

    std::uint64_t read_unary() {
        std::uint64_t q = 0;
        while (read_bits(1) == 0) ++q;
        return q;
    }

    void align_to_byte() {
        if (bit_ != 0) {
            bit_ = 0;
            ++byte_;
        }
    }

    void seek(std::size_t byte) {
        byte_ = byte;
        bit_ = 0;
    }

private:
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t byte_ = 0;
    unsigned bit_ = 0;
};

// The frame-header sample/frame number uses a UTF-8-like variable length code.
inline std::uint64_t read_coded_number(BitReader& br) {
    std::uint64_t b0 = br.read_bits(8);
    if ((b0 & 0x80) == 0) return b0;
    unsigned cont = 0;
    for (std::uint64_t mask = 0x40; b0 & mask; mask >>= 1) ++cont;
    if (cont < 1 || cont > 6) throw DecodeError("FLAC: bad coded number");
    std::uint64_t v = b0 & (0x3Full >> cont);
    for (unsigned i = 0; i < cont; ++i) {
        std::uint64_t b = br.read_bits(8);
        if ((b & 0xC0) != 0x80) throw DecodeError("FLAC: bad coded number continuation");
        v = (v << 6) | (b & 0x3F);
    }
    return v;
}

inline void decode_residual(BitReader& br, unsigned predictor_order, std::uint32_t block_size,
                            std::vector<std::int64_t>& out) {
    const unsigned method = static_cast<unsigned>(br.read_bits(2));
    if (method > 1) throw DecodeError("FLAC: reserved residual coding method");
    const unsigned param_bits = method == 0 ? 4 : 5;
    const unsigned escape = method == 0 ? 0xF : 0x1F;
    const unsigned partition_order = static_cast<unsigned>(br.read_bits(4));
    const std::uint32_t partitions = 1u << partition_order;
    if (block_size % partitions != 0) throw DecodeError("FLAC: bad partition order");
    for (std::uint32_t p = 0; p < partitions; ++p) {
        std::uint32_t count = block_size >> partition_order;
        if (p == 0) {
            if (count < predictor_order) throw DecodeError("FLAC: partition shorter than predictor order");
            count -= predictor_order;
        }
        const unsigned param = static_cast<unsigned>(br.read_bits(param_bits));
        if (param == escape) {
            const unsigned raw_bits = static_cast<unsigned>(br.read_bits(5));
            for (std::uint32_t i = 0; i < count; ++i)
                out.push_back(raw_bits == 0 ? 0 : br.read_signed(raw_bits));
        } else {
            for (std::uint32_t i = 0; i < count; ++i) {
                const std::uint64_t q = br.read_unary();
                const std::uint64_t r = br.read_bits(param);
                const std::uint64_t zz = (q << param) | r;
                out.push_back(static_cast<std::int64_t>(zz >> 1) ^ -static_cast<std::int64_t>(zz & 1));
            }
        }
    }
}

inline std::vector<std::int64_t> decode_subframe(BitReader& br, std::uint32_t block_size, unsigned depth) {
    if (br.read_bits(1) != 0) throw DecodeError("FLAC: bad subframe padding bit");
    const unsigned type = static_cast<unsigned>(br.read_bits(6));
    unsigned wasted = 0;
    if (br.read_bits(1) == 1) wasted = static_cast<unsigned>(br.read_unary()) + 1;
    if (wasted >= depth) throw DecodeError("FLAC: wasted bits exceed sample depth");
    const unsigned eff = depth - wasted;

    std::vector<std::int64_t> samples;
    samples.reserve(block_size);

    if (type == 0) {  // CONSTANT
        const std::int64_t v = br.read_signed(eff);
        samples.assign(block_size, v);
    } else if (type == 1) {  // VERBATIM
        for (std::uint32_t i = 0; i < block_size; ++i) samples.push_back(br.read_signed(eff));
    } else if (type >= 8 && type <= 12) {  // FIXED, order 0..4
        const unsigned order = type - 8;
        for (unsigned i = 0; i < order; ++i) samples.push_back(br.read_signed(eff));
        std::vector<std::int64_t> residual;
        decode_residual(br, order, block_size, residual);
        for (std::size_t i = 0; i < residual.size(); ++i) {
            const std::size_t k = samples.size();
            std::int64_t pred = 0;
            switch (order) {
                case 0: pred = 0; break;
                case 1: pred = samples[k - 1]; break;
                case 2: pred = 2 * samples[k - 1] - samples[k - 2]; break;
                case 3: pred = 3 * samples[k - 1] - 3 * samples[k - 2] + samples[k - 3]; break;
                case 4:
                    pred = 4 * samples[k - 1] - 6 * samples[k - 2] + 4 * samples[k - 3] - samples[k - 4];
                    break;
                default: throw DecodeError("FLAC: bad fixed order");
            }
            samples.push_back(residual[i] + pred);
        }
    } else if (type >= 32) {  // LPC, order 1..32
        const unsigned order = (type & 0x1F) + 1;
        for (unsigned i = 0; i < order; ++i) samples.push_back(br.read_signed(eff));
        const unsigned precision = static_cast<unsigned>(br.read_bits(4)) + 1;
        if (precision == 16) throw DecodeError("FLAC: invalid LPC precision");
        const std::int64_t shift = br.read_signed(5);
        if (shift < 0) throw DecodeError("FLAC: negative LPC shift");
        std::vector<std::int64_t> coefs(order);
        for (unsigned i = 0; i < order; ++i) coefs[i] = br.read_signed(precision);
        std::vector<std::int64_t> residual;
        decode_residual(br, order, block_size, residual);
        for (std::size_t i = 0; i < residual.size(); ++i) {
            const std::size_t k = samples.size();
            std::int64_t acc = 0;
            for (unsigned j = 0; j < order; ++j) acc += coefs[j] * samples[k - 1 - j];
            samples.push_back(residual[i] + (acc >> shift));
        }
    } else {
        throw DecodeError("FLAC: reserved subframe type");
    }

    if (wasted > 0)
        for (auto& s : samples) s <<= wasted;
    return samples;
}

}  // namespace flac_detail

inline FlacStream decode_flac(const std::uint8_t* data, std::size_t size) {
    using namespace flac_detail;
    if (size < 4 || data[0] != 'f' || data[1] != 'L' || data[2] != 'a' || data[3] != 'C')
        throw DecodeError("not a FLAC stream");

    BitReader br(data, size);
    br.read_bits(32);  // magic

    FlacStream stream;
    bool last = false;
    while (!last) {
        last = br.read_bits(1) != 0;
        const unsigned block_type = static_cast<unsigned>(br.read_bits(7));
        const std::uint32_t length = static_cast<std::uint32_t>(br.read_bits(24));
        if (block_type == 0) {
            if (length != 34) throw DecodeError("FLAC: bad STREAMINFO length");
            br.read_bits(16);  // min block size
            br.read_bits(16);  // max block size
            br.read_bits(24);  // min frame size
            br.read_bits(24);  // max frame size
            stream.sample_rate = static_cast<std::uint32_t>(br.read_bits(20));
            stream.channels = static_cast<std::uint32_t>(br.read_bits(3)) + 1;
            stream.bits_per_sample = static_cast<std::uint32_t>(br.read_bits(5)) + 1;
            stream.total_samples = br.read_bits(36);
            for (int i = 0; i < 16; ++i) br.read_bits(8);  // MD5
        } else {
            for (std::uint32_t i = 0; i < length; ++i) br.read_bits(8);
        }
    }
    if (stream.sample_rate == 0 || stream.channels == 0)
        throw DecodeError("FLAC: missing STREAMINFO");

    stream.channel_samples.assign(stream.channels, {});

    static const std::uint32_t kRateTable[12] = {0,     88200, 176400, 192000, 8000,  16000,
                                                 22050, 24000, 32000,  44100,  48000, 96000};

    while (!br.eof()) {
        const std::size_t frame_start = br.byte_pos();
        const std::uint64_t sync = br.read_bits(14);
        if (sync != 0x3FFE) throw DecodeError("FLAC: lost frame sync");
        br.read_bits(1);  // reserved
        br.read_bits(1);  // blocking strategy
        const unsigned bs_code = static_cast<unsigned>(br.read_bits(4));
        const unsigned sr_code = static_cast<unsigned>(br.read_bits(4));
        const unsigned ch_code = static_cast<unsigned>(br.read_bits(4));
        const unsigned ss_code = static_cast<unsigned>(br.read_bits(3));
        br.read_bits(1);  // reserved
        read_coded_number(br);

        std::uint32_t block_size = 0;
        switch (bs_code) {
            case 0: throw DecodeError("FLAC: reserved block size code");
            case 1: block_size = 192; break;
            case 6: block_size = static_cast<std::uint32_t>(br.read_bits(8)) + 1; break;
            case 7: block_size = static_cast<std::uint32_t>(br.read_bits(16)) + 1; break;
            default:
                block_size = bs_code <= 5 ? 576u << (bs_code - 2) : 256u << (bs_code - 8);
                break;
        }
        if (sr_code == 12) br.read_bits(8);
        else if (sr_code == 13 || sr_code == 14) br.read_bits(16);
        else if (sr_code == 15) throw DecodeError("FLAC: invalid sample rate code");
        else if (sr_code != 0 && kRateTable[sr_code] != stream.sample_rate)
            throw DecodeError("FLAC: frame sample rate differs from STREAMINFO");

        unsigned bps = stream.bits_per_sample;
        switch (ss_code) {
            case 0: break;
            case 1: bps = 8; break;
            case 2: bps = 12; break;
            case 4: bps = 16; break;
            case 5: bps = 20; break;
            case 6: bps = 24; break;
            case 7: bps = 32; break;
            default: throw DecodeError("FLAC: reserved sample size code");
        }

        if (!br.byte_aligned()) throw DecodeError("FLAC: misaligned frame header");
        const std::size_t crc_pos = br.byte_pos();
        const std::uint8_t expect_crc8 = static_cast<std::uint8_t>(br.read_bits(8));
        if (crc8(data + frame_start, crc_pos - frame_start) != expect_crc8)
            throw DecodeError("FLAC: frame header CRC mismatch");

        unsigned nch = 0;
        enum class Stereo { none, left_side, right_side, mid_side } mode = Stereo::none;
        if (ch_code <= 7) {
            nch = ch_code + 1;
        } else if (ch_code == 8) {
            nch = 2;
            mode = Stereo::left_side;
        } else if (ch_code == 9) {
            nch = 2;
            mode = Stereo::right_side;
        } else if (ch_code == 10) {
            nch = 2;
            mode = Stereo::mid_side;
        } else {
            throw DecodeError("FLAC: reserved channel assignment");
        }
        if (nch != stream.channels)
            throw DecodeError("FLAC: frame channel count differs from STREAMINFO");

        std::vector<std::vector<std::int64_t>> sub(nch);
        for (unsigned c = 0; c < nch; ++c) {
            unsigned depth = bps;
            if ((mode == Stereo::left_side && c == 1) || (mode == Stereo::right_side && c == 0) ||
                (mode == Stereo::mid_side && c == 1))
                depth += 1;  // side channel carries one extra bit
            sub[c] = decode_subframe(br, block_size, depth);
        }
        br.align_to_byte();
        const std::size_t crc16_pos = br.byte_pos();
        const std::uint16_t expect_crc16 = static_cast<std::uint16_t>(br.read_bits(16));
        if (crc16(data + frame_start, crc16_pos - frame_start) != expect_crc16)
            throw DecodeError("FLAC: frame CRC mismatch");

        if (mode == Stereo::left_side) {
            for (std::uint32_t i = 0; i < block_size; ++i) sub[1][i] = sub[0][i] - sub[1][i];
        } else if (mode == Stereo::right_side) {
            for (std::uint32_t i = 0; i < block_size; ++i) sub[0][i] = sub[0][i] + sub[1][i];
        } else if (mode == Stereo::mid_side) {
            for (std::uint32_t i = 0; i < block_size; ++i) {
                std::int64_t mid = (sub[0][i] << 1) | (sub[1][i] & 1);
                const std::int64_t side = sub[1][i];
                sub[0][i] = (mid + side) >> 1;
                sub[1][i] = (mid - side) >> 1;
            }
        }
        for (unsigned c = 0; c < nch; ++c)
            stream.channel_samples[c].insert(stream.channel_samples[c].end(), sub[c].begin(), sub[c].end());

        // A final partial byte of padding cannot start another frame.
        if (size - br.byte_pos() < 2) break;
    }

    if (stream.total_samples != 0 && stream.channel_samples[0].size() < stream.total_samples)
        throw DecodeError("FLAC: stream ended before declared sample count");
    if (stream.total_samples != 0)
        for (auto& ch : stream.channel_samples) ch.resize(stream.total_samples);
    return stream;
}

}  // namespace mirsom
