#pragma once

// Minimal FLAC encoder for round-trip testing of the decoder. Supports
// 16/24-bit input, constant/verbatim/fixed/one LPC subframe shape, and the
// three stereo decorrelation modes. Not a general-purpose encoder.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace testsupport {

enum class FlacSubframeMode { auto_pick, verbatim, fixed1, fixed2, lpc2 };
enum class FlacStereoMode { independent, left_side, right_side, mid_side };

namespace flacw_detail {

class BitWriter {
public:
    void put_bit(unsigned b) {
        if (nbits_ == 0) bytes_.push_back(0);
        if (b) bytes_.back() |= static_cast<std::uint8_t>(1u << (7 - nbits_));
        nbits_ = (nbits_ + 1) % 8;
    }
    void write_bits(std::uint64_t v, unsigned n) {
        for (unsigned i = n; i-- > 0;) put_bit((v >> i) & 1u);
    }
    void write_signed(std::int64_t v, unsigned n) {
        write_bits(static_cast<std::uint64_t>(v) & ((1ull << n) - 1ull), n);
    }
    void write_unary(std::uint64_t q) {
        while (q--) put_bit(0);
        put_bit(1);
    }
    void align() { nbits_ = 0; }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
    unsigned nbits_ = 0;
};

inline std::uint8_t crc8(const std::uint8_t* data, std::size_t n) {
    std::uint8_t crc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        crc ^= data[i];
        for (int b = 0; b < 8; ++b) crc = static_cast<std::uint8_t>((crc & 0x80) ? (crc << 1) ^ 0x07 : crc << 1);
    }
    return crc;
}

inline std::uint16_t crc16(const std::uint8_t* data, std::size_t n) {
    std::uint16_t crc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        crc = static_cast<std::uint16_t>(crc ^ (static_cast<std::uint16_t>(data[i]) << 8));
        for (int b = 0; b < 8; ++b)
            crc = static_cast<std::uint16_t>((crc & 0x8000) ? (crc << 1) ^ 0x8005 : crc << 1);
    }
    return crc;
}

inline void write_coded_number(BitWriter& bw, std::uint64_t v) {
    if (v < 0x80) {
        bw.write_bits(v, 8);
        return;
    }
    unsigned cont = 1;
    while (cont < 6 && v >= (1ull << (5 * cont + 6))) ++cont;
    const std::uint8_t lead = static_cast<std::uint8_t>((0xFEu << (6 - cont)) & 0xFF);
    bw.write_bits(lead | ((v >> (6 * cont)) & (0x3Fu >> cont)), 8);
    for (unsigned i = cont; i-- > 0;) bw.write_bits(0x80u | ((v >> (6 * i)) & 0x3F), 8);
}

inline void write_rice_residual(BitWriter& bw, const std::vector<std::int64_t>& residual) {
    bw.write_bits(0, 2);  // 4-bit rice parameters
    bw.write_bits(0, 4);  // partition order 0
    std::uint64_t sum = 0;
    for (std::int64_t e : residual)
        sum += static_cast<std::uint64_t>(e >= 0 ? 2 * e : -2 * e - 1);
    unsigned k = 0;
    while (k < 14 && (static_cast<std::uint64_t>(residual.size()) << (k + 1)) < sum) ++k;
    bw.write_bits(k, 4);
    for (std::int64_t e : residual) {
        const std::uint64_t zz = static_cast<std::uint64_t>(e >= 0 ? 2 * e : -2 * e - 1);
        bw.write_unary(zz >> k);
        if (k > 0) bw.write_bits(zz & ((1ull << k) - 1), k);
    }
}

inline void write_subframe(BitWriter& bw, const std::vector<std::int64_t>& x, unsigned depth,
                           FlacSubframeMode mode) {
    bw.put_bit(0);  // padding
    FlacSubframeMode m = mode;
    if (m == FlacSubframeMode::auto_pick) {
        const bool constant =
            std::all_of(x.begin(), x.end(), [&](std::int64_t v) { return v == x[0]; });
        if (constant) {
            bw.write_bits(0, 6);  // CONSTANT
            bw.put_bit(0);        // no wasted bits
            bw.write_signed(x[0], depth);
            return;
        }
        m = FlacSubframeMode::fixed2;
    }
    unsigned order = 0;
    switch (m) {
        case FlacSubframeMode::verbatim: order = 0; break;
        case FlacSubframeMode::fixed1: order = 1; break;
        case FlacSubframeMode::fixed2:
        case FlacSubframeMode::lpc2: order = 2; break;
        default: order = 2; break;
    }
    if (x.size() <= order) m = FlacSubframeMode::verbatim;

    if (m == FlacSubframeMode::verbatim) {
        bw.write_bits(1, 6);
        bw.put_bit(0);
        for (std::int64_t v : x) bw.write_signed(v, depth);
        return;
    }

    std::vector<std::int64_t> residual;
    residual.reserve(x.size() - order);
    for (std::size_t i = order; i < x.size(); ++i) {
        std::int64_t pred = 0;
        if (order == 1) pred = x[i - 1];
        else pred = 2 * x[i - 1] - x[i - 2];
        residual.push_back(x[i] - pred);
    }

    if (m == FlacSubframeMode::lpc2) {
        bw.write_bits(32 + (order - 1), 6);
        bw.put_bit(0);
        for (unsigned i = 0; i < order; ++i) bw.write_signed(x[i], depth);
        bw.write_bits(15 - 1, 4);   // precision 15
        bw.write_signed(0, 5);      // shift 0
        bw.write_signed(2, 15);     // coef for x[i-1]
        bw.write_signed(-1, 15);    // coef for x[i-2]
    } else {
        bw.write_bits(8 + order, 6);
        bw.put_bit(0);
        for (unsigned i = 0; i < order; ++i) bw.write_signed(x[i], depth);
    }
    write_rice_residual(bw, residual);
}

}  // namespace flacw_detail

inline std::vector<std::uint8_t> encode_flac(const std::vector<std::vector<std::int64_t>>& channels,
                                             std::uint32_t sample_rate, unsigned bps = 16,
                                             std::uint32_t block_size = 4096,
                                             FlacSubframeMode mode = FlacSubframeMode::auto_pick,
                                             FlacStereoMode stereo = FlacStereoMode::independent) {
    using namespace flacw_detail;
    if (channels.empty() || channels[0].empty()) throw std::invalid_argument("encode_flac: no samples");
    if (stereo != FlacStereoMode::independent && channels.size() != 2)
        throw std::invalid_argument("encode_flac: stereo modes need exactly 2 channels");
    const std::uint64_t total = channels[0].size();

    BitWriter head;
    head.write_bits('f', 8);
    head.write_bits('L', 8);
    head.write_bits('a', 8);
    head.write_bits('C', 8);
    head.put_bit(1);           // last metadata block
    head.write_bits(0, 7);     // STREAMINFO
    head.write_bits(34, 24);
    head.write_bits(block_size, 16);
    head.write_bits(block_size, 16);
    head.write_bits(0, 24);
    head.write_bits(0, 24);
    head.write_bits(sample_rate, 20);
    head.write_bits(channels.size() - 1, 3);
    head.write_bits(bps - 1, 5);
    head.write_bits(total, 36);
    for (int i = 0; i < 16; ++i) head.write_bits(0, 8);  // MD5 unknown

    std::vector<std::uint8_t> out = head.bytes();

    std::uint64_t frame_no = 0;
    for (std::uint64_t pos = 0; pos < total; pos += block_size, ++frame_no) {
        const std::uint32_t bs = static_cast<std::uint32_t>(std::min<std::uint64_t>(block_size, total - pos));
        BitWriter fw;
        fw.write_bits(0x3FFE, 14);
        fw.put_bit(0);  // reserved
        fw.put_bit(0);  // fixed blocking
        fw.write_bits(7, 4);  // 16-bit block size at end of header
        fw.write_bits(0, 4);  // sample rate from STREAMINFO
        unsigned ch_code = static_cast<unsigned>(channels.size() - 1);
        if (stereo == FlacStereoMode::left_side) ch_code = 8;
        else if (stereo == FlacStereoMode::right_side) ch_code = 9;
        else if (stereo == FlacStereoMode::mid_side) ch_code = 10;
        fw.write_bits(ch_code, 4);
        fw.write_bits(bps == 16 ? 4u : 0u, 3);
        fw.put_bit(0);  // reserved
        write_coded_number(fw, frame_no);
        fw.write_bits(bs - 1, 16);
        fw.write_bits(crc8(fw.bytes().data(), fw.bytes().size()), 8);

        std::vector<std::vector<std::int64_t>> sub;
        std::vector<unsigned> depth;
        if (stereo == FlacStereoMode::independent) {
            for (const auto& ch : channels) {
                sub.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(pos),
                                 ch.begin() + static_cast<std::ptrdiff_t>(pos + bs));
                depth.push_back(bps);
            }
        } else {
            std::vector<std::int64_t> a(bs), b(bs);
            for (std::uint32_t i = 0; i < bs; ++i) {
                const std::int64_t l = channels[0][pos + i], r = channels[1][pos + i];
                if (stereo == FlacStereoMode::left_side) {
                    a[i] = l;
                    b[i] = l - r;
                } else if (stereo == FlacStereoMode::right_side) {
                    a[i] = l - r;
                    b[i] = r;
                } else {
                    a[i] = (l + r) >> 1;
                    b[i] = l - r;
                }
            }
            sub.push_back(std::move(a));
            sub.push_back(std::move(b));
            if (stereo == FlacStereoMode::left_side) depth = {bps, bps + 1};
            else if (stereo == FlacStereoMode::right_side) depth = {bps + 1, bps};
            else depth = {bps, bps + 1};
        }
        for (std::size_t c = 0; c < sub.size(); ++c) write_subframe(fw, sub[c], depth[c], mode);
        fw.align();
        fw.write_bits(crc16(fw.bytes().data(), fw.bytes().size()), 16);
        out.insert(out.end(), fw.bytes().begin(), fw.bytes().end());
    }
    return out;
}

inline void write_flac_file(const std::filesystem::path& path,
                            const std::vector<std::vector<std::int64_t>>& channels,
                            std::uint32_t sample_rate, unsigned bps = 16,
                            std::uint32_t block_size = 4096,
                            FlacSubframeMode mode = FlacSubframeMode::auto_pick,
                            FlacStereoMode stereo = FlacStereoMode::independent) {
    const auto bytes = encode_flac(channels, sample_rate, bps, block_size, mode, stereo);
    std::ofstream os(path, std::ios::binary);
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace testsupport
