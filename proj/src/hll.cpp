#include "pidstats/hll.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "pidstats/hash.hpp"

namespace pidstats {

HllSketch::HllSketch(int precision, uint64_t seed) : precision_(precision), seed_(seed) {
    if (precision < 4 || precision > 18)
        throw std::invalid_argument("HLL precision must be in [4,18]");
    regs_.assign(size_t(1) << precision, 0);
}

void HllSketch::insert(std::string_view key) {
    uint64_t h = hash64(key, seed_);
    size_t idx = h >> (64 - precision_);
    uint64_t rest = h << precision_;
    // rank = leading zeros of the remaining bits, plus one
    uint8_t rank = rest == 0 ? uint8_t(64 - precision_ + 1)
                             : uint8_t(std::countl_zero(rest) + 1);
    if (rank > regs_[idx])
        regs_[idx] = rank;
}

double HllSketch::estimate() const {
    const double m = double(regs_.size());
    double alpha;
    if (regs_.size() >= 128)
        alpha = 0.7213 / (1.0 + 1.079 / m);
    else if (regs_.size() == 64)
        alpha = 0.709;
    else if (regs_.size() == 32)
        alpha = 0.697;
    else
        alpha = 0.673;

    double inv_sum = 0.0;
    size_t zeros = 0;
    for (uint8_t r : regs_) {
        inv_sum += std::ldexp(1.0, -int(r));
        if (r == 0)
            ++zeros;
    }
    double raw = alpha * m * m / inv_sum;
    if (raw <= 2.5 * m && zeros > 0)
        return m * std::log(m / double(zeros));  // linear counting for small range
    return raw;
}

void HllSketch::merge(const HllSketch& other) {
    if (!compatible(other))
        throw IncompatibleSketchParams("HLL precision/seed mismatch in merge");
    for (size_t i = 0; i < regs_.size(); ++i)
        if (other.regs_[i] > regs_[i])
            regs_[i] = other.regs_[i];
}

std::string HllSketch::serialize_registers() const {
    return base64_encode(regs_);
}

HllSketch HllSketch::deserialize(int precision, uint64_t seed, const std::string& b64) {
    HllSketch s(precision, seed);
    auto regs = base64_decode(b64);
    if (regs.size() != s.regs_.size())
        throw std::runtime_error("HLL register payload size mismatch");
    s.regs_ = std::move(regs);
    return s;
}

static const char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<uint8_t>& data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= data.size(); i += 3) {
        uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out += kB64[(v >> 18) & 63];
        out += kB64[(v >> 12) & 63];
        out += kB64[(v >> 6) & 63];
        out += kB64[v & 63];
    }
    size_t rem = data.size() - i;
    if (rem == 1) {
        uint32_t v = data[i] << 16;
        out += kB64[(v >> 18) & 63];
        out += kB64[(v >> 12) & 63];
        out += "==";
    } else if (rem == 2) {
        uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
        out += kB64[(v >> 18) & 63];
        out += kB64[(v >> 12) & 63];
        out += kB64[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::vector<uint8_t> base64_decode(const std::string& text) {
    int8_t rev[256];
    for (int i = 0; i < 256; ++i)
        rev[i] = -1;
    for (int i = 0; i < 64; ++i)
        rev[uint8_t(kB64[i])] = int8_t(i);

    std::vector<uint8_t> out;
    uint32_t acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n' || c == '\r')
            continue;
        int8_t v = rev[uint8_t(c)];
        if (v < 0)
            throw std::runtime_error("invalid base64 character");
        acc = (acc << 6) | uint32_t(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(uint8_t((acc >> bits) & 0xff));
        }
    }
    return out;
}

}  // namespace pidstats
