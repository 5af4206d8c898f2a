#include "pidstats/bloom.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "pidstats/hash.hpp"

namespace pidstats {

namespace {
constexpr char kMagic[8] = {'P', 'I', 'D', 'B', 'L', 'M', 'F', '1'};
constexpr uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
    // little-endian on all supported targets
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in)
        throw std::runtime_error("truncated bloom filter stream");
    return v;
}
}  // namespace

uint64_t BloomFilter::bits_for(uint64_t n, double fpr) {
    const double ln2 = std::log(2.0);
    return uint64_t(std::ceil(-double(n) * std::log(fpr) / (ln2 * ln2)));
}

uint32_t BloomFilter::hashes_for(uint64_t m, uint64_t n) {
    uint32_t k = uint32_t(std::lround(double(m) / double(n) * std::log(2.0)));
    return k == 0 ? 1 : k;
}

BloomFilter::BloomFilter(uint64_t provisioned_n, double target_fpr, uint64_t seed) {
    if (provisioned_n == 0)
        throw std::invalid_argument("bloom filter needs provisioned_n > 0");
    if (!(target_fpr > 0.0 && target_fpr < 1.0))
        throw std::invalid_argument("bloom filter target_fpr must be in (0,1)");
    provisioned_n_ = provisioned_n;
    target_fpr_ = target_fpr;
    seed_ = seed;
    m_ = bits_for(provisioned_n, target_fpr);
    k_ = hashes_for(m_, provisioned_n);
    bits_.assign((m_ + 7) / 8, 0);
}

void BloomFilter::insert(std::string_view key) {
    uint64_t h1 = hash64(key, seed_);
    uint64_t h2 = hash64(key, seed_ ^ 0xdeadbeefcafef00dULL) | 1;
    for (uint32_t i = 0; i < k_; ++i) {
        uint64_t bit = (h1 + uint64_t(i) * h2) % m_;
        bits_[bit >> 3] |= uint8_t(1u << (bit & 7));
    }
    ++n_inserted_;
}

bool BloomFilter::probe(std::string_view key) const {
    uint64_t h1 = hash64(key, seed_);
    uint64_t h2 = hash64(key, seed_ ^ 0xdeadbeefcafef00dULL) | 1;
    for (uint32_t i = 0; i < k_; ++i) {
        uint64_t bit = (h1 + uint64_t(i) * h2) % m_;
        if (!(bits_[bit >> 3] & (1u << (bit & 7))))
            return false;
    }
    return true;
}

void BloomFilter::save(std::ostream& out) const {
    out.write(kMagic, sizeof kMagic);
    put(out, kVersion);
    put(out, m_);
    put(out, k_);
    put(out, seed_);
    put(out, n_inserted_);
    put(out, provisioned_n_);
    put(out, target_fpr_);
    out.write(reinterpret_cast<const char*>(bits_.data()), std::streamsize(bits_.size()));
    if (!out)
        throw std::runtime_error("bloom filter write failed");
}

BloomFilter BloomFilter::load(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("not a bloom filter file");
    if (get<uint32_t>(in) != kVersion)
        throw std::runtime_error("unsupported bloom filter version");
    BloomFilter f;
    f.m_ = get<uint64_t>(in);
    f.k_ = get<uint32_t>(in);
    f.seed_ = get<uint64_t>(in);
    f.n_inserted_ = get<uint64_t>(in);
    f.provisioned_n_ = get<uint64_t>(in);
    f.target_fpr_ = get<double>(in);
    f.bits_.resize((f.m_ + 7) / 8);
    in.read(reinterpret_cast<char*>(f.bits_.data()), std::streamsize(f.bits_.size()));
    if (!in)
        throw std::runtime_error("truncated bloom filter bit array");
    return f;
}

void BloomFilter::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    save(out);
}

BloomFilter BloomFilter::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path);
    return load(in);
}

}  // namespace pidstats
