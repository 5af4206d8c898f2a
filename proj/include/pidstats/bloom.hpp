#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pidstats {

/// Bit-array membership filter with double hashing: probe i uses
/// h1 + i*h2 mod m. Sized from a provisioned key count and target
/// false-positive rate; no false negatives ever.
class BloomFilter {
public:
    BloomFilter(uint64_t provisioned_n, double target_fpr, uint64_t seed = 0xb100f11eULL);

    void insert(std::string_view key);
    bool probe(std::string_view key) const;

    uint64_t bit_count() const { return m_; }
    uint32_t hash_count() const { return k_; }
    uint64_t seed() const { return seed_; }
    uint64_t inserted() const { return n_inserted_; }
    uint64_t provisioned() const { return provisioned_n_; }
    double target_fpr() const { return target_fpr_; }
    bool over_capacity() const { return n_inserted_ > provisioned_n_; }

    void save(std::ostream& out) const;
    static BloomFilter load(std::istream& in);
    void save_file(const std::string& path) const;
    static BloomFilter load_file(const std::string& path);

    // sizing formulas, exposed for verification
    static uint64_t bits_for(uint64_t n, double fpr);
    static uint32_t hashes_for(uint64_t m, uint64_t n);

private:
    BloomFilter() = default;

    uint64_t m_ = 0;
    uint32_t k_ = 0;
    uint64_t seed_ = 0;
    uint64_t n_inserted_ = 0;
    uint64_t provisioned_n_ = 0;
    double target_fpr_ = 0;
    std::vector<uint8_t> bits_;
};

}  // namespace pidstats
