#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pidstats {

/// HyperLogLog cardinality sketch. Registers hold the maximum leading-zero
/// rank seen for each of 2^precision hash buckets; merge is register-wise max,
/// so it is commutative, associative and idempotent.
class HllSketch {
public:
    static constexpr int kDefaultPrecision = 14;

    explicit HllSketch(int precision = kDefaultPrecision, uint64_t seed = 0x5eed5eedULL);

    void insert(std::string_view key);
    double estimate() const;
    void merge(const HllSketch& other);  // throws IncompatibleSketchParams on mismatch

    int precision() const { return precision_; }
    uint64_t seed() const { return seed_; }
    const std::vector<uint8_t>& registers() const { return regs_; }
    bool compatible(const HllSketch& other) const {
        return precision_ == other.precision_ && seed_ == other.seed_;
    }
    bool operator==(const HllSketch&) const = default;

    // base64 register payload for embedding in summary JSON
    std::string serialize_registers() const;
    static HllSketch deserialize(int precision, uint64_t seed, const std::string& b64_registers);

private:
    int precision_;
    uint64_t seed_;
    std::vector<uint8_t> regs_;
};

struct IncompatibleSketchParams : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string base64_encode(const std::vector<uint8_t>& data);
std::vector<uint8_t> base64_decode(const std::string& text);

}  // namespace pidstats
