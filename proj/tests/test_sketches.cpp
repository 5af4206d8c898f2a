#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "pidstats/bloom.hpp"
#include "pidstats/hll.hpp"

using namespace pidstats;

TEST_CASE("hll: empty sketch estimates zero") {
    HllSketch sketch;
    CHECK(sketch.estimate() == doctest::Approx(0.0));
}

TEST_CASE("hll: insertion is idempotent") {
    HllSketch once, many;
    for (int i = 0; i < 500; ++i) {
        std::string key = "key-" + std::to_string(i);
        once.insert(key);
        for (int r = 0; r < 5; ++r)
            many.insert(key);
    }
    CHECK(once == many);
}

TEST_CASE("hll: estimate within 3% at 100k") {
    HllSketch sketch;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        sketch.insert("item/" + std::to_string(i));
    CHECK(std::abs(sketch.estimate() - n) / n < 0.03);
}

TEST_CASE("hll: merge of disjoint halves approximates the union") {
    HllSketch a, b;
    const int n = 20000;
    for (int i = 0; i < n; ++i)
        a.insert("left-" + std::to_string(i));
    for (int i = 0; i < n; ++i)
        b.insert("right-" + std::to_string(i));
    HllSketch both = a;
    both.merge(b);
    CHECK(std::abs(both.estimate() - 2 * n) / (2 * n) < 0.03);
    // merge with overlap never exceeds the sum and is idempotent
    HllSketch again = both;
    again.merge(a);
    CHECK(again == both);
}

TEST_CASE("hll: merge order does not matter") {
    HllSketch a(14, 1), b(14, 1), c(14, 1);
    for (int i = 0; i < 3000; ++i)
        (i % 3 == 0 ? a : i % 3 == 1 ? b : c).insert(std::to_string(i * i));
    HllSketch left = a;
    left.merge(b);
    left.merge(c);
    HllSketch right = c;
    right.merge(a);
    right.merge(b);
    CHECK(left == right);
}

TEST_CASE("hll: incompatible parameters refuse to merge") {
    HllSketch p14(14, 1), p12(12, 1), other_seed(14, 2);
    CHECK_THROWS_AS(p14.merge(p12), IncompatibleSketchParams);
    CHECK_THROWS_AS(p14.merge(other_seed), IncompatibleSketchParams);
}

TEST_CASE("hll: register serialization round trips") {
    HllSketch sketch(14, 42);
    for (int i = 0; i < 10000; ++i)
        sketch.insert("uri:" + std::to_string(i));
    HllSketch back = HllSketch::deserialize(14, 42, sketch.serialize_registers());
    CHECK(back == sketch);
    CHECK(back.estimate() == sketch.estimate());
}

TEST_CASE("base64 helpers") {
    std::vector<uint8_t> data{0, 1, 2, 250, 251, 252, 253, 254, 255};
    CHECK(base64_decode(base64_encode(data)) == data);
    CHECK(base64_encode({}) == "");
}

TEST_CASE("bloom: sizing formulas match the standard optima") {
    // m = ceil(-n ln p / (ln 2)^2), k = round(m/n ln 2)
    CHECK(BloomFilter::bits_for(1000000, 1e-4) == 19170117);
    CHECK(BloomFilter::hashes_for(19170117, 1000000) == 13);
    CHECK(BloomFilter::bits_for(1000, 0.01) == 9586);
    CHECK(BloomFilter::hashes_for(9586, 1000) == 7);
}

TEST_CASE("bloom: empty filter has no members") {
    BloomFilter filter(1000, 1e-3);
    CHECK_FALSE(filter.probe("anything"));
    CHECK(filter.inserted() == 0);
}

TEST_CASE("bloom: no false negatives") {
    BloomFilter filter(5000, 1e-4);
    for (int i = 0; i < 5000; ++i)
        filter.insert("member-" + std::to_string(i));
    for (int i = 0; i < 5000; ++i)
        CHECK(filter.probe("member-" + std::to_string(i)));
    CHECK(filter.inserted() == 5000);
    CHECK_FALSE(filter.over_capacity());
    filter.insert("one more");
    CHECK(filter.over_capacity());
}

TEST_CASE("bloom: false-positive rate near the target") {
    BloomFilter filter(20000, 1e-3);
    for (int i = 0; i < 20000; ++i)
        filter.insert("in/" + std::to_string(i));
    int fp = 0;
    const int probes = 100000;
    for (int i = 0; i < probes; ++i)
        if (filter.probe("out/" + std::to_string(i)))
            ++fp;
    CHECK(double(fp) / probes <= 2e-3);
}

TEST_CASE("bloom: serialization is probe-identical") {
    BloomFilter filter(2000, 1e-4, 99);
    for (int i = 0; i < 1500; ++i)
        filter.insert("key" + std::to_string(i * 7));
    std::ostringstream out;
    filter.save(out);
    std::istringstream in(out.str());
    BloomFilter back = BloomFilter::load(in);
    CHECK(back.bit_count() == filter.bit_count());
    CHECK(back.hash_count() == filter.hash_count());
    CHECK(back.seed() == filter.seed());
    CHECK(back.inserted() == filter.inserted());
    for (int i = 0; i < 3000; ++i) {
        std::string key = "key" + std::to_string(i);
        CHECK(back.probe(key) == filter.probe(key));
    }

    std::string path = "bloom_test.filter";
    filter.save_file(path);
    BloomFilter from_file = BloomFilter::load_file(path);
    CHECK(from_file.probe("key7"));
    std::remove(path.c_str());
}

TEST_CASE("bloom: truncated file rejected") {
    BloomFilter filter(100, 1e-3);
    std::ostringstream out;
    filter.save(out);
    std::istringstream in(out.str().substr(0, 10));
    CHECK_THROWS(BloomFilter::load(in));
}
