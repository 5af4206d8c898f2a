#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "pidstats/bloom.hpp"
#include "pidstats/classifier.hpp"
#include "pidstats/hll.hpp"
#include "pidstats/wat_reader.hpp"

namespace pidstats {

struct Counts {
    uint64_t tokens = 0;
    uint64_t docs = 0;
    bool operator==(const Counts&) const = default;
};

/// Key -> (token count, document count). Distinct-key count is the type
/// frequency; docs never exceeds tokens.
class FrequencyTable {
public:
    /// Fold one page's local token counts in; each key's doc count goes up by
    /// exactly one regardless of token multiplicity.
    void add_page(const std::map<std::string, uint64_t>& page_tokens);
    void merge(const FrequencyTable& other);

    const std::map<std::string, Counts>& entries() const { return entries_; }
    std::map<std::string, Counts>& entries() { return entries_; }
    uint64_t type_count() const { return entries_.size(); }
    Counts at_or_zero(const std::string& key) const;
    bool operator==(const FrequencyTable&) const = default;

private:
    std::map<std::string, Counts> entries_;
};

/// Every counter for one WAT shard; merge is associative and commutative with
/// the default-constructed summary as identity, so shard results combine into
/// release results in any order.
struct ShardSummary {
    uint64_t pages = 0;
    FrequencyTable crawled_scheme_table;
    FrequencyTable link_scheme_table;
    FrequencyTable host_table;
    FrequencyTable content_type_table;
    FrequencyTable resolver_table;
    FrequencyTable pid_table;  // key = "<class> <pid>"
    FrequencyTable meta_name_table;
    FrequencyTable locating_table;
    bool has_locating = false;

    struct OriginalFormCounts {
        uint64_t body_links = 0;
        uint64_t head_links = 0;
        uint64_t head_metas = 0;
        bool operator==(const OriginalFormCounts&) const = default;
    } original_form_counts;

    std::map<std::string, uint64_t> error_tallies;

    HllSketch page_digest_sketch;
    HllSketch uri_sketch;

    ShardSummary();
    explicit ShardSummary(int hll_precision, uint64_t hll_seed);
};

std::string pid_table_key(SchemeClass cls, const std::string& pid);
std::optional<std::pair<SchemeClass, std::string>> parse_pid_table_key(const std::string& key);

/// Fold one extracted page into the summary.
void tabulate_page(ShardSummary& summary, const PageEnvelope& envelope,
                   const ResolverWatchList& watch_list,
                   const BloomFilter* locating_filter = nullptr);

void tally_error(ShardSummary& summary, const std::string& kind, uint64_t n = 1);

/// Summed tables and sketches. Throws IncompatibleSketchParams when the two
/// summaries use different HLL parameters.
ShardSummary merge(const ShardSummary& a, const ShardSummary& b);

bool summaries_equal(const ShardSummary& a, const ShardSummary& b);

struct OverlapMatrix {
    uint64_t both = 0;
    uint64_t only_a = 0;
    uint64_t only_b = 0;
};

OverlapMatrix overlap(const std::set<std::string>& a, const std::set<std::string>& b);
std::set<std::string> pid_keys(const ShardSummary& summary);

/// Self-describing gzip-compressed JSON, bit-exact round trip.
std::string serialize_summary(const ShardSummary& summary);
ShardSummary deserialize_summary(const std::string& json_text);
void save_summary(const ShardSummary& summary, const std::string& path);
ShardSummary load_summary(const std::string& path);

}  // namespace pidstats
