#include "pidstats/crawl_stats.hpp"

#include <cmath>
#include <stdexcept>

namespace pidstats {

double round_display(double value, int decimals) {
    double scale = std::pow(10.0, decimals);
    return std::round(value * scale) / scale;
}

CrawlStats compute_crawl_stats(uint64_t uris_crawled, uint64_t pages_retrieved,
                               uint64_t distinct_digests) {
    if (pages_retrieved == 0)
        throw std::invalid_argument("pages_retrieved must be positive");
    CrawlStats stats;
    stats.uris_crawled = uris_crawled;
    stats.pages_retrieved = pages_retrieved;
    stats.distinct_digests = distinct_digests;
    double dup_uri = 1.0 - double(uris_crawled) / double(pages_retrieved);
    double dup_pages = 1.0 - double(distinct_digests) / double(pages_retrieved);
    stats.dup_uri_pct = 100.0 * (dup_uri > 0.0 ? dup_uri : 0.0);
    stats.dup_pages_pct = 100.0 * (dup_pages > 0.0 ? dup_pages : 0.0);
    return stats;
}

}  // namespace pidstats
