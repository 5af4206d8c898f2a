#include "pidstats/tabulator.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>

#include "pidstats/hash.hpp"

using nlohmann::json;

namespace pidstats {

void FrequencyTable::add_page(const std::map<std::string, uint64_t>& page_tokens) {
    for (const auto& [key, tokens] : page_tokens) {
        if (tokens == 0)
            continue;
        Counts& c = entries_[key];
        c.tokens += tokens;
        c.docs += 1;
    }
}

void FrequencyTable::merge(const FrequencyTable& other) {
    for (const auto& [key, counts] : other.entries_) {
        Counts& c = entries_[key];
        c.tokens += counts.tokens;
        c.docs += counts.docs;
    }
}

Counts FrequencyTable::at_or_zero(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? Counts{} : it->second;
}

ShardSummary::ShardSummary() : ShardSummary(HllSketch::kDefaultPrecision, 0x5eed5eedULL) {}

ShardSummary::ShardSummary(int hll_precision, uint64_t hll_seed)
    : page_digest_sketch(hll_precision, hll_seed), uri_sketch(hll_precision, hll_seed) {}

std::string pid_table_key(SchemeClass cls, const std::string& pid) {
    return to_string(cls) + " " + pid;
}

std::optional<std::pair<SchemeClass, std::string>> parse_pid_table_key(const std::string& key) {
    size_t space = key.find(' ');
    if (space == std::string::npos)
        return std::nullopt;
    auto cls = scheme_class_from_string(key.substr(0, space));
    if (!cls)
        return std::nullopt;
    return std::make_pair(*cls, key.substr(space + 1));
}

void tally_error(ShardSummary& summary, const std::string& kind, uint64_t n) {
    if (n > 0)
        summary.error_tallies[kind] += n;
}

void tabulate_page(ShardSummary& summary, const PageEnvelope& envelope,
                   const ResolverWatchList& watch_list, const BloomFilter* locating_filter) {
    summary.pages += 1;
    if (locating_filter)
        summary.has_locating = true;

    HostPredicate resolver_pred = watch_list.predicate();
    NormalizedUri target = normalize(envelope.target_uri, resolver_pred);

    // page-local token counts; folding them in at the end gives each key at
    // most one document increment per page
    std::map<std::string, uint64_t> crawled_scheme, link_scheme, hosts, content_types, resolvers,
        pids, meta_names, locating;

    crawled_scheme[scheme_of(target)] += 1;
    hosts[target.host ? *target.host : "(none)"] += 1;
    if (envelope.content_type)
        content_types[*envelope.content_type] += 1;

    for (const LinkEntry& link : envelope.body_links) {
        NormalizedUri uri = normalize(link.url, resolver_pred);
        link_scheme[scheme_of(uri)] += 1;
        auto obs = classify(uri, PidSource::BodyLink, watch_list, locating_filter);
        if (!obs) {
            if (uri.host && watch_list.contains(*uri.host))
                tally_error(summary, "empty_pid");
            continue;
        }
        switch (obs->form) {
        case PidForm::Actionable:
            resolvers[*obs->resolver_host] += 1;
            pids[pid_table_key(obs->scheme_class, obs->pid)] += 1;
            break;
        case PidForm::Original:
            summary.original_form_counts.body_links += 1;
            pids[pid_table_key(obs->scheme_class, obs->pid)] += 1;
            break;
        case PidForm::Locating:
            locating[obs->pid] += 1;
            break;
        }
    }

    for (const HeadLinkEntry& entry : envelope.head_links) {
        if (auto obs = scan_head_link(entry)) {
            summary.original_form_counts.head_links += 1;
            pids[pid_table_key(obs->scheme_class, obs->pid)] += 1;
        }
    }

    for (const HeadMetaEntry& entry : envelope.head_metas) {
        if (auto obs = scan_head_meta(entry)) {
            summary.original_form_counts.head_metas += 1;
            pids[pid_table_key(obs->scheme_class, obs->pid)] += 1;
            meta_names[obs->meta_name ? *obs->meta_name : "(none)"] += 1;
        }
    }

    summary.crawled_scheme_table.add_page(crawled_scheme);
    summary.link_scheme_table.add_page(link_scheme);
    summary.host_table.add_page(hosts);
    summary.content_type_table.add_page(content_types);
    summary.resolver_table.add_page(resolvers);
    summary.pid_table.add_page(pids);
    summary.meta_name_table.add_page(meta_names);
    summary.locating_table.add_page(locating);

    tally_error(summary, "malformed_link_entry", envelope.malformed_links);

    summary.uri_sketch.insert(recompose(target));
    if (envelope.payload_digest) {
        summary.page_digest_sketch.insert(*envelope.payload_digest);
    } else {
        // WAT carries no raw content; fall back to a proxy digest over the
        // link serialization, labeled as such in reports
        uint64_t h = hash64(envelope.target_uri, 0x9d1937ULL);
        for (const LinkEntry& link : envelope.body_links)
            h = mix64(h ^ hash64(link.url, 0x9d1937ULL));
        char buf[32];
        std::snprintf(buf, sizeof buf, "proxy:%016llx", (unsigned long long)h);
        summary.page_digest_sketch.insert(buf);
    }
}

ShardSummary merge(const ShardSummary& a, const ShardSummary& b) {
    if (!a.page_digest_sketch.compatible(b.page_digest_sketch) ||
        !a.uri_sketch.compatible(b.uri_sketch))
        throw IncompatibleSketchParams("cannot merge summaries with different sketch params");

    ShardSummary out = a;
    out.pages += b.pages;
    out.crawled_scheme_table.merge(b.crawled_scheme_table);
    out.link_scheme_table.merge(b.link_scheme_table);
    out.host_table.merge(b.host_table);
    out.content_type_table.merge(b.content_type_table);
    out.resolver_table.merge(b.resolver_table);
    out.pid_table.merge(b.pid_table);
    out.meta_name_table.merge(b.meta_name_table);
    out.locating_table.merge(b.locating_table);
    out.has_locating = a.has_locating || b.has_locating;
    out.original_form_counts.body_links += b.original_form_counts.body_links;
    out.original_form_counts.head_links += b.original_form_counts.head_links;
    out.original_form_counts.head_metas += b.original_form_counts.head_metas;
    for (const auto& [kind, n] : b.error_tallies)
        out.error_tallies[kind] += n;
    out.page_digest_sketch.merge(b.page_digest_sketch);
    out.uri_sketch.merge(b.uri_sketch);
    return out;
}

bool summaries_equal(const ShardSummary& a, const ShardSummary& b) {
    return a.pages == b.pages && a.crawled_scheme_table == b.crawled_scheme_table &&
           a.link_scheme_table == b.link_scheme_table && a.host_table == b.host_table &&
           a.content_type_table == b.content_type_table &&
           a.resolver_table == b.resolver_table && a.pid_table == b.pid_table &&
           a.meta_name_table == b.meta_name_table && a.locating_table == b.locating_table &&
           a.has_locating == b.has_locating &&
           a.original_form_counts == b.original_form_counts &&
           a.error_tallies == b.error_tallies &&
           a.page_digest_sketch == b.page_digest_sketch && a.uri_sketch == b.uri_sketch;
}

OverlapMatrix overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
    OverlapMatrix m;
    for (const auto& k : a) {
        if (b.count(k))
            ++m.both;
        else
            ++m.only_a;
    }
    for (const auto& k : b)
        if (!a.count(k))
            ++m.only_b;
    return m;
}

std::set<std::string> pid_keys(const ShardSummary& summary) {
    std::set<std::string> keys;
    for (const auto& [key, counts] : summary.pid_table.entries())
        keys.insert(key);
    return keys;
}

namespace {

json table_to_json(const FrequencyTable& table) {
    json obj = json::object();
    for (const auto& [key, counts] : table.entries())
        obj[key] = json::array({counts.tokens, counts.docs});
    return obj;
}

FrequencyTable table_from_json(const json& obj) {
    FrequencyTable table;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        Counts c{it.value()[0].get<uint64_t>(), it.value()[1].get<uint64_t>()};
        table.entries()[it.key()] = c;
    }
    return table;
}

}  // namespace

std::string serialize_summary(const ShardSummary& s) {
    json doc;
    doc["schema_version"] = 1;
    doc["pages"] = s.pages;
    doc["sketch_params"] = {{"precision", s.page_digest_sketch.precision()},
                            {"seed", s.page_digest_sketch.seed()}};
    doc["tables"] = {
        {"crawled_scheme", table_to_json(s.crawled_scheme_table)},
        {"link_scheme", table_to_json(s.link_scheme_table)},
        {"host", table_to_json(s.host_table)},
        {"content_type", table_to_json(s.content_type_table)},
        {"resolver", table_to_json(s.resolver_table)},
        {"pid", table_to_json(s.pid_table)},
        {"meta_name", table_to_json(s.meta_name_table)},
        {"locating", table_to_json(s.locating_table)},
    };
    doc["has_locating"] = s.has_locating;
    doc["original_form_counts"] = {{"body_links", s.original_form_counts.body_links},
                                   {"head_links", s.original_form_counts.head_links},
                                   {"head_metas", s.original_form_counts.head_metas}};
    doc["error_tallies"] = s.error_tallies;
    doc["sketches"] = {{"page_digests", s.page_digest_sketch.serialize_registers()},
                       {"uris", s.uri_sketch.serialize_registers()}};
    return doc.dump();
}

ShardSummary deserialize_summary(const std::string& text) {
    json doc = json::parse(text);
    if (doc.at("schema_version").get<int>() != 1)
        throw std::runtime_error("unsupported summary schema version");
    int precision = doc.at("sketch_params").at("precision").get<int>();
    uint64_t seed = doc.at("sketch_params").at("seed").get<uint64_t>();

    ShardSummary s(precision, seed);
    s.pages = doc.at("pages").get<uint64_t>();
    const json& tables = doc.at("tables");
    s.crawled_scheme_table = table_from_json(tables.at("crawled_scheme"));
    s.link_scheme_table = table_from_json(tables.at("link_scheme"));
    s.host_table = table_from_json(tables.at("host"));
    s.content_type_table = table_from_json(tables.at("content_type"));
    s.resolver_table = table_from_json(tables.at("resolver"));
    s.pid_table = table_from_json(tables.at("pid"));
    s.meta_name_table = table_from_json(tables.at("meta_name"));
    s.locating_table = table_from_json(tables.at("locating"));
    s.has_locating = doc.at("has_locating").get<bool>();
    const json& of = doc.at("original_form_counts");
    s.original_form_counts.body_links = of.at("body_links").get<uint64_t>();
    s.original_form_counts.head_links = of.at("head_links").get<uint64_t>();
    s.original_form_counts.head_metas = of.at("head_metas").get<uint64_t>();
    for (auto it = doc.at("error_tallies").begin(); it != doc.at("error_tallies").end(); ++it)
        s.error_tallies[it.key()] = it.value().get<uint64_t>();
    s.page_digest_sketch = HllSketch::deserialize(
        precision, seed, doc.at("sketches").at("page_digests").get<std::string>());
    s.uri_sketch =
        HllSketch::deserialize(precision, seed, doc.at("sketches").at("uris").get<std::string>());
    return s;
}

void save_summary(const ShardSummary& summary, const std::string& path) {
    std::string gz = gzip_compress(serialize_summary(summary));
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out.write(gz.data(), std::streamsize(gz.size()));
    if (!out)
        throw std::runtime_error("write failed for " + path);
}

ShardSummary load_summary(const std::string& path) {
    return deserialize_summary(gzip_decompress_file(path));
}

}  // namespace pidstats
