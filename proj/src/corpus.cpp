#include "pidstats/corpus.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "pidstats/byte_source.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace pidstats {

namespace {

Planting::Kind kind_from_string(const std::string& s) {
    if (s == "actionable")
        return Planting::Kind::Actionable;
    if (s == "original-body")
        return Planting::Kind::OriginalBody;
    if (s == "head-meta")
        return Planting::Kind::HeadMeta;
    if (s == "head-link")
        return Planting::Kind::HeadLink;
    if (s == "locating")
        return Planting::Kind::Locating;
    throw InvalidSpec("unknown planting kind '" + s + "'");
}

// Straight string surgery over the *clean* spelling; deliberately independent
// of the normalizer and classifier so the manifest is a real oracle.
struct CleanParts {
    std::string scheme;   // lowercase
    std::string host;     // empty for original forms
    std::string pid;      // canonical PID, empty for locating/non-PID
    std::string cls;      // "DOI" / "Handle" / "Other"
};

std::string oracle_class_of_host(const std::string& host) {
    if (host == "doi.org" || host == "dx.doi.org" || host == "dx.medra.org")
        return "DOI";
    if (host == "hdl.handle.net")
        return "Handle";
    if (host == "n2t.net")
        return "Other";
    return "";
}

CleanParts dissect_clean(const std::string& value) {
    CleanParts parts;
    size_t scheme_end = value.find(':');
    if (scheme_end == std::string::npos)
        throw InvalidSpec("planting value needs a scheme: " + value);
    parts.scheme = value.substr(0, scheme_end);
    for (char& c : parts.scheme)
        c = char(std::tolower(static_cast<unsigned char>(c)));

    std::string rest = value.substr(scheme_end + 1);
    if (rest.rfind("//", 0) == 0) {
        rest = rest.substr(2);
        size_t slash = rest.find('/');
        parts.host = slash == std::string::npos ? rest : rest.substr(0, slash);
        std::string path = slash == std::string::npos ? "" : rest.substr(slash + 1);
        size_t q = path.find('?');
        if (q != std::string::npos)
            path = path.substr(0, q);
        parts.cls = oracle_class_of_host(parts.host);
        if (!parts.cls.empty())
            parts.pid = path;
    } else if (parts.scheme == "doi") {
        parts.pid = rest;
        parts.cls = "DOI";
    } else if (parts.scheme == "info") {
        if (rest.rfind("hdl/", 0) == 0) {
            parts.pid = rest.substr(4);
            parts.cls = "Handle";
        } else if (rest.rfind("doi/", 0) == 0) {
            parts.pid = rest.substr(4);
            parts.cls = "DOI";
        }
    }
    return parts;
}

// Re-encode a clean spelling so the scan has real work to do: random case in
// scheme/host, embedded whitespace, one percent-escape, entity-encoded
// ampersands. Everything chosen normalizes back to the clean form.
std::string obfuscate(const std::string& clean, std::mt19937_64& rng, bool aggressive_decode) {
    std::string s = clean;

    size_t path_start = s.size();
    size_t scheme_end = s.find(':');
    if (scheme_end != std::string::npos) {
        if (s.compare(scheme_end + 1, 2, "//") == 0) {
            size_t slash = s.find('/', scheme_end + 3);
            // never touch the authority/path separator itself: encoding it
            // would swallow the path into the host
            path_start = slash == std::string::npos ? s.size() : slash + 1;
        } else {
            path_start = scheme_end + 1;
        }
    }

    auto chance = [&](int pct) { return int(rng() % 100) < pct; };

    if (chance(60)) {  // case flips before the path (normalized by lowercasing)
        for (size_t i = 0; i < path_start; ++i)
            if (std::islower(static_cast<unsigned char>(s[i])) && chance(30))
                s[i] = char(std::toupper(static_cast<unsigned char>(s[i])));
    }

    if (chance(70)) {  // percent-encode one character in the path
        std::vector<size_t> candidates;
        for (size_t i = path_start; i < s.size(); ++i) {
            unsigned char c = static_cast<unsigned char>(s[i]);
            bool unreserved = std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~';
            if (unreserved || (aggressive_decode && c == '/'))
                candidates.push_back(i);
        }
        if (!candidates.empty()) {
            size_t pos = candidates[rng() % candidates.size()];
            static const char* hex = "0123456789ABCDEF";
            unsigned char c = static_cast<unsigned char>(s[pos]);
            std::string esc = {'%', hex[c >> 4], hex[c & 15]};
            s = s.substr(0, pos) + esc + s.substr(pos + 1);
        }
    }

    if (chance(60)) {  // entity-encode an ampersand
        size_t amp = s.find('&');
        if (amp != std::string::npos)
            s = s.substr(0, amp) + "&amp;" + s.substr(amp + 1);
    }

    {  // always embed whitespace somewhere
        static const char* ws[] = {"\n", "\t", " ", "\r\n"};
        int inserts = 1 + int(rng() % 2);
        for (int i = 0; i < inserts; ++i) {
            size_t pos = rng() % (s.size() + 1);
            s = s.substr(0, pos) + ws[rng() % 4] + s.substr(pos);
        }
    }
    return s;
}

std::string warc_record(const std::string& warc_type, const std::string& payload) {
    std::ostringstream out;
    out << "WARC/1.0\r\n"
        << "WARC-Type: " << warc_type << "\r\n"
        << "Content-Type: application/json\r\n"
        << "Content-Length: " << payload.size() << "\r\n"
        << "\r\n"
        << payload << "\r\n\r\n";
    return out.str();
}

json table_json(const std::map<std::string, Counts>& table) {
    json obj = json::object();
    for (const auto& [key, counts] : table)
        obj[key] = json::array({counts.tokens, counts.docs});
    return obj;
}

std::map<std::string, Counts> table_from(const json& obj) {
    std::map<std::string, Counts> out;
    for (auto it = obj.begin(); it != obj.end(); ++it)
        out[it.key()] = Counts{it.value()[0].get<uint64_t>(), it.value()[1].get<uint64_t>()};
    return out;
}

void fold_page(std::map<std::string, Counts>& table, const std::map<std::string, uint64_t>& page) {
    for (const auto& [key, tokens] : page) {
        if (tokens == 0)
            continue;
        table[key].tokens += tokens;
        table[key].docs += 1;
    }
}

}  // namespace

CorpusSpec corpus_spec_from_json(const std::string& text) {
    json doc = json::parse(text);
    CorpusSpec spec;
    spec.pages = doc.at("pages").get<uint64_t>();
    spec.shards = doc.value("shards", 1);
    spec.seed = doc.value("seed", uint64_t(1));
    spec.obfuscate = doc.value("obfuscate", true);
    spec.include_requests = doc.value("include_requests", false);
    for (const auto& p : doc.value("plantings", json::array())) {
        Planting planting;
        planting.kind = kind_from_string(p.at("kind").get<std::string>());
        planting.value = p.at("value").get<std::string>();
        planting.meta_name = p.value("meta_name", "");
        planting.expect_hit = p.value("expect_hit", false);
        for (const auto& page : p.at("pages"))
            planting.pages.push_back(page.get<uint32_t>());
        spec.plantings.push_back(std::move(planting));
    }
    for (const auto& d : doc.value("duplicate_pages", json::array()))
        spec.duplicate_pages.emplace_back(d[0].get<uint32_t>(), d[1].get<uint32_t>());

    if (spec.pages == 0)
        throw InvalidSpec("corpus needs at least one page");
    if (spec.shards < 1 || uint64_t(spec.shards) > spec.pages)
        throw InvalidSpec("shard count must be in [1, pages]");
    for (const auto& p : spec.plantings)
        for (uint32_t page : p.pages)
            if (page >= spec.pages)
                throw InvalidSpec("planting references page out of range");
    for (const auto& [src, copy] : spec.duplicate_pages)
        if (src >= spec.pages || copy >= spec.pages || src == copy)
            throw InvalidSpec("bad duplicate page pair");
    return spec;
}

CorpusSpec load_corpus_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read corpus spec " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return corpus_spec_from_json(buf.str());
}

std::string CorpusManifest::to_json() const {
    json doc;
    doc["pages"] = pages;
    doc["record_counts"] = record_counts;
    doc["tables"] = {
        {"crawled_scheme", table_json(crawled_scheme)},
        {"link_scheme", table_json(link_scheme)},
        {"host", table_json(hosts)},
        {"content_type", table_json(content_types)},
        {"resolver", table_json(resolvers)},
        {"pid", table_json(pids)},
        {"meta_name", table_json(meta_names)},
        {"locating", table_json(locating)},
    };
    doc["original_form_counts"] = {{"body_links", body_originals},
                                   {"head_links", head_links_originals},
                                   {"head_metas", head_metas_originals}};
    doc["distinct_uris"] = distinct_uris;
    doc["distinct_digests"] = distinct_digests;
    doc["shard_files"] = shard_files;
    return doc.dump(2) + "\n";
}

CorpusManifest CorpusManifest::from_json(const std::string& text) {
    json doc = json::parse(text);
    CorpusManifest m;
    m.pages = doc.at("pages").get<uint64_t>();
    for (auto it = doc.at("record_counts").begin(); it != doc.at("record_counts").end(); ++it)
        m.record_counts[it.key()] = it.value().get<uint64_t>();
    const json& tables = doc.at("tables");
    m.crawled_scheme = table_from(tables.at("crawled_scheme"));
    m.link_scheme = table_from(tables.at("link_scheme"));
    m.hosts = table_from(tables.at("host"));
    m.content_types = table_from(tables.at("content_type"));
    m.resolvers = table_from(tables.at("resolver"));
    m.pids = table_from(tables.at("pid"));
    m.meta_names = table_from(tables.at("meta_name"));
    m.locating = table_from(tables.at("locating"));
    m.body_originals = doc.at("original_form_counts").at("body_links").get<uint64_t>();
    m.head_links_originals = doc.at("original_form_counts").at("head_links").get<uint64_t>();
    m.head_metas_originals = doc.at("original_form_counts").at("head_metas").get<uint64_t>();
    m.distinct_uris = doc.at("distinct_uris").get<uint64_t>();
    m.distinct_digests = doc.at("distinct_digests").get<uint64_t>();
    for (const auto& f : doc.at("shard_files"))
        m.shard_files.push_back(f.get<std::string>());
    return m;
}

CorpusManifest generate_corpus(const CorpusSpec& spec, const std::string& out_dir,
                               const std::string& base_name) {
    fs::create_directories(out_dir);

    // duplicate copies take the source page's target URI and digest
    std::map<uint32_t, uint32_t> copy_of;
    for (const auto& [src, copy] : spec.duplicate_pages)
        copy_of[copy] = src;

    auto effective_index = [&](uint32_t page) {
        auto it = copy_of.find(page);
        return it == copy_of.end() ? page : it->second;
    };
    auto target_scheme = [&](uint32_t page) {
        return effective_index(page) % 2 == 0 ? std::string("http") : std::string("https");
    };
    auto target_host = [&](uint32_t page) {
        return "site" + std::to_string(effective_index(page)) + ".test";
    };
    auto target_uri = [&](uint32_t page) {
        uint32_t i = effective_index(page);
        return target_scheme(page) + "://" + target_host(page) + "/page" + std::to_string(i);
    };
    auto digest_of = [&](uint32_t page) {
        return "sha1:SYNTH" + std::to_string(effective_index(page));
    };
    const std::string content_type = "text/html; charset=UTF-8";

    // group plantings per page with multiplicity
    struct PagePlant {
        const Planting* planting;
        uint64_t times;
    };
    std::vector<std::vector<PagePlant>> per_page(spec.pages);
    for (const auto& planting : spec.plantings) {
        std::map<uint32_t, uint64_t> times;
        for (uint32_t page : planting.pages)
            ++times[page];
        for (const auto& [page, n] : times)
            per_page[page].push_back({&planting, n});
    }

    // ---- expected counts by direct enumeration ----
    CorpusManifest manifest;
    manifest.pages = spec.pages;
    std::set<std::string> uri_set, digest_set;

    for (uint32_t page = 0; page < spec.pages; ++page) {
        std::map<std::string, uint64_t> crawled_scheme, link_scheme, hosts, content_types,
            resolvers, pids, meta_names, locating;
        crawled_scheme[target_scheme(page)] += 1;
        hosts[target_host(page)] += 1;
        content_types[content_type] += 1;
        link_scheme["http"] += 1;    // filler link
        link_scheme["(none)"] += 1;  // relative filler link

        for (const auto& [planting, times] : per_page[page]) {
            CleanParts parts = dissect_clean(planting->value);
            switch (planting->kind) {
            case Planting::Kind::Actionable:
                link_scheme[parts.scheme] += times;
                resolvers[parts.host] += times;
                pids[parts.cls + " " + parts.pid] += times;
                break;
            case Planting::Kind::OriginalBody:
                link_scheme[parts.scheme] += times;
                pids[parts.cls + " " + parts.pid] += times;
                manifest.body_originals += times;
                break;
            case Planting::Kind::HeadMeta:
                pids[parts.cls + " " + parts.pid] += times;
                meta_names[planting->meta_name.empty() ? "(none)" : planting->meta_name] += times;
                manifest.head_metas_originals += times;
                break;
            case Planting::Kind::HeadLink:
                pids[parts.cls + " " + parts.pid] += times;
                manifest.head_links_originals += times;
                break;
            case Planting::Kind::Locating:
                link_scheme[parts.scheme] += times;
                if (planting->expect_hit)
                    locating[planting->value] += times;
                break;
            }
        }

        fold_page(manifest.crawled_scheme, crawled_scheme);
        fold_page(manifest.link_scheme, link_scheme);
        fold_page(manifest.hosts, hosts);
        fold_page(manifest.content_types, content_types);
        fold_page(manifest.resolvers, resolvers);
        fold_page(manifest.pids, pids);
        fold_page(manifest.meta_names, meta_names);
        fold_page(manifest.locating, locating);
        uri_set.insert(target_uri(page));
        digest_set.insert(digest_of(page));
    }
    manifest.distinct_uris = uri_set.size();
    manifest.distinct_digests = digest_set.size();

    // ---- write the archives ----
    uint64_t per_shard = spec.pages / uint64_t(spec.shards);
    uint64_t remainder = spec.pages % uint64_t(spec.shards);
    uint32_t next_page = 0;
    for (int shard = 0; shard < spec.shards; ++shard) {
        uint64_t count = per_shard + (uint64_t(shard) < remainder ? 1 : 0);
        char suffix[16];
        std::snprintf(suffix, sizeof suffix, "-%04d.wat.gz", shard);
        std::string filename = base_name + suffix;
        std::string path = (fs::path(out_dir) / filename).string();

        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + path);
        auto emit = [&](const std::string& record) {
            // one gzip member per record, the layout real WAT shards use
            std::string gz = gzip_compress(record);
            out.write(gz.data(), std::streamsize(gz.size()));
        };

        json info_env = {{"Envelope",
                          {{"WARC-Header-Metadata", {{"WARC-Type", "warcinfo"}}},
                           {"Payload-Metadata", {{"Actual-Content-Type", "application/warc-fields"}}}}}};
        emit(warc_record("warcinfo", info_env.dump()));
        ++manifest.record_counts["warcinfo"];

        for (uint64_t p = 0; p < count; ++p, ++next_page) {
            uint32_t page = next_page;
            // per-page RNG keyed to the corpus seed, so shard split and pool
            // width never change the bytes
            std::mt19937_64 rng(spec.seed ^ (0x9e3779b97f4a7c15ULL * (page + 1)));

            if (spec.include_requests) {
                json req_env = {{"Envelope", {{"WARC-Header-Metadata", {{"WARC-Type", "request"}}}}}};
                emit(warc_record("request", req_env.dump()));
                ++manifest.record_counts["request"];
            }

            json links = json::array();
            auto add_link = [&](const std::string& url) {
                links.push_back({{"path", "A@/href"}, {"url", url}});
            };
            add_link("http://filler.test/f" + std::to_string(page));
            add_link("/rel/" + std::to_string(page));

            json head_links = json::array();
            json metas = json::array();

            for (const auto& [planting, times] : per_page[page]) {
                for (uint64_t t = 0; t < times; ++t) {
                    bool aggressive = planting->kind == Planting::Kind::Actionable ||
                                      planting->kind == Planting::Kind::OriginalBody ||
                                      planting->kind == Planting::Kind::HeadMeta ||
                                      planting->kind == Planting::Kind::HeadLink;
                    std::string spelled = spec.obfuscate
                                              ? obfuscate(planting->value, rng, aggressive)
                                              : planting->value;
                    switch (planting->kind) {
                    case Planting::Kind::Actionable:
                    case Planting::Kind::OriginalBody:
                    case Planting::Kind::Locating:
                        add_link(spelled);
                        break;
                    case Planting::Kind::HeadMeta:
                        metas.push_back({{"name", planting->meta_name}, {"content", spelled}});
                        break;
                    case Planting::Kind::HeadLink:
                        head_links.push_back({{"rel", "identifier"}, {"href", spelled}});
                        break;
                    }
                }
            }

            json envelope = {
                {"Envelope",
                 {{"WARC-Header-Metadata",
                   {{"WARC-Type", "response"},
                    {"WARC-Target-URI", target_uri(page)},
                    {"WARC-Payload-Digest", digest_of(page)}}},
                  {"Payload-Metadata",
                   {{"HTTP-Response-Metadata",
                     {{"Headers", {{"Content-Type", content_type}}},
                      {"HTML-Metadata",
                       {{"Links", links},
                        {"Head", {{"Link", head_links}, {"Metas", metas}}}}}}}}}}}};
            emit(warc_record("response", envelope.dump()));
            ++manifest.record_counts["response"];
        }
        manifest.shard_files.push_back(path);
    }

    std::ofstream mout((fs::path(out_dir) / (base_name + ".manifest.json")).string());
    mout << manifest.to_json();
    return manifest;
}

namespace {

void diff_table(std::vector<std::string>& diffs, const std::string& label,
                const std::map<std::string, Counts>& expected, const FrequencyTable& actual) {
    for (const auto& [key, counts] : expected) {
        Counts got = actual.at_or_zero(key);
        if (got != counts) {
            std::ostringstream msg;
            msg << label << "[" << key << "]: expected " << counts.tokens << "/" << counts.docs
                << " got " << got.tokens << "/" << got.docs;
            diffs.push_back(msg.str());
        }
    }
    for (const auto& [key, counts] : actual.entries())
        if (!expected.count(key))
            diffs.push_back(label + "[" + key + "]: unexpected key");
}

}  // namespace

std::vector<std::string> manifest_mismatches(const CorpusManifest& manifest,
                                             const ShardSummary& summary) {
    std::vector<std::string> diffs;
    if (summary.pages != manifest.pages)
        diffs.push_back("pages: expected " + std::to_string(manifest.pages) + " got " +
                        std::to_string(summary.pages));
    diff_table(diffs, "crawled_scheme", manifest.crawled_scheme, summary.crawled_scheme_table);
    diff_table(diffs, "link_scheme", manifest.link_scheme, summary.link_scheme_table);
    diff_table(diffs, "host", manifest.hosts, summary.host_table);
    diff_table(diffs, "content_type", manifest.content_types, summary.content_type_table);
    diff_table(diffs, "resolver", manifest.resolvers, summary.resolver_table);
    diff_table(diffs, "pid", manifest.pids, summary.pid_table);
    diff_table(diffs, "meta_name", manifest.meta_names, summary.meta_name_table);
    diff_table(diffs, "locating", manifest.locating, summary.locating_table);
    if (summary.original_form_counts.body_links != manifest.body_originals)
        diffs.push_back("original body_links mismatch");
    if (summary.original_form_counts.head_links != manifest.head_links_originals)
        diffs.push_back("original head_links mismatch");
    if (summary.original_form_counts.head_metas != manifest.head_metas_originals)
        diffs.push_back("original head_metas mismatch");
    for (const auto& [kind, count] : manifest.record_counts) {
        auto it = summary.error_tallies.find("records_" + kind);
        uint64_t got = it == summary.error_tallies.end() ? 0 : it->second;
        if (got != count)
            diffs.push_back("records_" + kind + ": expected " + std::to_string(count) + " got " +
                            std::to_string(got));
    }
    for (const auto& [key, count] : summary.error_tallies)
        if (key.rfind("records_", 0) != 0 && count > 0)
            diffs.push_back("unexpected error tally " + key + "=" + std::to_string(count));
    return diffs;
}

}  // namespace pidstats
