#include "pidstats/wat_reader.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <charconv>
#include <cstring>

using nlohmann::json;

namespace pidstats {

std::string to_string(RecordKind k) {
    switch (k) {
    case RecordKind::Warcinfo: return "warcinfo";
    case RecordKind::Request: return "request";
    case RecordKind::Response: return "response";
    case RecordKind::MetadataOther: return "metadata-other";
    }
    return "metadata-other";
}

std::string to_string(ExtractErrorKind k) {
    switch (k) {
    case ExtractErrorKind::UnparseableJson: return "unparseable_json";
    case ExtractErrorKind::MissingTargetUri: return "missing_target_uri";
    case ExtractErrorKind::NotAResponse: return "not_a_response";
    }
    return "unparseable_json";
}

ArchiveReader::ArchiveReader(std::unique_ptr<ByteSource> source, bool compressed)
    : buf_(1 << 16) {
    source_ = compressed ? make_gzip_source(std::move(source)) : std::move(source);
}

ArchiveReader open_archive(const std::string& path) {
    bool gz = path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
    return ArchiveReader(open_file_source(path), gz);
}

size_t ArchiveReader::fill(char* out, size_t n) {
    size_t total = 0;
    while (total < n) {
        if (buf_pos_ == buf_len_) {
            buf_len_ = source_->read(buf_.data(), buf_.size());
            buf_pos_ = 0;
            if (buf_len_ == 0)
                break;
        }
        size_t take = std::min(n - total, buf_len_ - buf_pos_);
        std::memcpy(out + total, buf_.data() + buf_pos_, take);
        buf_pos_ += take;
        total += take;
    }
    offset_ += total;
    return total;
}

bool ArchiveReader::read_line(std::string& line) {
    line.clear();
    char c;
    while (fill(&c, 1) == 1) {
        if (c == '\n') {
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            return true;
        }
        line += c;
        if (line.size() > 64 * 1024)
            return false;  // header line absurdly long; treat as malformed
    }
    return !line.empty();
}

namespace {

// Real WAT shards wrap every record in WARC-Type: metadata and put the
// original record type inside the JSON envelope; a cheap substring probe
// avoids parsing JSON twice per record.
RecordKind classify_metadata_payload(const std::string& payload) {
    auto has = [&](const char* needle) { return payload.find(needle) != std::string::npos; };
    if (has("\"WARC-Type\":\"response\"") || has("\"WARC-Type\": \"response\""))
        return RecordKind::Response;
    if (has("\"WARC-Type\":\"request\"") || has("\"WARC-Type\": \"request\""))
        return RecordKind::Request;
    if (has("\"WARC-Type\":\"warcinfo\"") || has("\"WARC-Type\": \"warcinfo\""))
        return RecordKind::Warcinfo;
    return RecordKind::MetadataOther;
}

}  // namespace

std::optional<WatItem> ArchiveReader::next() {
    if (done_)
        return std::nullopt;

    try {
        std::string line;
        uint64_t record_start;

        // skip blank separators between records
        for (;;) {
            record_start = offset_;
            if (!read_line(line)) {
                done_ = true;
                return std::nullopt;
            }
            if (!line.empty())
                break;
        }

        if (line.compare(0, 5, "WARC/") != 0) {
            done_ = true;
            ++tallies_["malformed_record_header"];
            return WatItem(ReadError{ReadErrorKind::MalformedRecordHeader, record_start,
                                     "missing WARC version line"});
        }

        std::string warc_type;
        uint64_t content_length = 0;
        bool have_length = false;
        while (read_line(line) && !line.empty()) {
            size_t colon = line.find(':');
            if (colon == std::string::npos)
                continue;
            std::string name = line.substr(0, colon);
            size_t vstart = line.find_first_not_of(" \t", colon + 1);
            std::string value = vstart == std::string::npos ? "" : line.substr(vstart);
            for (char& c : name)
                c = char(std::tolower(static_cast<unsigned char>(c)));
            if (name == "warc-type") {
                warc_type = value;
            } else if (name == "content-length") {
                auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(),
                                               content_length);
                have_length = ec == std::errc() && p == value.data() + value.size();
            }
        }
        if (!have_length) {
            done_ = true;
            ++tallies_["malformed_record_header"];
            return WatItem(ReadError{ReadErrorKind::MalformedRecordHeader, record_start,
                                     "missing Content-Length"});
        }

        WatRecord record;
        record.byte_offset = record_start;
        record.payload.resize(content_length);
        size_t got = fill(record.payload.data(), content_length);
        if (got != content_length) {
            done_ = true;
            ++tallies_["malformed_record_header"];
            return WatItem(ReadError{ReadErrorKind::MalformedRecordHeader, record_start,
                                     "truncated record payload"});
        }

        if (warc_type == "warcinfo")
            record.kind = RecordKind::Warcinfo;
        else if (warc_type == "request")
            record.kind = RecordKind::Request;
        else if (warc_type == "response")
            record.kind = RecordKind::Response;
        else if (warc_type == "metadata")
            record.kind = classify_metadata_payload(record.payload);
        else
            record.kind = RecordKind::MetadataOther;

        ++tallies_[to_string(record.kind)];
        return WatItem(std::move(record));
    } catch (const CorruptGzip& e) {
        done_ = true;
        ++tallies_["corrupt_gzip"];
        return WatItem(ReadError{ReadErrorKind::CorruptGzip, offset_, e.what()});
    }
}

namespace {

const json* find_path(const json& root, std::initializer_list<const char*> path) {
    const json* node = &root;
    for (const char* key : path) {
        if (!node->is_object())
            return nullptr;
        auto it = node->find(key);
        if (it == node->end())
            return nullptr;
        node = &*it;
    }
    return node;
}

std::optional<std::string> opt_string(const json* node) {
    if (node && node->is_string())
        return node->get<std::string>();
    return std::nullopt;
}

}  // namespace

std::variant<PageEnvelope, ExtractError> extract_envelope(const WatRecord& record) {
    json root = json::parse(record.payload, nullptr, false);
    if (root.is_discarded() || !root.is_object())
        return ExtractError{ExtractErrorKind::UnparseableJson};
    auto env_it = root.find("Envelope");
    if (env_it == root.end() || !env_it->is_object())
        return ExtractError{ExtractErrorKind::UnparseableJson};
    const json& env = *env_it;

    PageEnvelope page;
    auto target = opt_string(find_path(env, {"WARC-Header-Metadata", "WARC-Target-URI"}));
    if (!target || target->empty())
        return ExtractError{ExtractErrorKind::MissingTargetUri};
    page.target_uri = std::move(*target);
    page.payload_digest =
        opt_string(find_path(env, {"WARC-Header-Metadata", "WARC-Payload-Digest"}));
    page.content_type = opt_string(find_path(
        env, {"Payload-Metadata", "HTTP-Response-Metadata", "Headers", "Content-Type"}));

    const json* html =
        find_path(env, {"Payload-Metadata", "HTTP-Response-Metadata", "HTML-Metadata"});
    if (html) {
        if (const json* links = find_path(*html, {"Links"}); links && links->is_array()) {
            for (const json& item : *links) {
                if (!item.is_object())
                    continue;
                auto url = opt_string(find_path(item, {"url"}));
                if (!url) {
                    ++page.malformed_links;
                    continue;
                }
                LinkEntry entry;
                entry.url = std::move(*url);
                if (auto path = opt_string(find_path(item, {"path"})))
                    entry.path = std::move(*path);
                page.body_links.push_back(std::move(entry));
            }
        }
        if (const json* head_links = find_path(*html, {"Head", "Link"});
            head_links && head_links->is_array()) {
            for (const json& item : *head_links) {
                if (!item.is_object())
                    continue;
                HeadLinkEntry entry;
                entry.rel = opt_string(find_path(item, {"rel"}));
                entry.href = opt_string(find_path(item, {"href"}));
                if (entry.rel || entry.href)
                    page.head_links.push_back(std::move(entry));
            }
        }
        if (const json* metas = find_path(*html, {"Head", "Metas"});
            metas && metas->is_array()) {
            for (const json& item : *metas) {
                if (!item.is_object())
                    continue;
                HeadMetaEntry entry;
                entry.name = opt_string(find_path(item, {"name"}));
                entry.content = opt_string(find_path(item, {"content"}));
                if (entry.name || entry.content)
                    page.head_metas.push_back(std::move(entry));
            }
        }
    }
    return page;
}

}  // namespace pidstats
