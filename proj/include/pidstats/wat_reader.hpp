#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pidstats/byte_source.hpp"
#include "pidstats/classifier.hpp"

namespace pidstats {

enum class RecordKind { Warcinfo, Request, Response, MetadataOther };

std::string to_string(RecordKind k);

struct WatRecord {
    RecordKind kind;
    std::string payload;       // raw JSON text
    uint64_t byte_offset = 0;  // record start in the (decompressed) archive
};

enum class ReadErrorKind { CorruptGzip, MalformedRecordHeader };

struct ReadError {
    ReadErrorKind kind;
    uint64_t byte_offset = 0;
    std::string detail;
};

using WatItem = std::variant<WatRecord, ReadError>;

/// Streams one archive record-by-record; holds at most one record payload at
/// a time. Not shareable between concurrent consumers.
class ArchiveReader {
public:
    ArchiveReader(std::unique_ptr<ByteSource> source, bool compressed);

    /// Next record or error item; nullopt at clean end of archive.
    /// After a CorruptGzip or truncation error the archive is exhausted.
    std::optional<WatItem> next();

    const std::map<std::string, uint64_t>& tallies() const { return tallies_; }

private:
    bool read_line(std::string& line);
    size_t fill(char* buf, size_t n);

    std::unique_ptr<ByteSource> source_;
    uint64_t offset_ = 0;
    bool done_ = false;
    std::map<std::string, uint64_t> tallies_;  // per-kind and per-error counts

    std::vector<char> buf_;
    size_t buf_pos_ = 0, buf_len_ = 0;
};

ArchiveReader open_archive(const std::string& path);

struct LinkEntry {
    std::string path;  // quasi-XPath, e.g. "A@/href"
    std::string url;
};

struct PageEnvelope {
    std::string target_uri;
    std::optional<std::string> content_type;
    std::optional<std::string> payload_digest;
    std::vector<LinkEntry> body_links;
    std::vector<HeadLinkEntry> head_links;
    std::vector<HeadMetaEntry> head_metas;
    uint64_t malformed_links = 0;  // Links entries lacking a url member
};

enum class ExtractErrorKind { UnparseableJson, MissingTargetUri, NotAResponse };

struct ExtractError {
    ExtractErrorKind kind;
};

std::string to_string(ExtractErrorKind k);

/// Pull the three envelope components (target URI, Content-Type, link data)
/// out of a response record's JSON payload. Missing members give empty lists.
std::variant<PageEnvelope, ExtractError> extract_envelope(const WatRecord& record);

}  // namespace pidstats
