#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pidstats/wat_reader.hpp"

using namespace pidstats;

namespace {

// Independent record framing so the reader is tested against hand-built
// bytes, not its own sibling writer.
std::string frame(const std::string& warc_type, const std::string& payload) {
    std::ostringstream out;
    out << "WARC/1.0\r\n"
        << "WARC-Type: " << warc_type << "\r\n"
        << "WARC-Date: 2017-03-22T00:00:00Z\r\n"
        << "Content-Length: " << payload.size() << "\r\n"
        << "\r\n"
        << payload << "\r\n\r\n";
    return out.str();
}

const char* kEnvelope = R"({"Envelope":{
  "WARC-Header-Metadata":{"WARC-Type":"response",
    "WARC-Target-URI":"http://site.test/page",
    "WARC-Payload-Digest":"sha1:ABCDEF"},
  "Payload-Metadata":{"HTTP-Response-Metadata":{
    "Headers":{"Content-Type":"text/html; charset=UTF-8"},
    "HTML-Metadata":{
      "Links":[{"path":"A@/href","url":"https://doi.org/10.1000/182"},
               {"path":"IMG@/src"},
               {"path":"A@/href","url":"/relative"}],
      "Head":{
        "Link":[{"rel":"identifier","href":"doi:10.5555/head"}],
        "Metas":[{"name":"dc.identifier","content":"doi:10.1000/182"},
                 {"name":"viewport","content":"width=device-width"}]}}}}}})";

std::vector<WatItem> read_all(ArchiveReader& reader) {
    std::vector<WatItem> items;
    while (auto item = reader.next())
        items.push_back(std::move(*item));
    return items;
}

}  // namespace

TEST_CASE("empty archive yields nothing") {
    ArchiveReader reader(make_memory_source(""), false);
    CHECK_FALSE(reader.next().has_value());
    CHECK(reader.tallies().empty());
}

TEST_CASE("streams records in order with per-kind tallies") {
    std::string archive = frame("warcinfo", "{}") + frame("request", "{}") +
                          frame("response", kEnvelope);
    ArchiveReader reader(make_memory_source(archive), false);
    auto items = read_all(reader);
    REQUIRE(items.size() == 3);
    CHECK(std::get<WatRecord>(items[0]).kind == RecordKind::Warcinfo);
    CHECK(std::get<WatRecord>(items[1]).kind == RecordKind::Request);
    CHECK(std::get<WatRecord>(items[2]).kind == RecordKind::Response);
    CHECK(std::get<WatRecord>(items[2]).payload == kEnvelope);
    CHECK(reader.tallies().at("warcinfo") == 1);
    CHECK(reader.tallies().at("request") == 1);
    CHECK(reader.tallies().at("response") == 1);
}

TEST_CASE("real-WAT metadata wrapping classifies by inner type") {
    std::string inner = R"({"Envelope":{"WARC-Header-Metadata":{"WARC-Type":"response"}}})";
    std::string archive = frame("metadata", inner) +
                          frame("metadata", R"({"x":"no inner type"})");
    ArchiveReader reader(make_memory_source(archive), false);
    auto items = read_all(reader);
    REQUIRE(items.size() == 2);
    CHECK(std::get<WatRecord>(items[0]).kind == RecordKind::Response);
    CHECK(std::get<WatRecord>(items[1]).kind == RecordKind::MetadataOther);
}

TEST_CASE("gzipped archive with one member per record") {
    std::string gz;
    gz += gzip_compress(frame("warcinfo", "{}"));
    gz += gzip_compress(frame("response", kEnvelope));
    ArchiveReader reader(make_memory_source(gz), true);
    auto items = read_all(reader);
    REQUIRE(items.size() == 2);
    CHECK(std::get<WatRecord>(items[1]).payload == kEnvelope);
}

TEST_CASE("truncated payload reported as malformed, archive exhausted") {
    std::string archive = frame("response", kEnvelope);
    archive.resize(archive.size() / 2);
    ArchiveReader reader(make_memory_source(archive), false);
    auto item = reader.next();
    REQUIRE(item.has_value());
    REQUIRE(std::holds_alternative<ReadError>(*item));
    CHECK(std::get<ReadError>(*item).kind == ReadErrorKind::MalformedRecordHeader);
    CHECK_FALSE(reader.next().has_value());
    CHECK(reader.tallies().at("malformed_record_header") == 1);
}

TEST_CASE("missing version line reported as malformed") {
    ArchiveReader reader(make_memory_source("HTTP/1.1 200 OK\r\n\r\n"), false);
    auto item = reader.next();
    REQUIRE(item.has_value());
    CHECK(std::get<ReadError>(*item).kind == ReadErrorKind::MalformedRecordHeader);
}

TEST_CASE("corrupt gzip surfaces once, then the archive is done") {
    std::string gz = gzip_compress(frame("warcinfo", "{}"));
    gz += "garbage that is not a gzip member at all";
    ArchiveReader reader(make_memory_source(gz), true);
    bool saw_corrupt = false;
    while (auto item = reader.next())
        if (std::holds_alternative<ReadError>(*item) &&
            std::get<ReadError>(*item).kind == ReadErrorKind::CorruptGzip)
            saw_corrupt = true;
    CHECK(saw_corrupt);
    CHECK(reader.tallies().at("corrupt_gzip") == 1);
}

TEST_CASE("open_archive sniffs compression from the suffix") {
    std::string plain_path = "reader_test.wat";
    std::string gz_path = "reader_test.wat.gz";
    {
        std::ofstream out(plain_path, std::ios::binary);
        out << frame("response", kEnvelope);
    }
    {
        std::ofstream out(gz_path, std::ios::binary);
        std::string gz = gzip_compress(frame("response", kEnvelope));
        out.write(gz.data(), std::streamsize(gz.size()));
    }
    for (const std::string& path : {plain_path, gz_path}) {
        ArchiveReader reader = open_archive(path);
        auto items = read_all(reader);
        CAPTURE(path);
        REQUIRE(items.size() == 1);
        CHECK(std::get<WatRecord>(items[0]).payload == kEnvelope);
    }
    std::remove(plain_path.c_str());
    std::remove(gz_path.c_str());
}

TEST_CASE("envelope extraction pulls target, content type and links") {
    WatRecord record{RecordKind::Response, kEnvelope, 0};
    auto result = extract_envelope(record);
    REQUIRE(std::holds_alternative<PageEnvelope>(result));
    const PageEnvelope& page = std::get<PageEnvelope>(result);
    CHECK(page.target_uri == "http://site.test/page");
    CHECK(page.content_type == "text/html; charset=UTF-8");
    CHECK(page.payload_digest == "sha1:ABCDEF");
    REQUIRE(page.body_links.size() == 2);
    CHECK(page.body_links[0].url == "https://doi.org/10.1000/182");
    CHECK(page.body_links[0].path == "A@/href");
    CHECK(page.body_links[1].url == "/relative");
    CHECK(page.malformed_links == 1);  // the IMG entry has no url
    REQUIRE(page.head_links.size() == 1);
    CHECK(page.head_links[0].href == "doi:10.5555/head");
    REQUIRE(page.head_metas.size() == 2);
    CHECK(page.head_metas[0].name == "dc.identifier");
    CHECK(page.head_metas[0].content == "doi:10.1000/182");
}

TEST_CASE("envelope extraction error taxonomy") {
    auto kind_of = [](const std::string& payload) {
        auto result = extract_envelope(WatRecord{RecordKind::Response, payload, 0});
        REQUIRE(std::holds_alternative<ExtractError>(result));
        return std::get<ExtractError>(result).kind;
    };
    CHECK(kind_of("not json {") == ExtractErrorKind::UnparseableJson);
    CHECK(kind_of(R"({"NoEnvelope":1})") == ExtractErrorKind::UnparseableJson);
    CHECK(kind_of(R"({"Envelope":{"WARC-Header-Metadata":{}}})") ==
          ExtractErrorKind::MissingTargetUri);
    // minimal but valid: just a target URI
    auto ok = extract_envelope(WatRecord{
        RecordKind::Response,
        R"({"Envelope":{"WARC-Header-Metadata":{"WARC-Target-URI":"http://a.test/"}}})", 0});
    REQUIRE(std::holds_alternative<PageEnvelope>(ok));
    CHECK(std::get<PageEnvelope>(ok).body_links.empty());
}
