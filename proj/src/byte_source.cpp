#include "pidstats/byte_source.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace pidstats {

namespace {

class FileSource : public ByteSource {
public:
    explicit FileSource(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_)
            throw std::runtime_error("cannot open " + path);
    }
    size_t read(char* buf, size_t n) override {
        in_.read(buf, std::streamsize(n));
        return size_t(in_.gcount());
    }

private:
    std::ifstream in_;
};

class MemorySource : public ByteSource {
public:
    explicit MemorySource(std::string data) : data_(std::move(data)) {}
    size_t read(char* buf, size_t n) override {
        size_t avail = data_.size() - pos_;
        size_t take = n < avail ? n : avail;
        std::memcpy(buf, data_.data() + pos_, take);
        pos_ += take;
        return take;
    }

private:
    std::string data_;
    size_t pos_ = 0;
};

class GzipSource : public ByteSource {
public:
    explicit GzipSource(std::unique_ptr<ByteSource> inner) : inner_(std::move(inner)) {
        std::memset(&strm_, 0, sizeof strm_);
        // windowBits 15+32: auto-detect gzip/zlib wrapper
        if (inflateInit2(&strm_, 15 + 32) != Z_OK)
            throw std::runtime_error("inflateInit2 failed");
    }
    ~GzipSource() override { inflateEnd(&strm_); }

    size_t read(char* buf, size_t n) override {
        if (finished_)
            return 0;
        strm_.next_out = reinterpret_cast<Bytef*>(buf);
        strm_.avail_out = uInt(n);
        while (strm_.avail_out > 0) {
            if (strm_.avail_in == 0) {
                size_t got = inner_->read(inbuf_, sizeof inbuf_);
                if (got == 0) {
                    if (mid_stream_)
                        throw CorruptGzip("unexpected end of gzip stream");
                    finished_ = true;
                    break;
                }
                strm_.next_in = reinterpret_cast<Bytef*>(inbuf_);
                strm_.avail_in = uInt(got);
            }
            int rc = inflate(&strm_, Z_NO_FLUSH);
            if (rc == Z_STREAM_END) {
                mid_stream_ = false;
                // concatenated members: reset and keep going on remaining input
                if (inflateReset2(&strm_, 15 + 32) != Z_OK)
                    throw CorruptGzip("gzip reset failed");
                continue;
            }
            if (rc != Z_OK && rc != Z_BUF_ERROR)
                throw CorruptGzip(std::string("gzip inflate error: ") +
                                  (strm_.msg ? strm_.msg : "unknown"));
            mid_stream_ = true;
        }
        return n - strm_.avail_out;
    }

private:
    std::unique_ptr<ByteSource> inner_;
    z_stream strm_{};
    char inbuf_[1 << 16];
    bool finished_ = false;
    bool mid_stream_ = false;
};

}  // namespace

std::unique_ptr<ByteSource> open_file_source(const std::string& path) {
    return std::make_unique<FileSource>(path);
}

std::unique_ptr<ByteSource> make_memory_source(std::string data) {
    return std::make_unique<MemorySource>(std::move(data));
}

std::unique_ptr<ByteSource> make_gzip_source(std::unique_ptr<ByteSource> inner) {
    return std::make_unique<GzipSource>(std::move(inner));
}

std::string gzip_compress(const std::string& data) {
    z_stream strm;
    std::memset(&strm, 0, sizeof strm);
    // windowBits 15+16 writes a gzip wrapper; zlib leaves mtime zero, so
    // output is deterministic
    if (deflateInit2(&strm, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8,
                     Z_DEFAULT_STRATEGY) != Z_OK)
        throw std::runtime_error("deflateInit2 failed");
    std::string out;
    out.resize(deflateBound(&strm, uLong(data.size())) + 32);
    strm.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    strm.avail_in = uInt(data.size());
    strm.next_out = reinterpret_cast<Bytef*>(out.data());
    strm.avail_out = uInt(out.size());
    int rc = deflate(&strm, Z_FINISH);
    if (rc != Z_STREAM_END) {
        deflateEnd(&strm);
        throw std::runtime_error("deflate failed");
    }
    out.resize(strm.total_out);
    deflateEnd(&strm);
    return out;
}

std::string gzip_decompress_file(const std::string& path) {
    auto src = make_gzip_source(open_file_source(path));
    std::string out;
    char buf[1 << 16];
    size_t got;
    while ((got = src->read(buf, sizeof buf)) > 0)
        out.append(buf, got);
    return out;
}

}  // namespace pidstats
