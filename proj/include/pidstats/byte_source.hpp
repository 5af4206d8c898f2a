#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>

namespace pidstats {

/// Pull-based byte stream; read returns 0 at end of stream.
class ByteSource {
public:
    virtual ~ByteSource() = default;
    virtual size_t read(char* buf, size_t n) = 0;
};

std::unique_ptr<ByteSource> open_file_source(const std::string& path);
std::unique_ptr<ByteSource> make_memory_source(std::string data);

struct CorruptGzip : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Streaming inflate over another source; handles concatenated gzip members
/// (real WAT shards are per-record gzip members).
std::unique_ptr<ByteSource> make_gzip_source(std::unique_ptr<ByteSource> inner);

/// Whole-buffer gzip helpers for summary files.
std::string gzip_compress(const std::string& data);
std::string gzip_decompress_file(const std::string& path);

}  // namespace pidstats
