#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hummit::binio {

/// Append-only little-endian byte buffer used by the dataset cache and
/// checkpoint writers.
class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f32(float v);
    void bytes(const void* p, std::size_t n);
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }

    const std::vector<std::uint8_t>& data() const { return buf_; }

private:
    std::vector<std::uint8_t> buf_;
};

/// Cursor over an in-memory byte span. Throws Error("Truncated", ...) past
/// the end so malformed files surface as data errors, not UB.
class Reader {
public:
    Reader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
    explicit Reader(const std::vector<std::uint8_t>& v) : Reader(v.data(), v.size()) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    std::uint16_t u16be();
    std::uint32_t u32be();
    float f32();
    void bytes(void* out, std::size_t n);
    std::string str();
    void skip(std::size_t n);
    std::size_t remaining() const { return n_ - pos_; }
    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) const;
    const std::uint8_t* p_;
    std::size_t n_;
    std::size_t pos_ = 0;
};

std::uint32_t crc32(const std::uint8_t* p, std::size_t n, std::uint32_t seed = 0);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Write-temp-then-rename so partially written outputs never appear under the
/// final name.
void write_file_atomic(const std::filesystem::path& path, const void* data, std::size_t n);
void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& data);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

} // namespace hummit::binio
