#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>

#include <zlib.h>

#include "lsr/error.hpp"

namespace lsr::detail {

/// Little-endian, fixed-width serializer into an in-memory buffer.
class ByteWriter {
  public:
    void u8(std::uint8_t v) { m_buf.push_back(static_cast<char>(v)); }

    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i) {
            u8(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }

    void u64(std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i) {
            u8(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }

    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void str(std::string_view s)
    {
        u32(static_cast<std::uint32_t>(s.size()));
        m_buf.append(s);
    }

    void raw(std::string_view s) { m_buf.append(s); }

    [[nodiscard]] std::string const &bytes() const { return m_buf; }
    [[nodiscard]] std::size_t size() const { return m_buf.size(); }

  private:
    std::string m_buf;
};

/// Reader counterpart; every overrun raises TruncatedFile.
class ByteReader {
  public:
    explicit ByteReader(std::string_view data) : m_data(data) {}

    std::uint8_t u8()
    {
        need(1);
        return static_cast<std::uint8_t>(m_data[m_pos++]);
    }

    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(m_data[m_pos++])) << (8 * i);
        }
        return v;
    }

    std::uint64_t u64()
    {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(m_data[m_pos++])) << (8 * i);
        }
        return v;
    }

    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }

    std::string str()
    {
        auto len = u32();
        need(len);
        std::string s(m_data.substr(m_pos, len));
        m_pos += len;
        return s;
    }

    std::string_view raw(std::size_t n)
    {
        need(n);
        auto s = m_data.substr(m_pos, n);
        m_pos += n;
        return s;
    }

    [[nodiscard]] std::size_t remaining() const { return m_data.size() - m_pos; }

  private:
    void need(std::size_t n) const
    {
        if (m_data.size() - m_pos < n) {
            throw TruncatedFile("truncated file: needed " + std::to_string(n) + " bytes at offset "
                                + std::to_string(m_pos));
        }
    }

    std::string_view m_data;
    std::size_t m_pos = 0;
};

inline std::uint32_t crc32_of(std::string_view data)
{
    uLong crc = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks for large payloads.
    std::size_t offset = 0;
    while (offset < data.size()) {
        auto chunk = static_cast<uInt>(std::min<std::size_t>(data.size() - offset, 1U << 30));
        crc = ::crc32(crc, reinterpret_cast<Bytef const *>(data.data() + offset), chunk);
        offset += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

inline std::string read_file(std::string const &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open file: " + path);
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(std::string const &path, std::string_view bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write file: " + path);
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error("write failed: " + path);
    }
}

/// Framed container shared by the binary artifacts:
///   magic[8] | u32 version | u64 payload_len | payload | u32 crc32(payload)
inline std::string frame(std::string_view magic, std::uint32_t version, std::string_view payload)
{
    ByteWriter w;
    w.raw(magic);
    w.u32(version);
    w.u64(payload.size());
    w.raw(payload);
    w.u32(crc32_of(payload));
    return w.bytes();
}

/// Validates the frame and returns the payload. `what` names the artifact in errors.
inline std::string_view unframe(std::string_view bytes, std::string_view magic,
                                std::uint32_t max_version, std::string_view what,
                                std::uint32_t *version_out = nullptr)
{
    if (bytes.size() < magic.size() || bytes.substr(0, magic.size()) != magic) {
        throw BadMagic("not " + std::string(what) + " file (bad magic bytes)");
    }
    ByteReader r(bytes.substr(magic.size()));
    auto version = r.u32();
    if (version == 0 || version > max_version) {
        throw UnsupportedVersion("unsupported version " + std::to_string(version) + " of "
                                 + std::string(what) + " file (max supported "
                                 + std::to_string(max_version) + ")");
    }
    auto len = r.u64();
    if (len > r.remaining() || r.remaining() - len < 4) {
        throw TruncatedFile("truncated " + std::string(what) + " file: payload declares "
                            + std::to_string(len) + " bytes, " + std::to_string(r.remaining())
                            + " available");
    }
    auto payload = r.raw(len);
    auto crc = r.u32();
    if (crc != crc32_of(payload)) {
        throw ChecksumMismatch(std::string(what) + " file checksum mismatch");
    }
    if (version_out) {
        *version_out = version;
    }
    return payload;
}

}  // namespace lsr::detail
