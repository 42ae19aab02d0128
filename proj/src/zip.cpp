#include "slicehub/zip.hpp"

#include <cstdint>

#include <zlib.h>

#include "slicehub/error.hpp"

namespace slicehub {
namespace {

constexpr std::uint32_t kLocalHeaderSig = 0x04034b50;
constexpr std::uint32_t kCentralHeaderSig = 0x02014b50;
constexpr std::uint32_t kEndOfCentralSig = 0x06054b50;
constexpr std::uint16_t kDosDate1980 = (0 << 9) | (1 << 5) | 1;  // 1980-01-01
constexpr std::uint16_t kMethodStored = 0;
constexpr std::uint16_t kMethodDeflate = 8;

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint16_t get16(const std::string& in, std::size_t at) {
  if (at + 2 > in.size()) throw Error(ErrorCode::InvalidArgument, "zip: truncated");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(in[at]) |
                                    (static_cast<unsigned char>(in[at + 1]) << 8));
}

std::uint32_t get32(const std::string& in, std::size_t at) {
  return static_cast<std::uint32_t>(get16(in, at)) |
         (static_cast<std::uint32_t>(get16(in, at + 2)) << 16);
}

std::uint32_t crc_of(const std::string& data) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
}

std::string inflate_raw(const std::string& compressed, std::size_t expected_size) {
  std::string out(expected_size, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error(ErrorCode::InvalidArgument, "zip: inflate");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
  zs.avail_in = static_cast<uInt>(compressed.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error(ErrorCode::InvalidArgument, "zip: corrupt deflate stream");
  return out;
}

}  // namespace

std::string write_zip(const std::vector<ZipEntry>& entries) {
  std::string out;
  std::string central;
  for (const ZipEntry& e : entries) {
    const auto offset = static_cast<std::uint32_t>(out.size());
    const std::uint32_t crc = crc_of(e.data);
    const auto size = static_cast<std::uint32_t>(e.data.size());
    const auto name_len = static_cast<std::uint16_t>(e.name.size());

    put32(out, kLocalHeaderSig);
    put16(out, 20);  // version needed
    put16(out, 0);   // flags
    put16(out, kMethodStored);
    put16(out, 0);  // mod time
    put16(out, kDosDate1980);
    put32(out, crc);
    put32(out, size);
    put32(out, size);
    put16(out, name_len);
    put16(out, 0);  // extra length
    out += e.name;
    out += e.data;

    put32(central, kCentralHeaderSig);
    put16(central, 20);  // version made by
    put16(central, 20);
    put16(central, 0);
    put16(central, kMethodStored);
    put16(central, 0);
    put16(central, kDosDate1980);
    put32(central, crc);
    put32(central, size);
    put32(central, size);
    put16(central, name_len);
    put16(central, 0);  // extra
    put16(central, 0);  // comment
    put16(central, 0);  // disk
    put16(central, 0);  // internal attrs
    put32(central, 0);  // external attrs
    put32(central, offset);
    central += e.name;
  }
  const auto central_offset = static_cast<std::uint32_t>(out.size());
  out += central;
  put32(out, kEndOfCentralSig);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put32(out, static_cast<std::uint32_t>(central.size()));
  put32(out, central_offset);
  put16(out, 0);
  return out;
}

std::vector<ZipEntry> read_zip(const std::string& archive) {
  if (archive.size() < 22) throw Error(ErrorCode::InvalidArgument, "zip: too short");
  std::size_t eocd = archive.size() - 22;
  while (get32(archive, eocd) != kEndOfCentralSig) {
    if (eocd == 0) throw Error(ErrorCode::InvalidArgument, "zip: no end-of-central-directory");
    --eocd;
  }
  const std::uint16_t count = get16(archive, eocd + 10);
  std::size_t at = get32(archive, eocd + 16);

  std::vector<ZipEntry> entries;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (get32(archive, at) != kCentralHeaderSig) {
      throw Error(ErrorCode::InvalidArgument, "zip: bad central header");
    }
    const std::uint16_t method = get16(archive, at + 10);
    const std::uint32_t crc = get32(archive, at + 16);
    const std::uint32_t packed = get32(archive, at + 20);
    const std::uint32_t size = get32(archive, at + 24);
    const std::uint16_t name_len = get16(archive, at + 28);
    const std::uint16_t extra_len = get16(archive, at + 30);
    const std::uint16_t comment_len = get16(archive, at + 32);
    const std::uint32_t local = get32(archive, at + 42);
    ZipEntry e;
    e.name = archive.substr(at + 46, name_len);

    const std::size_t data_at = local + 30 + get16(archive, local + 26) + get16(archive, local + 28);
    if (data_at + packed > archive.size()) throw Error(ErrorCode::InvalidArgument, "zip: truncated");
    const std::string raw = archive.substr(data_at, packed);
    if (method == kMethodStored) {
      e.data = raw;
    } else if (method == kMethodDeflate) {
      e.data = inflate_raw(raw, size);
    } else {
      throw Error(ErrorCode::InvalidArgument, "zip: unsupported method " + std::to_string(method));
    }
    if (crc_of(e.data) != crc) throw Error(ErrorCode::InvalidArgument, "zip: CRC mismatch");
    entries.push_back(std::move(e));
    at += 46 + name_len + extra_len + comment_len;
  }
  return entries;
}

}  // namespace slicehub
