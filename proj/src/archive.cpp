#include "depsentry/archive.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>

#include "depsentry/errors.hpp"
#include "depsentry/text.hpp"

namespace depsentry::archive {

namespace {

constexpr std::size_t kBlock = 512;

[[noreturn]] void corrupt(const std::string& why) { throw Error(ErrorCode::ArchiveCorrupt, why); }

std::uint16_t le16(std::string_view b, std::size_t at) {
  if (at + 2 > b.size()) corrupt("truncated zip structure");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

std::uint32_t le32(std::string_view b, std::size_t at) {
  if (at + 4 > b.size()) corrupt("truncated zip structure");
  return static_cast<std::uint32_t>(le16(b, at)) | (static_cast<std::uint32_t>(le16(b, at + 2)) << 16);
}

std::string_view field(std::string_view header, std::size_t off, std::size_t len) {
  std::string_view f = header.substr(off, len);
  const auto nul = f.find('\0');
  return nul == std::string_view::npos ? f : f.substr(0, nul);
}

std::uint64_t tar_number(std::string_view header, std::size_t off, std::size_t len) {
  const std::string_view f = header.substr(off, len);
  if (!f.empty() && (static_cast<unsigned char>(f[0]) & 0x80)) {
    std::uint64_t v = static_cast<unsigned char>(f[0]) & 0x7F;
    for (std::size_t i = 1; i < f.size(); ++i) {
      if (v >> 55) corrupt("tar size field overflow");
      v = (v << 8) | static_cast<unsigned char>(f[i]);
    }
    return v;
  }
  std::uint64_t v = 0;
  bool seen = false;
  for (char c : f) {
    if (c == ' ' || c == '\0') {
      if (seen) break;
      continue;
    }
    if (c < '0' || c > '7') corrupt("invalid octal field in tar header");
    if (v >> 60) corrupt("tar numeric field overflow");
    v = v * 8 + static_cast<std::uint64_t>(c - '0');
    seen = true;
  }
  return v;
}

bool all_zero(std::string_view block) {
  return std::all_of(block.begin(), block.end(), [](char c) { return c == '\0'; });
}

void parse_pax(std::string_view data, std::string& path, std::string& linkpath) {
  std::size_t p = 0;
  while (p < data.size()) {
    const auto sp = data.find(' ', p);
    if (sp == std::string_view::npos) break;
    std::size_t len = 0;
    for (std::size_t i = p; i < sp; ++i) {
      if (data[i] < '0' || data[i] > '9') corrupt("invalid pax record");
      len = len * 10 + static_cast<std::size_t>(data[i] - '0');
    }
    if (len == 0 || p + len > data.size()) corrupt("invalid pax record length");
    std::string_view rec = data.substr(sp + 1, p + len - sp - 1);
    if (!rec.empty() && rec.back() == '\n') rec.remove_suffix(1);
    const auto eq = rec.find('=');
    if (eq != std::string_view::npos) {
      const auto key = rec.substr(0, eq);
      const auto value = rec.substr(eq + 1);
      if (key == "path") path = std::string(value);
      if (key == "linkpath") linkpath = std::string(value);
    }
    p += len;
  }
}

std::string inflate_raw(std::string_view in, std::uint64_t expected, std::uint64_t max_output) {
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) corrupt("zlib init failed");
  std::string out;
  out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(expected, max_output)));
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  char buf[1 << 15];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof(buf);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      corrupt("deflate stream corrupt");
    }
    out.append(buf, sizeof(buf) - zs.avail_out);
    if (out.size() > max_output) {
      inflateEnd(&zs);
      corrupt("decompressed size exceeds limit");
    }
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      corrupt("truncated deflate stream");
    }
  }
  inflateEnd(&zs);
  return out;
}

}  // namespace

std::string_view to_string(Format f) {
  switch (f) {
    case Format::Tar: return "tar";
    case Format::TarGz: return "tar.gz";
    case Format::Zip: return "zip";
  }
  return "tar";
}

std::optional<Format> sniff(std::string_view b) {
  if (b.size() >= 2 && static_cast<unsigned char>(b[0]) == 0x1f &&
      static_cast<unsigned char>(b[1]) == 0x8b)
    return Format::TarGz;
  if (b.size() >= 4 && b.substr(0, 2) == "PK" &&
      ((b[2] == 3 && b[3] == 4) || (b[2] == 5 && b[3] == 6)))
    return Format::Zip;
  if (b.size() >= 262 && b.substr(257, 5) == "ustar") return Format::Tar;
  return std::nullopt;
}

std::optional<Format> format_for_name(std::string_view name) {
  const std::string lower = text::to_lower(name);
  auto ends = [&](std::string_view s) { return lower.size() >= s.size() && lower.ends_with(s); };
  if (ends(".tar.gz") || ends(".tgz") || ends(".crate")) return Format::TarGz;
  if (ends(".tar") || ends(".gem")) return Format::Tar;
  if (ends(".zip") || ends(".whl") || ends(".jar") || ends(".egg") || ends(".nupkg"))
    return Format::Zip;
  return std::nullopt;
}

std::string normalize_path(std::string_view raw) {
  std::string s(raw);
  std::replace(s.begin(), s.end(), '\\', '/');
  if (!s.empty() && s[0] == '/') throw Error(ErrorCode::PathTraversalRejected, "absolute path: " + s);
  if (s.size() >= 2 && s[1] == ':' &&
      ((s[0] >= 'a' && s[0] <= 'z') || (s[0] >= 'A' && s[0] <= 'Z')))
    throw Error(ErrorCode::PathTraversalRejected, "absolute path: " + s);
  std::vector<std::string> parts;
  for (auto& seg : text::split(s, '/')) {
    if (seg.empty() || seg == ".") continue;
    if (seg == "..") {
      if (parts.empty())
        throw Error(ErrorCode::PathTraversalRejected, "entry escapes archive root: " + std::string(raw));
      parts.pop_back();
      continue;
    }
    parts.push_back(seg);
  }
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back('/');
    out += parts[i];
  }
  return out;
}

std::string gunzip(std::string_view bytes, std::uint64_t max_output) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) corrupt("zlib init failed");
  std::string out;
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  zs.avail_in = static_cast<uInt>(bytes.size());
  char buf[1 << 15];
  while (true) {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof(buf);
    const int rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      corrupt("gzip stream corrupt");
    }
    out.append(buf, sizeof(buf) - zs.avail_out);
    if (out.size() > max_output) {
      inflateEnd(&zs);
      corrupt("decompressed size exceeds limit");
    }
    if (rc == Z_STREAM_END) {
      // concatenated members
      if (zs.avail_in == 0) break;
      if (inflateReset(&zs) != Z_OK) {
        inflateEnd(&zs);
        corrupt("gzip stream corrupt");
      }
      continue;
    }
    if (zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      corrupt("truncated gzip stream");
    }
  }
  inflateEnd(&zs);
  return out;
}

Listing read_tar(std::string_view bytes, const Limits& limits) {
  Listing out;
  std::size_t pos = 0;
  std::string long_name;
  std::string long_link;
  std::string pax_path;
  std::string pax_link;
  std::uint64_t total = 0;
  bool ended = false;
  while (pos + kBlock <= bytes.size()) {
    const std::string_view h = bytes.substr(pos, kBlock);
    if (all_zero(h)) {
      ended = true;
      break;
    }
    const std::uint64_t stored = tar_number(h, 148, 8);
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < kBlock; ++i)
      sum += (i >= 148 && i < 156) ? ' ' : static_cast<unsigned char>(h[i]);
    if (sum != stored) corrupt("tar header checksum mismatch at offset " + std::to_string(pos));
    const std::uint64_t size = tar_number(h, 124, 12);
    const char type = h[156];
    const std::size_t data_at = pos + kBlock;
    if (size > bytes.size() - data_at) corrupt("tar entry data truncated");
    const std::string_view data = bytes.substr(data_at, static_cast<std::size_t>(size));
    pos = data_at + static_cast<std::size_t>((size + kBlock - 1) / kBlock * kBlock);

    if (type == 'L') {
      long_name = std::string(field(data, 0, data.size()));
      continue;
    }
    if (type == 'K') {
      long_link = std::string(field(data, 0, data.size()));
      continue;
    }
    if (type == 'x') {
      parse_pax(data, pax_path, pax_link);
      continue;
    }
    if (type == 'g') continue;

    std::string name;
    if (!pax_path.empty()) {
      name = pax_path;
    } else if (!long_name.empty()) {
      name = long_name;
    } else {
      name = std::string(field(h, 0, 100));
      const std::string_view prefix = h.substr(257, 5) == "ustar" ? field(h, 345, 155) : "";
      if (!prefix.empty()) name = std::string(prefix) + "/" + name;
    }
    std::string link = !pax_link.empty() ? pax_link : !long_link.empty() ? long_link
                                                                          : std::string(field(h, 157, 100));
    long_name.clear();
    long_link.clear();
    pax_path.clear();
    pax_link.clear();

    if (out.entries.size() >= limits.max_entries) corrupt("archive entry count exceeds limit");
    Entry e;
    e.path = normalize_path(name);
    if (e.path.empty()) continue;
    e.size = size;
    if (type == '5') {
      e.directory = true;
    } else if (type == '2' || type == '1') {
      e.symlink = true;
      e.link_target = link;
      e.size = 0;
    } else if (type == '0' || type == '\0' || type == '7') {
      total += size;
      if (total > limits.max_total_bytes) corrupt("archive content exceeds size limit");
      if (size > limits.max_file_size) {
        e.content_skipped = true;
      } else {
        e.content = std::string(data);
      }
    } else {
      out.notes.push_back("tar entry of unsupported type '" + std::string(1, type) + "' skipped: " + e.path);
      continue;
    }
    out.entries.push_back(std::move(e));
  }
  if (!ended && pos < bytes.size()) corrupt("trailing partial tar block");
  if (!ended && bytes.empty()) corrupt("empty tar archive");
  return out;
}

Listing read_zip(std::string_view b, const Limits& limits) {
  Listing out;
  if (b.size() < 22) corrupt("zip too short");
  std::size_t eocd = std::string_view::npos;
  const std::size_t lowest = b.size() > 22 + 65535 ? b.size() - 22 - 65535 : 0;
  for (std::size_t p = b.size() - 22 + 1; p-- > lowest;) {
    if (le32(b, p) == 0x06054b50) {
      eocd = p;
      break;
    }
  }
  if (eocd == std::string_view::npos) corrupt("zip end of central directory not found");
  const std::uint16_t count = le16(b, eocd + 10);
  const std::uint32_t cd_size = le32(b, eocd + 12);
  const std::uint32_t cd_off = le32(b, eocd + 16);
  if (count == 0xFFFF || cd_off == 0xFFFFFFFFu) throw Error(ErrorCode::UnsupportedFormat, "zip64 archives are not supported");
  if (static_cast<std::uint64_t>(cd_off) + cd_size > b.size()) corrupt("zip central directory out of range");
  if (count > limits.max_entries) corrupt("archive entry count exceeds limit");
  std::size_t p = cd_off;
  std::uint64_t total = 0;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (le32(b, p) != 0x02014b50) corrupt("bad zip central directory signature");
    const std::uint16_t made_by = le16(b, p + 4);
    const std::uint16_t flags = le16(b, p + 8);
    const std::uint16_t method = le16(b, p + 10);
    const std::uint32_t crc = le32(b, p + 16);
    const std::uint32_t csize = le32(b, p + 20);
    const std::uint32_t usize = le32(b, p + 24);
    const std::uint16_t nlen = le16(b, p + 28);
    const std::uint16_t xlen = le16(b, p + 30);
    const std::uint16_t clen = le16(b, p + 32);
    const std::uint32_t ext_attr = le32(b, p + 38);
    const std::uint32_t local = le32(b, p + 42);
    if (p + 46 + nlen > b.size()) corrupt("zip name out of range");
    const std::string raw_name(b.substr(p + 46, nlen));
    p += 46 + nlen + xlen + clen;

    Entry e;
    e.path = normalize_path(raw_name);
    if (e.path.empty()) continue;
    e.size = usize;
    if (raw_name.back() == '/' || raw_name.back() == '\\') {
      e.directory = true;
      out.entries.push_back(std::move(e));
      continue;
    }
    if (le32(b, local) != 0x04034b50) corrupt("bad zip local header signature");
    const std::size_t data_at = local + 30 + le16(b, local + 26) + le16(b, local + 28);
    if (static_cast<std::uint64_t>(data_at) + csize > b.size()) corrupt("zip entry data out of range");
    const std::string_view data = b.substr(data_at, csize);
    const bool unix_host = (made_by >> 8) == 3;
    const bool is_link = unix_host && ((ext_attr >> 16) & 0170000) == 0120000;
    total += usize;
    if (total > limits.max_total_bytes) corrupt("archive content exceeds size limit");
    if (flags & 1) {
      e.content_skipped = true;
      out.notes.push_back("encrypted zip entry not read: " + e.path);
      out.entries.push_back(std::move(e));
      continue;
    }
    if (usize > limits.max_file_size && !is_link) {
      e.content_skipped = true;
      out.entries.push_back(std::move(e));
      continue;
    }
    std::string content;
    if (method == 0) {
      content = std::string(data);
    } else if (method == 8) {
      content = inflate_raw(data, usize, std::min<std::uint64_t>(limits.max_file_size, limits.max_total_bytes));
    } else {
      e.content_skipped = true;
      out.notes.push_back("zip compression method " + std::to_string(method) + " not supported: " + e.path);
      out.entries.push_back(std::move(e));
      continue;
    }
    if (content.size() != usize) corrupt("zip entry size mismatch: " + e.path);
    const auto actual = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(content.data()), static_cast<uInt>(content.size())));
    if (actual != crc) corrupt("zip entry CRC mismatch: " + e.path);
    if (is_link) {
      e.symlink = true;
      e.link_target = std::move(content);
      e.size = 0;
    } else {
      e.content = std::move(content);
    }
    out.entries.push_back(std::move(e));
  }
  return out;
}

Listing read(std::string_view bytes, Format format, const Limits& limits) {
  switch (format) {
    case Format::Tar: return read_tar(bytes, limits);
    case Format::TarGz: {
      const std::string inner = gunzip(bytes, limits.max_total_bytes);
      return read_tar(inner, limits);
    }
    case Format::Zip: return read_zip(bytes, limits);
  }
  throw Error(ErrorCode::UnsupportedFormat, "unknown archive format");
}

}  // namespace depsentry::archive
