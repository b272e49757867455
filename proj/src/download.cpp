#include "ekma/download.hpp"

#include <httplib.h>
#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "ekma/error.hpp"

namespace ekma {

namespace fs = std::filesystem;

std::string airdata_archive_name(int parameter_code, int year) {
  return "hourly_" + std::to_string(parameter_code) + "_" + std::to_string(year) + ".zip";
}

std::string airdata_url(int parameter_code, int year, std::string_view base_url) {
  std::string url(base_url);
  if (!url.empty() && url.back() == '/') url.pop_back();
  return url + "/" + airdata_archive_name(parameter_code, year);
}

namespace {

constexpr std::uint32_t kLocalHeaderSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::uint32_t kZip64LocatorSig = 0x07064b50;
constexpr std::uint32_t kZip64EndSig = 0x06064b50;

std::uint64_t read_le(std::string_view bytes, std::size_t pos, int width) {
  if (pos + static_cast<std::size_t>(width) > bytes.size()) {
    throw FormatError("zip: truncated archive");
  }
  std::uint64_t v = 0;
  for (int i = width - 1; i >= 0; --i) {
    v = (v << 8) | static_cast<unsigned char>(bytes[pos + static_cast<std::size_t>(i)]);
  }
  return v;
}

struct Member {
  std::string name;
  int method = 0;
  std::uint64_t compressed = 0;
  std::uint64_t uncompressed = 0;
  std::uint64_t local_offset = 0;
};

std::vector<Member> read_central_directory(std::string_view zip) {
  if (zip.size() < 22) throw FormatError("zip: truncated archive");
  std::size_t eocd = std::string_view::npos;
  const std::size_t lowest = zip.size() > 22 + 65535 ? zip.size() - 22 - 65535 : 0;
  for (std::size_t p = zip.size() - 22 + 1; p-- > lowest;) {
    if (read_le(zip, p, 4) == kEndSig) {
      eocd = p;
      break;
    }
  }
  if (eocd == std::string_view::npos) throw FormatError("zip: end of central directory not found");

  std::uint64_t count = read_le(zip, eocd + 10, 2);
  std::uint64_t offset = read_le(zip, eocd + 16, 4);
  if ((count == 0xFFFF || offset == 0xFFFFFFFF) && eocd >= 20 && read_le(zip, eocd - 20, 4) == kZip64LocatorSig) {
    const std::uint64_t z64 = read_le(zip, eocd - 20 + 8, 8);
    if (read_le(zip, z64, 4) != kZip64EndSig) throw FormatError("zip: bad zip64 record");
    count = read_le(zip, z64 + 32, 8);
    offset = read_le(zip, z64 + 48, 8);
  }

  std::vector<Member> members;
  std::size_t p = offset;
  for (std::uint64_t i = 0; i < count; ++i) {
    if (read_le(zip, p, 4) != kCentralSig) throw FormatError("zip: bad central directory entry");
    Member m;
    m.method = static_cast<int>(read_le(zip, p + 10, 2));
    m.compressed = read_le(zip, p + 20, 4);
    m.uncompressed = read_le(zip, p + 24, 4);
    const std::size_t name_len = read_le(zip, p + 28, 2);
    const std::size_t extra_len = read_le(zip, p + 30, 2);
    const std::size_t comment_len = read_le(zip, p + 32, 2);
    m.local_offset = read_le(zip, p + 42, 4);
    m.name = std::string(zip.substr(p + 46, name_len));
    // zip64 extended information: present fields appear in fixed order.
    std::size_t e = p + 46 + name_len;
    const std::size_t e_end = e + extra_len;
    while (e + 4 <= e_end) {
      const auto id = read_le(zip, e, 2);
      const auto len = read_le(zip, e + 2, 2);
      if (id == 0x0001) {
        std::size_t q = e + 4;
        if (m.uncompressed == 0xFFFFFFFF) { m.uncompressed = read_le(zip, q, 8); q += 8; }
        if (m.compressed == 0xFFFFFFFF) { m.compressed = read_le(zip, q, 8); q += 8; }
        if (m.local_offset == 0xFFFFFFFF) { m.local_offset = read_le(zip, q, 8); }
      }
      e += 4 + len;
    }
    members.push_back(std::move(m));
    p += 46 + name_len + extra_len + comment_len;
  }
  return members;
}

bool has_csv_suffix(const std::string& name) {
  if (name.size() < 4) return false;
  std::string ext = name.substr(name.size() - 4);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv";
}

void inflate_to(std::string_view data, std::ofstream& out) {
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error("zip: inflateInit failed");
  std::vector<char> buf(1 << 16);
  std::size_t consumed = 0;
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    if (zs.avail_in == 0 && consumed < data.size()) {
      const std::size_t chunk = std::min<std::size_t>(data.size() - consumed, 1u << 30);
      zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data() + consumed));
      zs.avail_in = static_cast<uInt>(chunk);
      consumed += chunk;
    }
    zs.next_out = reinterpret_cast<Bytef*>(buf.data());
    zs.avail_out = static_cast<uInt>(buf.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw FormatError("zip: corrupt deflate stream");
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size() - zs.avail_out));
    if (rc == Z_OK && zs.avail_in == 0 && consumed >= data.size() && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw FormatError("zip: truncated deflate stream");
    }
  }
  inflateEnd(&zs);
}

}  // namespace

std::string extract_single_csv(std::string_view zip, const fs::path& out_path) {
  if (zip.size() < 4 || read_le(zip, 0, 4) != kLocalHeaderSig) {
    throw FormatError("payload is not a ZIP archive");
  }
  const auto members = read_central_directory(zip);
  if (members.size() != 1 || !has_csv_suffix(members.front().name)) {
    throw FormatError("zip: expected exactly one CSV member, found " + std::to_string(members.size()) + " member(s)");
  }
  const Member& m = members.front();
  if (read_le(zip, m.local_offset, 4) != kLocalHeaderSig) throw FormatError("zip: bad local header");
  const std::size_t name_len = read_le(zip, m.local_offset + 26, 2);
  const std::size_t extra_len = read_le(zip, m.local_offset + 28, 2);
  const std::size_t start = m.local_offset + 30 + name_len + extra_len;
  if (start + m.compressed > zip.size()) throw FormatError("zip: truncated member data");
  const std::string_view data = zip.substr(start, m.compressed);

  const fs::path tmp = out_path.string() + ".part";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    if (m.method == 0) {
      out.write(data.data(), static_cast<std::streamsize>(data.size()));
    } else if (m.method == 8) {
      inflate_to(data, out);
    } else {
      throw FormatError("zip: unsupported compression method " + std::to_string(m.method));
    }
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, out_path);
  return m.name;
}

fs::path download_airdata(int parameter_code, int year, const fs::path& dest, const DownloadOptions& options) {
  const std::string archive = airdata_archive_name(parameter_code, year);
  const fs::path csv_path = dest / (archive.substr(0, archive.size() - 4) + ".csv");
  if (fs::exists(csv_path)) {
    return csv_path;
  }
  fs::create_directories(dest);

  const std::string url = airdata_url(parameter_code, year, options.base_url);
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (scheme_end == std::string::npos || path_start == std::string::npos) {
    throw Error("malformed archive URL: " + url);
  }
  httplib::Client client(url.substr(0, path_start));
  client.set_follow_location(true);
  client.set_connection_timeout(options.timeout_seconds);
  client.set_read_timeout(options.timeout_seconds);
  const auto res = client.Get(url.substr(path_start));
  if (!res) {
    throw HttpError("GET " + url + " failed: " + httplib::to_string(res.error()), 0, true);
  }
  if (res->status < 200 || res->status >= 300) {
    throw HttpError("GET " + url + " returned HTTP " + std::to_string(res->status), res->status, true);
  }
  extract_single_csv(res->body, csv_path);
  return csv_path;
}

}  // namespace ekma
