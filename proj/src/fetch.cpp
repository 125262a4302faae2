#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <openssl/evp.h>

#include <memory>

#include "depsentry/errors.hpp"
#include "depsentry/ingest.hpp"
#include "depsentry/text.hpp"

namespace depsentry {

namespace {

struct Url {
  std::string origin;
  std::string path;
};

std::optional<Url> split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) return std::nullopt;
  const std::string scheme = text::to_lower(url.substr(0, scheme_end));
  if (scheme != "http" && scheme != "https") return std::nullopt;
  const auto host_start = scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  const auto host = url.substr(host_start, path_start == std::string_view::npos ? url.npos : path_start - host_start);
  if (host.empty() || host.find_first_of(" \t@") != std::string_view::npos) return std::nullopt;
  Url out;
  out.origin = std::string(url.substr(0, path_start == std::string_view::npos ? url.size() : path_start));
  out.path = path_start == std::string_view::npos ? "/" : std::string(url.substr(path_start));
  return out;
}

std::string http_get(const std::string& url, const std::optional<std::string>& auth) {
  const auto parts = split_url(url);
  if (!parts) throw Error(ErrorCode::NetworkError, "invalid URL: " + url);
  httplib::Client client(parts->origin);
  client.set_follow_location(true);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);
  httplib::Headers headers;
  if (auth && !auth->empty()) headers.emplace("Authorization", "Bearer " + *auth);
  auto res = client.Get(parts->path, headers);
  if (!res) throw Error(ErrorCode::NetworkError, url + ": " + httplib::to_string(res.error()));
  if (res->status == 404 || res->status == 410) throw Error(ErrorCode::NotFound, url);
  if (res->status != 200)
    throw Error(ErrorCode::NetworkError, url + ": HTTP status " + std::to_string(res->status));
  return std::move(res->body);
}

std::string json_pointer_string(const std::string& body, const std::string& pointer,
                                const std::string& url) {
  nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::NetworkError, "registry response is not JSON: " + url);
  try {
    const auto& v = doc.at(nlohmann::json::json_pointer(pointer));
    if (!v.is_string()) throw Error(ErrorCode::NotFound, pointer + " is not a string in " + url);
    return v.get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::NotFound, pointer + " missing in " + url);
  }
}

const EVP_MD* digest_for(std::string_view algorithm) {
  const std::string a = text::to_lower(algorithm);
  if (a == "sha1") return EVP_sha1();
  if (a == "sha256") return EVP_sha256();
  if (a == "sha512") return EVP_sha512();
  return nullptr;
}

std::string raw_digest(const EVP_MD* md, std::string_view bytes) {
  unsigned char out[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out, &len, md, nullptr) != 1)
    throw Error(ErrorCode::ChecksumMismatch, "digest computation failed");
  return std::string(reinterpret_cast<char*>(out), len);
}

std::string to_hex(std::string_view raw) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : raw) {
    out.push_back(kHex[c >> 4]);
    out.push_back(kHex[c & 15]);
  }
  return out;
}

std::optional<std::string> base64_decode(std::string_view in) {
  if (in.empty() || in.size() % 4 != 0) return std::nullopt;
  std::string out(in.size() / 4 * 3, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(in.data()), static_cast<int>(in.size()));
  if (n < 0) return std::nullopt;
  std::size_t len = static_cast<std::size_t>(n);
  if (in.ends_with("==")) len -= 2;
  else if (in.ends_with("=")) len -= 1;
  out.resize(len);
  return out;
}

}  // namespace

RegistrySource RegistrySource::from_config(const Config& config, Ecosystem eco) {
  if (eco == Ecosystem::Go)
    throw Error(ErrorCode::UnsupportedFormat, "go modules are scanned from local directories only");
  const auto& reg = config.registry();
  const std::string key(to_string(eco));
  if (!reg.contains(key)) throw Error(ErrorCode::UnsupportedFormat, "no registry configured for " + key);
  RegistrySource src;
  src.ecosystem = eco;
  src.endpoints = reg.at(key);
  src.base_url = src.endpoints.value("base_url", "");
  while (src.base_url.ends_with('/')) src.base_url.pop_back();
  if (!split_url(src.base_url)) throw Error(ErrorCode::ConfigInvalid, "registry." + key + ".base_url is not an absolute URL");
  if (src.endpoints.contains("auth_token") && src.endpoints["auth_token"].is_string())
    src.auth = src.endpoints["auth_token"].get<std::string>();
  if (!src.endpoints.contains("archive_url"))
    throw Error(ErrorCode::ConfigInvalid, "registry." + key + ".archive_url missing");
  return src;
}

std::string expand_url_template(std::string_view tmpl, const PackageCoordinates& coords,
                                std::string_view base, std::string_view archive_url) {
  std::string group, artifact = coords.name;
  if (const auto colon = coords.name.find(':'); colon != std::string::npos) {
    group = coords.name.substr(0, colon);
    artifact = coords.name.substr(colon + 1);
  }
  std::string group_path = group;
  std::replace(group_path.begin(), group_path.end(), '.', '/');
  const std::string basename(text::basename(coords.name));
  const std::pair<std::string_view, std::string_view> vars[] = {
      {"{base}", base},           {"{name}", coords.name},   {"{basename}", basename},
      {"{version}", coords.version}, {"{group}", group},     {"{group_path}", group_path},
      {"{artifact}", artifact},   {"{archive_url}", archive_url}};
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    bool replaced = false;
    if (tmpl[i] == '{') {
      for (const auto& [k, v] : vars) {
        if (tmpl.substr(i, k.size()) == k) {
          out += v;
          i += k.size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out.push_back(tmpl[i++]);
  }
  return out;
}

std::string hex_digest(std::string_view algorithm, std::string_view bytes) {
  const EVP_MD* md = digest_for(algorithm);
  if (md == nullptr) throw Error(ErrorCode::ConfigInvalid, "unknown digest algorithm " + std::string(algorithm));
  return to_hex(raw_digest(md, bytes));
}

bool digest_matches(std::string_view algorithm, std::string_view expected, std::string_view bytes) {
  const std::string e = text::trim(expected);
  if (const auto dash = e.find('-'); dash != std::string::npos && digest_for(e.substr(0, dash))) {
    const auto decoded = base64_decode(std::string_view(e).substr(dash + 1));
    return decoded && *decoded == raw_digest(digest_for(e.substr(0, dash)), bytes);
  }
  return text::to_lower(e) == hex_digest(algorithm, bytes);
}

FetchedArchive fetch_package(const PackageCoordinates& coords, const RegistrySource& source) {
  if (coords.name.empty() || coords.version.empty())
    throw Error(ErrorCode::NotFound, "fetching requires a name and an exact version");
  if (source.ecosystem == Ecosystem::Maven && coords.name.find(':') == std::string::npos)
    throw Error(ErrorCode::NotFound, "maven coordinates must be group:artifact");
  const auto& ep = source.endpoints;
  FetchedArchive out;
  out.url = expand_url_template(ep.at("archive_url").get<std::string>(), coords, source.base_url);
  if (ep.contains("archive_url_json_pointer")) {
    const std::string index = http_get(out.url, source.auth);
    out.url = json_pointer_string(index, ep["archive_url_json_pointer"].get<std::string>(), out.url);
  }
  out.bytes = http_get(out.url, source.auth);
  const std::string fmt = ep.value("format", "auto");
  if (fmt == "tar") out.format = archive::Format::Tar;
  else if (fmt == "tar.gz") out.format = archive::Format::TarGz;
  else if (fmt == "zip") out.format = archive::Format::Zip;
  if (const auto sniffed = archive::sniff(out.bytes)) out.format = sniffed;
  else if (!out.format) out.format = archive::format_for_name(out.url);

  if (!ep.contains("digest_url")) {
    out.notes.push_back("registry publishes no digest; archive not verified: " + out.url);
    return out;
  }
  const std::string digest_url =
      expand_url_template(ep["digest_url"].get<std::string>(), coords, source.base_url, out.url);
  std::string expected;
  try {
    const std::string body = http_get(digest_url, source.auth);
    if (ep.contains("digest_json_pointer")) {
      expected = json_pointer_string(body, ep["digest_json_pointer"].get<std::string>(), digest_url);
    } else {
      const std::string t = text::trim(body);
      expected = t.substr(0, t.find_first_of(" \t\r\n"));
    }
  } catch (const Error& e) {
    out.notes.push_back("digest unavailable (" + std::string(e.what()) + "); archive not verified");
    return out;
  }
  const std::string algorithm = ep.value("digest_algorithm", "sha256");
  if (!digest_matches(algorithm, expected, out.bytes))
    throw Error(ErrorCode::ChecksumMismatch, out.url + ": expected " + algorithm + " " + expected +
                                                 ", got " + hex_digest(algorithm, out.bytes));
  return out;
}

}  // namespace depsentry
