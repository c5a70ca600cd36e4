#pragma once

// cpp-httplib backed Transport for ingest::fetch_submissions, with an optional
// on-disk response cache (REVIEWLENS_CACHE_DIR).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <httplib.h>

#include "reviewlens/hash.hpp"
#include "reviewlens/ingest.hpp"

namespace reviewlens::ingest {

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

inline UrlParts split_base_url(const std::string& base) {
  auto scheme = base.find("://");
  std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  auto slash = base.find('/', host_start);
  UrlParts u;
  u.origin = base.substr(0, slash);
  if (slash != std::string::npos) u.prefix = base.substr(slash);
  while (!u.prefix.empty() && u.prefix.back() == '/') u.prefix.pop_back();
  return u;
}

inline std::optional<std::filesystem::path> cache_dir_from_env() {
  const char* v = std::getenv("REVIEWLENS_CACHE_DIR");
  if (!v || !*v) return std::nullopt;
  return std::filesystem::path(v);
}

// Successful (200) responses are cached under sha256(url).json when a cache
// directory is configured; cached responses are served without a request.
inline Transport http_transport(const FetchConfig& cfg,
                                std::optional<std::filesystem::path> cache_dir = cache_dir_from_env()) {
  UrlParts url = split_base_url(cfg.base_url);
  return [url, token = cfg.auth_token, cache_dir](const std::string& target) -> HttpResponse {
    std::optional<std::filesystem::path> cached;
    if (cache_dir) {
      cached = *cache_dir / (sha256_hex(url.origin + url.prefix + target) + ".json");
      if (std::filesystem::exists(*cached)) return {200, read_file(*cached)};
    }
    httplib::Client client(url.origin);
    client.set_follow_location(true);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);
    httplib::Headers headers;
    if (token) headers.emplace("Authorization", "Bearer " + *token);
    auto res = client.Get(url.prefix + target, headers);
    if (!res) return {0, {}};
    if (res->status == 200 && cached) {
      std::filesystem::create_directories(*cache_dir);
      std::ofstream(*cached, std::ios::binary) << res->body;
    }
    return {res->status, res->body};
  };
}

}  // namespace reviewlens::ingest
