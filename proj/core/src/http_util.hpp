#pragma once

#include <chrono>
#include <regex>
#include <string>

#include <httplib.h>

#include "factalign/error.hpp"

namespace factalign::detail {

struct Url {
  std::string scheme_host_port;
  std::string path;
};

inline Url split_url(const std::string& url, const std::string& default_path) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw Error(ErrorCode::kInvalidConfig, "endpoint is not an http(s) URL", url);
  }
  return {m[1].str(), m[2].matched ? m[2].str() : default_path};
}

inline void configure_client(httplib::Client& cli, std::chrono::milliseconds timeout,
                             const std::string& bearer) {
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());
  if (!bearer.empty()) cli.set_bearer_token_auth(bearer);
}

}  // namespace factalign::detail
