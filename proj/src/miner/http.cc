// Copyright 2026 The histmut Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "http.h"

#include <httplib.h>

#include "histmut/error.h"

namespace histmut::internal {

Url SplitUrl(const std::string& url) {
  size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "not an absolute URL: " + url);
  }
  size_t slash = url.find('/', scheme + 3);
  Url out;
  out.origin = url.substr(0, slash);
  if (slash != std::string::npos) out.path = url.substr(slash);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

namespace {

HttpResponse Convert(const httplib::Result& res) {
  HttpResponse out;
  if (!res) return out;
  out.status = res->status;
  out.body = res->body;
  out.retry_after = res->get_header_value("Retry-After");
  return out;
}

httplib::Headers ToHeaders(const Headers& headers) {
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  return h;
}

}  // namespace

HttpResponse HttpGet(const std::string& origin, const std::string& path_and_query,
                     const Headers& headers, int timeout_s) {
  httplib::Client client(origin);
  client.set_connection_timeout(timeout_s);
  client.set_read_timeout(timeout_s);
  client.set_follow_location(true);
  return Convert(client.Get(path_and_query, ToHeaders(headers)));
}

HttpResponse HttpPost(const std::string& origin, const std::string& path,
                      const Headers& headers, const std::string& body,
                      const std::string& content_type, int timeout_s) {
  httplib::Client client(origin);
  client.set_connection_timeout(timeout_s);
  client.set_read_timeout(timeout_s);
  client.set_write_timeout(timeout_s);
  return Convert(client.Post(path, ToHeaders(headers), body, content_type));
}

std::string UrlEncode(const std::string& s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

}  // namespace histmut::internal
