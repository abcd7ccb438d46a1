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

#ifndef HISTMUT_SRC_MINER_HTTP_H_
#define HISTMUT_SRC_MINER_HTTP_H_

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace histmut::internal {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // path prefix without trailing slash
};

Url SplitUrl(const std::string& url);

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string retry_after;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

// Returns status 0 when the connection failed.
HttpResponse HttpGet(const std::string& origin, const std::string& path_and_query,
                     const Headers& headers, int timeout_s);
HttpResponse HttpPost(const std::string& origin, const std::string& path,
                      const Headers& headers, const std::string& body,
                      const std::string& content_type, int timeout_s);

std::string UrlEncode(const std::string& s);

}  // namespace histmut::internal

#endif  // HISTMUT_SRC_MINER_HTTP_H_
