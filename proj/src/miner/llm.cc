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

#include "histmut/llm.h"

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "histmut/error.h"
#include "histmut/util.h"
#include "http.h"

namespace histmut {

using nlohmann::json;

std::string PromptHash(const std::string& prompt) { return Sha256Hex(prompt); }

ReplayTransport::ReplayTransport(std::string model,
                                 std::map<std::string, std::string> by_hash,
                                 std::vector<std::string> ordered)
    : model_(std::move(model)), by_hash_(std::move(by_hash)), ordered_(std::move(ordered)) {}

std::shared_ptr<ReplayTransport> ReplayTransport::FromJson(const std::string& json_text,
                                                           std::string origin) {
  try {
    json j = json::parse(json_text);
    std::map<std::string, std::string> by_hash;
    std::vector<std::string> ordered;
    for (const auto& e : j.at("entries")) {
      std::string response = e.at("response").get<std::string>();
      if (e.contains("prompt_sha256")) {
        by_hash[e.at("prompt_sha256").get<std::string>()] = std::move(response);
      } else {
        ordered.push_back(std::move(response));
      }
    }
    return std::make_shared<ReplayTransport>(j.value("model", std::string("replay")),
                                             std::move(by_hash), std::move(ordered));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, origin + ": bad transcript: " + e.what());
  }
}

std::shared_ptr<ReplayTransport> ReplayTransport::Load(const std::filesystem::path& path) {
  return FromJson(ReadFile(path), path.string());
}

std::string ReplayTransport::Send(const std::string& prompt, const std::string&) {
  std::lock_guard lock(mu_);
  CountCall();
  std::string hash = PromptHash(prompt);
  if (auto it = by_hash_.find(hash); it != by_hash_.end()) return it->second;
  if (next_ < ordered_.size()) return ordered_[next_++];
  throw Error(ErrorCode::kTranscriptMiss,
              "transcript for model " + model_ + " has no response for prompt " + hash);
}

size_t ReplayTransport::remaining() const {
  std::lock_guard lock(mu_);
  return ordered_.size() - next_;
}

std::string HttpChatTransport::Send(const std::string& prompt,
                                    const std::string& role_context) {
  CountCall();
  internal::Url url = internal::SplitUrl(config_.endpoint);
  json body{{"model", config_.model},
            {"temperature", config_.temperature},
            {"messages", json::array()}};
  if (!role_context.empty()) {
    body["messages"].push_back({{"role", "system"}, {"content", role_context}});
  }
  body["messages"].push_back({{"role", "user"}, {"content", prompt}});
  internal::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str())) {
    headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }
  internal::HttpResponse res = internal::HttpPost(
      url.origin, url.path.empty() ? "/" : url.path, headers, body.dump(),
      "application/json", config_.timeout_s);
  if (res.status == 0) {
    throw Error(ErrorCode::kLlmUnavailable, "cannot reach " + config_.endpoint);
  }
  if (res.status != 200) {
    throw Error(ErrorCode::kLlmUnavailable, config_.endpoint + " answered HTTP " +
                                                std::to_string(res.status));
  }
  try {
    json reply = json::parse(res.body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kLlmUnavailable,
                std::string("unexpected chat-completion payload: ") + e.what());
  }
}

std::string RecordingTransport::Send(const std::string& prompt,
                                     const std::string& role_context) {
  CountCall();
  std::string response = inner_->Send(prompt, role_context);
  std::lock_guard lock(mu_);
  entries_.emplace_back(PromptHash(prompt), response);
  return response;
}

std::string RecordingTransport::TranscriptJson() const {
  std::lock_guard lock(mu_);
  json entries = json::array();
  for (const auto& [hash, response] : entries_) {
    entries.push_back({{"prompt_sha256", hash}, {"response", response}});
  }
  return json{{"model", inner_->model()}, {"entries", entries}}.dump(2) + "\n";
}

}  // namespace histmut
