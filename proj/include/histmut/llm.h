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

#ifndef HISTMUT_LLM_H_
#define HISTMUT_LLM_H_

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace histmut {

// Transport-neutral chat client. Implementations must tolerate concurrent
// callers.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string Send(const std::string& prompt,
                           const std::string& role_context) = 0;
  virtual std::string model() const = 0;
  size_t calls() const { return calls_.load(); }

 protected:
  void CountCall() { ++calls_; }

 private:
  std::atomic<size_t> calls_{0};
};

std::string PromptHash(const std::string& prompt);

// Replays recorded responses. A transcript is a JSON object
//   {"model": "...", "entries": [{"prompt_sha256": "...", "response": "..."},
//                                {"response": "..."}]}
// Entries with a hash answer the prompt with that hash; entries without one
// are consumed in order by prompts that match no hash.
class ReplayTransport : public LlmClient {
 public:
  static std::shared_ptr<ReplayTransport> Load(const std::filesystem::path& path);
  static std::shared_ptr<ReplayTransport> FromJson(const std::string& json_text,
                                                   std::string origin = "<transcript>");
  ReplayTransport(std::string model, std::map<std::string, std::string> by_hash,
                  std::vector<std::string> ordered);

  // Throws kTranscriptMiss naming the prompt hash.
  std::string Send(const std::string& prompt, const std::string& role_context) override;
  std::string model() const override { return model_; }
  size_t remaining() const;

 private:
  std::string model_;
  std::map<std::string, std::string> by_hash_;
  std::vector<std::string> ordered_;
  mutable std::mutex mu_;
  size_t next_ = 0;
};

struct HttpChatConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o-mini";
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_s = 120;
  double temperature = 0.0;
};

// Chat-completion POST ({"model", "messages"} -> choices[0].message.content).
class HttpChatTransport : public LlmClient {
 public:
  explicit HttpChatTransport(HttpChatConfig config) : config_(std::move(config)) {}
  // Throws kLlmUnavailable on transport or HTTP errors.
  std::string Send(const std::string& prompt, const std::string& role_context) override;
  std::string model() const override { return config_.model; }

 private:
  HttpChatConfig config_;
};

// Forwards to another client and records hash-keyed entries for replay.
class RecordingTransport : public LlmClient {
 public:
  explicit RecordingTransport(std::shared_ptr<LlmClient> inner)
      : inner_(std::move(inner)) {}
  std::string Send(const std::string& prompt, const std::string& role_context) override;
  std::string model() const override { return inner_->model(); }
  std::string TranscriptJson() const;

 private:
  std::shared_ptr<LlmClient> inner_;
  mutable std::mutex mu_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace histmut

#endif  // HISTMUT_LLM_H_
