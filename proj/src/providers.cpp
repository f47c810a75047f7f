// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "specforge/promptkit.hpp"
#include "specforge/speclang.hpp"

#ifndef SPECFORGE_NO_HTTP
#include "httplib.h"
#endif

namespace specforge {

namespace {

class EchoOracleProvider : public Provider {
 public:
  explicit EchoOracleProvider(std::map<std::string, std::string> oracle)
      : oracle_(std::move(oracle)) {}

  Completion complete(const std::string&, const std::string& task_id) override {
    ++calls_;
    auto it = oracle_.find(task_id);
    if (it == oracle_.end())
      throw ProviderError("echo-oracle: unknown task id " + task_id);
    Completion c;
    c.text = "Here is the specification.\n```python\n" + it->second + "```\n";
    c.provider_meta = "mock:echo-oracle";
    return c;
  }
  std::size_t calls() const override { return calls_; }

 private:
  std::map<std::string, std::string> oracle_;
  std::size_t calls_ = 0;
};

class ScriptedProvider : public Provider {
 public:
  explicit ScriptedProvider(const std::string& schedule_path) {
    std::ifstream in(schedule_path);
    if (!in)
      throw ProviderError("scripted: cannot open schedule " + schedule_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      nlohmann::json j = nlohmann::json::parse(line);
      schedule_[j.at("task_id").get<std::string>()] =
          j.at("response_text").get<std::string>();
    }
  }

  Completion complete(const std::string&, const std::string& task_id) override {
    ++calls_;
    auto it = schedule_.find(task_id);
    if (it == schedule_.end())
      throw ProviderError("scripted: no scheduled response for " + task_id);
    Completion c;
    c.text = it->second;
    c.provider_meta = "mock:scripted";
    return c;
  }
  std::size_t calls() const override { return calls_; }

 private:
  std::map<std::string, std::string> schedule_;
  std::size_t calls_ = 0;
};

// Returns the oracle text for most tasks; every k-th task (by taskset
// order) gets the oracle with its last guard conjunct dropped, a
// deterministic semantic fault.
class MutateKProvider : public Provider {
 public:
  MutateKProvider(std::map<std::string, std::string> oracle,
                  std::vector<std::string> order, std::size_t k)
      : oracle_(std::move(oracle)), k_(k) {
    for (std::size_t i = 0; i < order.size(); ++i) index_[order[i]] = i;
  }

  Completion complete(const std::string&, const std::string& task_id) override {
    ++calls_;
    auto it = oracle_.find(task_id);
    if (it == oracle_.end())
      throw ProviderError("mutate-k: unknown task id " + task_id);
    std::string text = it->second;
    auto idx = index_.find(task_id);
    if (idx != index_.end() && k_ > 0 && (idx->second % k_) == k_ - 1)
      text = weaken(text);
    Completion c;
    c.text = "```python\n" + text + "```\n";
    c.provider_meta = "mock:mutate-k";
    return c;
  }
  std::size_t calls() const override { return calls_; }

 private:
  static std::string weaken(const std::string& spec_text) {
    auto parsed = parse_spec(spec_text);
    if (!parsed.ok()) return spec_text;
    SpecAst ast = std::move(*parsed.ast);
    if (ast.guard->op == ExprOp::And && ast.guard->args.size() >= 2) {
      auto args = ast.guard->args;
      args.pop_back();
      ast.guard = args.size() == 1 ? args[0]
                                   : Expr::make(ExprOp::And, std::move(args));
    } else {
      ast.guard = Expr::boolean(true);
    }
    return spec_to_source(ast);
  }

  std::map<std::string, std::string> oracle_;
  std::map<std::string, std::size_t> index_;
  std::size_t k_;
  std::size_t calls_ = 0;
};

#ifndef SPECFORGE_NO_HTTP
// Generic chat-completions endpoint: one user message per call, bearer
// auth from the configured environment variable.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(ModelConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.auth_env.empty())
      throw ConfigError("http provider: no auth environment variable named");
    const char* key = std::getenv(cfg_.auth_env.c_str());
    if (!key || !*key)
      throw ConfigError("http provider: environment variable " +
                        cfg_.auth_env + " is not set");
    key_ = key;
  }

  Completion complete(const std::string& prompt, const std::string&) override {
    ++calls_;
    nlohmann::json body;
    body["model"] = cfg_.model;
    body["temperature"] = cfg_.temperature;
    body["max_tokens"] = cfg_.max_tokens;
    body["messages"] = nlohmann::json::array(
        {nlohmann::json{{"role", "user"}, {"content", prompt}}});

    auto scheme_end = cfg_.endpoint.find("://");
    if (scheme_end == std::string::npos)
      throw ConfigError("http provider: endpoint needs a scheme");
    std::string rest = cfg_.endpoint.substr(scheme_end + 3);
    auto slash = rest.find('/');
    std::string host = rest.substr(0, slash);
    std::string path = slash == std::string::npos ? "/" : rest.substr(slash);
    bool https = cfg_.endpoint.rfind("https://", 0) == 0;

    std::string err;
    for (int attempt = 0; attempt < cfg_.retries; ++attempt) {
      if (attempt)
        std::this_thread::sleep_for(
            std::chrono::milliseconds(250L << (attempt - 1)));
      auto start = std::chrono::steady_clock::now();
      httplib::Result res;
      httplib::Headers headers = {{"Authorization", "Bearer " + key_}};
      if (https) {
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
        httplib::SSLClient cli(host);
        cli.set_read_timeout(120, 0);
        res = cli.Post(path, headers, body.dump(), "application/json");
#else
        throw ConfigError("https endpoints need an SSL-enabled build");
#endif
      } else {
        httplib::Client cli(host);
        cli.set_read_timeout(120, 0);
        res = cli.Post(path, headers, body.dump(), "application/json");
      }
      if (!res) {
        err = "transport error " + httplib::to_string(res.error());
        continue;  // transport errors retry with backoff
      }
      if (res->status >= 500) {
        err = "server error " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200)
        throw ProviderError("http provider: status " +
                            std::to_string(res->status) + ": " + res->body);
      auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start)
                    .count();
      nlohmann::json j = nlohmann::json::parse(res->body);
      Completion c;
      c.text = j.at("choices").at(0).at("message").at("content")
                   .get<std::string>();
      c.latency_ms = ms;
      if (j.contains("usage")) c.provider_meta = j["usage"].dump();
      return c;
    }
    throw ProviderError("http provider: " + err + " after " +
                        std::to_string(cfg_.retries) + " attempts");
  }
  std::size_t calls() const override { return calls_; }

 private:
  ModelConfig cfg_;
  std::string key_;
  std::size_t calls_ = 0;
};
#endif  // SPECFORGE_NO_HTTP

}  // namespace

std::unique_ptr<Provider> make_provider(
    const ModelConfig& cfg,
    const std::map<std::string, std::string>& oracle_by_task,
    const std::vector<std::string>& task_order) {
  if (cfg.provider == "echo-oracle")
    return std::make_unique<EchoOracleProvider>(oracle_by_task);
  if (cfg.provider == "scripted")
    return std::make_unique<ScriptedProvider>(cfg.schedule_path);
  if (cfg.provider == "mutate-k") {
    std::size_t k = 0;
    auto dash = cfg.model.rfind('-');
    if (dash != std::string::npos) {
      try {
        k = std::stoul(cfg.model.substr(dash + 1));
      } catch (const std::exception&) {
        k = 0;
      }
    }
    if (k == 0)
      throw ConfigError("mutate-k provider: model name must end in -<k>");
    return std::make_unique<MutateKProvider>(oracle_by_task, task_order, k);
  }
#ifndef SPECFORGE_NO_HTTP
  if (cfg.provider == "http") return std::make_unique<HttpProvider>(cfg);
#endif
  throw ConfigError("unknown provider id '" + cfg.provider + "'");
}

}  // namespace specforge
