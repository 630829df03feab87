// Copyright 2026 The bison-oidc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// The library default of 5 drops connections when a test fires a burst of
// concurrent requests at one server.
#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 128
#endif
#include <httplib.h>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "bison/error.hpp"
#include "bison/url.hpp"

// Loopback HTTP plumbing. Services are addressed by their public origin
// (e.g. https://idp.example); a Resolver maps each origin to the loopback
// port its server is actually bound to, standing in for DNS + a TLS
// terminator.
namespace bison::http {

class Resolver {
 public:
  void Register(std::string_view origin, int port) {
    std::lock_guard lock(mu_);
    ports_[url::CanonicalOrigin(origin)] = port;
  }

  std::optional<int> Lookup(std::string_view origin) const {
    std::lock_guard lock(mu_);
    auto it = ports_.find(url::CanonicalOrigin(origin));
    if (it == ports_.end()) return std::nullopt;
    return it->second;
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, int> ports_;
};

struct Response {
  int status = 0;
  std::multimap<std::string, std::string> headers;
  std::string body;

  std::string Header(const std::string& name) const {
    for (const auto& [k, v] : headers) {
      if (url::ToLower(k) == url::ToLower(name)) return v;
    }
    return {};
  }
};

class Client {
 public:
  explicit Client(std::shared_ptr<const Resolver> resolver) : resolver_(std::move(resolver)) {}

  Response Get(const url::Url& target, const httplib::Headers& headers = {}) const {
    auto cli = Connect(target);
    auto res = cli->Get(target.PathAndQuery(), WithHost(target, headers));
    return Convert(target, res);
  }

  Response PostForm(const url::Url& target, const url::Params& fields,
                    const httplib::Headers& headers = {}) const {
    auto cli = Connect(target);
    auto res = cli->Post(target.PathAndQuery(), WithHost(target, headers), url::EncodeParams(fields),
                         "application/x-www-form-urlencoded");
    return Convert(target, res);
  }

 private:
  std::unique_ptr<httplib::Client> Connect(const url::Url& target) const {
    const auto port = resolver_->Lookup(target.Origin());
    if (!port) throw Error(ErrorCode::kTransport, "cannot resolve " + target.Origin());
    auto cli = std::make_unique<httplib::Client>("127.0.0.1", *port);
    cli->set_connection_timeout(5);
    cli->set_read_timeout(10);
    cli->set_follow_location(false);
    return cli;
  }

  static httplib::Headers WithHost(const url::Url& target, httplib::Headers headers) {
    headers.emplace("Host", target.host);
    return headers;
  }

  static Response Convert(const url::Url& target, const httplib::Result& res) {
    if (!res) {
      throw Error(ErrorCode::kTransport,
                  "request to " + target.Origin() + " failed: " + httplib::to_string(res.error()));
    }
    Response out;
    out.status = res->status;
    for (const auto& [k, v] : res->headers) out.headers.emplace(k, v);
    out.body = res->body;
    return out;
  }

  std::shared_ptr<const Resolver> resolver_;
};

// Owns an httplib::Server listening on an ephemeral loopback port in a
// background thread. Routes are installed on server() before Start().
class ServerThread {
 public:
  ServerThread() = default;
  ~ServerThread() { Stop(); }

  ServerThread(const ServerThread&) = delete;
  ServerThread& operator=(const ServerThread&) = delete;

  httplib::Server& server() { return server_; }

  int Start(int port = 0) {
    server_.new_task_queue = [] { return new httplib::ThreadPool(8); };
    port_ = port == 0 ? server_.bind_to_any_port("127.0.0.1") : (server_.bind_to_port("127.0.0.1", port) ? port : -1);
    if (port_ <= 0) throw Error(ErrorCode::kTransport, "cannot bind loopback port");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  void Stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }

  int port() const { return port_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

inline std::string ContentTypeJson() { return "application/json"; }
inline std::string ContentTypeHtml() { return "text/html; charset=utf-8"; }

// Error class travels in this header so clients need not parse bodies.
inline constexpr const char* kErrorHeader = "X-Bison-Error";

}  // namespace bison::http
