// Copyright 2026 The scrl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// cpp-httplib transport for the generator client.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "scrl/bank.hpp"

namespace scrl {
namespace {

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post(const std::string& url, const std::map<std::string, std::string>& headers,
                    const std::string& body, double timeout_seconds) override {
    const std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) fail(ErrorCode::kNetwork, "endpoint '" + url + "' has no scheme");
    const std::size_t path_begin = url.find('/', scheme_end + 3);
    const std::string origin = url.substr(0, path_begin);
    const std::string path = path_begin == std::string::npos ? "/" : url.substr(path_begin);

    httplib::Client client(origin);
    const auto seconds = static_cast<time_t>(timeout_seconds);
    const auto micros = static_cast<time_t>((timeout_seconds - static_cast<double>(seconds)) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);

    httplib::Headers h;
    std::string content_type = "application/json";
    for (const auto& [k, v] : headers) {
      if (k == "Content-Type") {
        content_type = v;
      } else {
        h.emplace(k, v);
      }
    }
    auto res = client.Post(path, h, body, content_type);
    if (!res) {
      fail(ErrorCode::kNetwork, "cannot reach '" + origin + "': " + httplib::to_string(res.error()));
    }
    return {res->status, res->body};
  }
};

}  // namespace

std::shared_ptr<HttpTransport> make_default_transport() {
  return std::make_shared<HttplibTransport>();
}

}  // namespace scrl
