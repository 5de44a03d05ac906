// Real HTTPS transport. Kept in its own translation unit so the bulky
// header-only HTTP client is compiled exactly once.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <map>
#include <memory>
#include <string>

#include "modaudit/scheduler.hpp"

namespace modaudit {

struct HttpTransport::Impl {
  double timeout_seconds;
  std::map<std::string, std::unique_ptr<httplib::SSLClient>> clients;

  httplib::SSLClient& client_for(const std::string& host) {
    auto it = clients.find(host);
    if (it != clients.end()) return *it->second;
    auto client = std::make_unique<httplib::SSLClient>(host);
    client->set_connection_timeout(std::chrono::duration<double>(timeout_seconds));
    client->set_read_timeout(std::chrono::duration<double>(timeout_seconds));
    client->set_follow_location(true);
    auto [pos, inserted] = clients.emplace(host, std::move(client));
    return *pos->second;
  }
};

HttpTransport::HttpTransport(double timeout_seconds)
    : impl_(std::make_unique<Impl>()) {
  impl_->timeout_seconds = timeout_seconds;
}

HttpTransport::~HttpTransport() = default;

WireReply HttpTransport::send(const WireRequest& request) {
  // Credential injection happens here and nowhere else; the request object
  // carries only the variable name.
  std::string credential;
  if (!request.auth_env_var.empty()) {
    const char* value = std::getenv(request.auth_env_var.c_str());
    if (value == nullptr || *value == '\0') {
      throw MissingCredential(request.auth_env_var);
    }
    credential = value;
  }

  std::string path = request.path;
  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [name, value] : request.headers) {
    if (name == "Content-Type") {
      content_type = value;
    } else {
      headers.emplace(name, value);
    }
  }
  if (!credential.empty()) {
    constexpr std::string_view kQueryPrefix = "query:";
    if (request.auth_location.rfind(kQueryPrefix, 0) == 0) {
      std::string param(request.auth_location.substr(kQueryPrefix.size()));
      path += (path.find('?') == std::string::npos ? '?' : '&');
      path += param + "=" + httplib::detail::encode_query_param(credential);
    } else {
      headers.emplace(request.auth_location,
                      request.auth_value_prefix + credential);
    }
  }

  httplib::Result result = impl_->client_for(request.host).Post(
      path, headers, request.body, content_type);
  if (!result) {
    throw TransportUnavailable("request to " + request.host + " failed: " +
                               httplib::to_string(result.error()));
  }
  WireReply reply;
  reply.status = result->status;
  reply.body = result->body;
  for (const auto& [name, value] : result->headers) {
    std::string lower;
    lower.reserve(name.size());
    for (char c : name) {
      lower.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
    }
    reply.headers[lower] = value;
  }
  return reply;
}

}  // namespace modaudit
