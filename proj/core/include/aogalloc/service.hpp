#pragma once

// HTTP/JSON wire protocol over sessions. Endpoints (all bodies carry "v": 1):
//
//   GET    /v1/health
//   POST   /v1/sessions                      create (graph, calibration, config, initial_wear)
//   GET    /v1/sessions                      list
//   GET    /v1/sessions/{id}                 state, side-effect free
//   DELETE /v1/sessions/{id}
//   POST   /v1/sessions/{id}/completions     {action, worker, duration_s?, angles?, scores?}
//   POST   /v1/sessions/{id}/overrides       {action, worker}
//   GET    /v1/sessions/{id}/log             event log as JSON lines
//   GET    /v1/sessions/{id}/events?from=N&follow=1   server-sent events
//
// Errors: {"v":1,"error":{"code","message","details"}} with 400 (malformed,
// version mismatch), 404 (unknown session), 409 (action not enabled),
// 422 (validation).

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace aogalloc {

inline constexpr int kProtocolVersion = 1;

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

class Service {
 public:
  Service();
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Transport-independent handlers; the HTTP routes forward to these.
  ServiceResponse create_session(const nlohmann::json& body);
  ServiceResponse list_sessions() const;
  ServiceResponse get_state(const std::string& id) const;
  ServiceResponse delete_session(const std::string& id);
  ServiceResponse post_completion(const std::string& id, const nlohmann::json& body);
  ServiceResponse post_override(const std::string& id, const nlohmann::json& body);
  ServiceResponse export_log(const std::string& id) const;

  /// Events with seq >= from. Waits up to timeout_ms for at least one when
  /// none are pending. nullopt once the session is unknown or deleted.
  std::optional<std::vector<nlohmann::json>> events_since(const std::string& id, std::uint64_t from,
                                                          int timeout_ms = 0) const;

  /// Binds; port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  bool listen_after_bind();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Error envelope for an exception thrown by the core library.
ServiceResponse error_response(const std::exception& e);

}  // namespace aogalloc
