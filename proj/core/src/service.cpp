#include "aogalloc/service.hpp"

#include <atomic>
#include <condition_variable>
#include <map>
#include <mutex>

#include <httplib.h>

#include "aogalloc/aog.hpp"
#include "aogalloc/aog_io.hpp"
#include "aogalloc/ergo_io.hpp"
#include "aogalloc/error.hpp"
#include "aogalloc/scenarios.hpp"
#include "aogalloc/session.hpp"

namespace aogalloc {

using nlohmann::json;

namespace {

ServiceResponse error_body(int status, const std::string& code, const std::string& message, json details = json::object()) {
  return {status, {{"v", kProtocolVersion}, {"error", {{"code", code}, {"message", message}, {"details", std::move(details)}}}}};
}

ServiceResponse unknown_session(const std::string& id) {
  return error_body(404, "not_found", "unknown session '" + id + "'", {{"id", id}});
}

void check_request(const json& body) {
  if (!body.is_object()) throw Error(ErrorKind::parse, "request body must be a JSON object");
  check_version(body, kProtocolVersion, "request");
}

std::string required_string(const json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_string())
    throw Error(ErrorKind::parse, std::string("missing string field '") + key + "'");
  return body[key].get<std::string>();
}

}  // namespace

ServiceResponse error_response(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->kind()) {
      case ErrorKind::not_found: return error_body(404, "not_found", e.what());
      case ErrorKind::not_enabled: return error_body(409, "conflict", e.what());
      case ErrorKind::validation:
      case ErrorKind::planning: return error_body(422, to_string(err->kind()), e.what());
      case ErrorKind::io: return error_body(500, "io", e.what());
      case ErrorKind::version_mismatch:
      case ErrorKind::parse:
      case ErrorKind::invalid_argument: return error_body(400, to_string(err->kind()), e.what());
    }
  }
  if (dynamic_cast<const json::exception*>(&e)) return error_body(400, "parse", e.what());
  return error_body(500, "internal", e.what());
}

struct Service::Impl {
  struct Entry {
    mutable std::mutex mutex;
    mutable std::condition_variable changed;
    Session session;
    bool deleted = false;

    explicit Entry(Session s) : session(std::move(s)) {}
  };

  mutable std::mutex registry_mutex;
  std::map<std::string, std::shared_ptr<Entry>> sessions;
  std::uint64_t next_id = 1;
  std::atomic<bool> stopping{false};
  httplib::Server server;

  std::shared_ptr<Entry> find(const std::string& id) const {
    std::lock_guard lock(registry_mutex);
    const auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  // Runs a mutation under the session lock, re-suggests, and wakes streams.
  template <typename F>
  ServiceResponse mutate(const std::string& id, F&& f) {
    const auto entry = find(id);
    if (!entry) return unknown_session(id);
    try {
      std::lock_guard lock(entry->mutex);
      if (entry->deleted) return unknown_session(id);
      f(entry->session);
      if (!entry->session.complete()) entry->session.suggest_next();
      json state = entry->session.state_json();
      entry->changed.notify_all();
      return {200, {{"v", kProtocolVersion}, {"id", id}, {"state", std::move(state)}}};
    } catch (const std::exception& e) {
      entry->changed.notify_all();
      return error_response(e);
    }
  }
};

Service::Service() : impl_(std::make_unique<Impl>()) {
  auto send = [](httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto parse_body = [](const httplib::Request& req) { return json::parse(req.body); };
  auto guarded = [send](httplib::Response& res, auto&& f) {
    try {
      send(res, f());
    } catch (const std::exception& e) {
      send(res, error_response(e));
    }
  };
  httplib::Server& s = impl_->server;

  s.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  s.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  s.Get("/v1/health", [send](const httplib::Request&, httplib::Response& res) {
    send(res, {200, {{"v", kProtocolVersion}, {"status", "ok"}}});
  });
  s.Post("/v1/sessions", [this, guarded, parse_body](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return create_session(parse_body(req)); });
  });
  s.Get("/v1/sessions", [this, send](const httplib::Request&, httplib::Response& res) { send(res, list_sessions()); });
  s.Get(R"(/v1/sessions/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_state(req.matches[1]));
  });
  s.Delete(R"(/v1/sessions/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, delete_session(req.matches[1]));
  });
  s.Post(R"(/v1/sessions/([^/]+)/completions)", [this, guarded, parse_body](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return post_completion(req.matches[1], parse_body(req)); });
  });
  s.Post(R"(/v1/sessions/([^/]+)/overrides)", [this, guarded, parse_body](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return post_override(req.matches[1], parse_body(req)); });
  });
  s.Get(R"(/v1/sessions/([^/]+)/log)", [this, send](const httplib::Request& req, httplib::Response& res) {
    const ServiceResponse r = export_log(req.matches[1]);
    if (r.status != 200) return send(res, r);
    res.set_content(r.body["log"].get<std::string>(), "application/x-ndjson");
  });
  s.Get(R"(/v1/sessions/([^/]+)/events)", [this, send](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!impl_->find(id)) return send(res, unknown_session(id));
    std::uint64_t from = 0;
    bool follow = true;
    try {
      if (req.has_param("from")) from = std::stoull(req.get_param_value("from"));
      if (req.has_param("follow")) follow = req.get_param_value("follow") != "0";
    } catch (const std::exception&) {
      return send(res, error_body(400, "invalid_argument", "bad query parameter"));
    }
    auto next = std::make_shared<std::uint64_t>(from);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [this, id, next, follow](std::size_t, httplib::DataSink& sink) {
          const auto events = events_since(id, *next, follow ? 250 : 0);
          if (!events) {
            sink.done();
            return true;
          }
          for (const json& e : *events) {
            const std::string frame = "id: " + std::to_string(e["seq"].get<std::uint64_t>()) +
                                      "\nevent: " + e["kind"].get<std::string>() + "\ndata: " + e.dump() + "\n\n";
            if (!sink.write(frame.data(), frame.size())) return false;
            *next = e["seq"].get<std::uint64_t>() + 1;
          }
          if (!follow || impl_->stopping) sink.done();
          return true;
        });
  });
}

Service::~Service() { stop(); }

ServiceResponse Service::create_session(const json& body) {
  try {
    check_request(body);
    for (const char* key : {"graph_file", "calibration_file", "steps"})
      if (body.contains(key))
        return error_body(400, "invalid_argument", std::string("field '") + key + "' is not accepted over the wire");
    Scenario scenario = scenario_from_json(body);
    const ValidationReport report = validate(scenario.graph);
    if (!report.ok()) {
      json violations = json::array();
      for (const Violation& v : report.violations)
        violations.push_back({{"rule", v.rule}, {"subject", v.subject}, {"message", v.message}});
      return error_body(422, "validation", "graph is invalid", {{"violations", std::move(violations)}});
    }
    Session session = Session::start(std::move(scenario.graph), std::move(scenario.models),
                                     std::move(scenario.config), scenario.initial_wear);
    if (!session.complete()) session.suggest_next();
    std::string id;
    json state = session.state_json();
    {
      std::lock_guard lock(impl_->registry_mutex);
      id = "s" + std::to_string(impl_->next_id++);
      impl_->sessions.emplace(id, std::make_shared<Impl::Entry>(std::move(session)));
    }
    return {201, {{"v", kProtocolVersion}, {"id", id}, {"state", std::move(state)}}};
  } catch (const std::exception& e) {
    return error_response(e);
  }
}

ServiceResponse Service::list_sessions() const {
  std::vector<std::pair<std::string, std::shared_ptr<Impl::Entry>>> entries;
  {
    std::lock_guard lock(impl_->registry_mutex);
    entries.assign(impl_->sessions.begin(), impl_->sessions.end());
  }
  json list = json::array();
  for (const auto& [id, entry] : entries) {
    std::lock_guard lock(entry->mutex);
    list.push_back({{"id", id}, {"complete", entry->session.complete()}, {"events", entry->session.events().size()}});
  }
  return {200, {{"v", kProtocolVersion}, {"sessions", std::move(list)}}};
}

ServiceResponse Service::get_state(const std::string& id) const {
  const auto entry = impl_->find(id);
  if (!entry) return unknown_session(id);
  try {
    std::lock_guard lock(entry->mutex);
    return {200, {{"v", kProtocolVersion}, {"id", id}, {"state", entry->session.state_json()}}};
  } catch (const std::exception& e) {
    return error_response(e);
  }
}

ServiceResponse Service::delete_session(const std::string& id) {
  std::shared_ptr<Impl::Entry> entry;
  {
    std::lock_guard lock(impl_->registry_mutex);
    const auto it = impl_->sessions.find(id);
    if (it == impl_->sessions.end()) return unknown_session(id);
    entry = it->second;
    impl_->sessions.erase(it);
  }
  {
    std::lock_guard lock(entry->mutex);
    entry->deleted = true;
  }
  entry->changed.notify_all();
  return {200, {{"v", kProtocolVersion}, {"id", id}, {"deleted", true}}};
}

ServiceResponse Service::post_completion(const std::string& id, const json& body) {
  try {
    check_request(body);
    const std::string action = required_string(body, "action");
    const std::string worker = required_string(body, "worker");
    CompletionEvidence evidence;
    if (body.contains("duration_s")) {
      if (!body["duration_s"].is_number()) throw Error(ErrorKind::parse, "duration_s must be a number");
      evidence.duration_s = body["duration_s"].get<double>();
    }
    if (body.contains("angles")) evidence.angles = angle_trace_from_json(body["angles"]);
    if (body.contains("scores")) evidence.scores = score_trace_from_json(body["scores"]);
    return impl_->mutate(id, [&](Session& s) { s.complete_action(action, worker, evidence); });
  } catch (const std::exception& e) {
    return error_response(e);
  }
}

ServiceResponse Service::post_override(const std::string& id, const json& body) {
  try {
    check_request(body);
    const std::string action = required_string(body, "action");
    const std::string worker = required_string(body, "worker");
    const auto entry = impl_->find(id);
    if (!entry) return unknown_session(id);
    std::lock_guard lock(entry->mutex);
    if (entry->deleted) return unknown_session(id);
    entry->session.override_suggestion(action, worker);
    json state = entry->session.state_json();
    entry->changed.notify_all();
    return {200, {{"v", kProtocolVersion}, {"id", id}, {"state", std::move(state)}}};
  } catch (const std::exception& e) {
    return error_response(e);
  }
}

ServiceResponse Service::export_log(const std::string& id) const {
  const auto entry = impl_->find(id);
  if (!entry) return unknown_session(id);
  std::lock_guard lock(entry->mutex);
  return {200, {{"v", kProtocolVersion}, {"id", id}, {"log", entry->session.export_log()}}};
}

std::optional<std::vector<json>> Service::events_since(const std::string& id, std::uint64_t from,
                                                       int timeout_ms) const {
  const auto entry = impl_->find(id);
  if (!entry) return std::nullopt;
  std::unique_lock lock(entry->mutex);
  auto pending = [&] { return entry->deleted || entry->session.events().size() > from; };
  if (timeout_ms > 0 && !pending())
    entry->changed.wait_for(lock, std::chrono::milliseconds(timeout_ms), pending);
  if (entry->deleted) return std::nullopt;
  std::vector<json> out;
  const auto& events = entry->session.events();
  for (std::size_t i = std::size_t(from); i < events.size(); ++i) out.push_back(event_to_json(events[i]));
  return out;
}

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }

void Service::stop() {
  impl_->stopping = true;
  {
    std::lock_guard lock(impl_->registry_mutex);
    for (auto& [id, entry] : impl_->sessions) entry->changed.notify_all();
  }
  impl_->server.stop();
}

}  // namespace aogalloc
