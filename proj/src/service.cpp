#include "distinctbo/service.h"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "httplib.h"

#include "distinctbo/errors.h"

namespace distinctbo {

std::string to_string(SessionStatus status) {
  switch (status) {
    case SessionStatus::kRunning: return "running";
    case SessionStatus::kAwaitingRanking: return "awaiting_ranking";
    case SessionStatus::kDone: return "done";
    case SessionStatus::kFailed: return "failed";
  }
  return "unknown";
}

SessionStatus session_status_from_string(const std::string& name) {
  if (name == "running") return SessionStatus::kRunning;
  if (name == "awaiting_ranking") return SessionStatus::kAwaitingRanking;
  if (name == "done") return SessionStatus::kDone;
  if (name == "failed") return SessionStatus::kFailed;
  throw std::invalid_argument("unknown session status \"" + name + "\"");
}

namespace {

std::string now_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03lldZ", buf, static_cast<long long>(ms));
  return out;
}

std::string make_uuid() {
  std::random_device rd;
  std::uint64_t hi = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  std::uint64_t lo = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  hi = (hi & ~0xF000ULL) | 0x4000ULL;
  lo = (lo & ~(0xC0ULL << 56)) | (0x80ULL << 56);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%08llx-%04llx-%04llx-%04llx-%012llx",
                static_cast<unsigned long long>(hi >> 32), static_cast<unsigned long long>((hi >> 16) & 0xFFFF),
                static_cast<unsigned long long>(hi & 0xFFFF), static_cast<unsigned long long>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFULL));
  return buf;
}

Json error_body(const std::string& message) {
  Json body{{"error", message}};
  const auto colon = message.find(':');
  if (colon != std::string::npos && message.find(' ') > colon) body["field"] = message.substr(0, colon);
  return body;
}

ApiResponse error(int status, const std::string& message) { return {status, error_body(message)}; }

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

struct Snapshot {
  SessionStatus status;
  Json summary;
  Json query;  // null when nothing is pending
  std::optional<SessionResult> result;
};

struct SessionService::Record {
  std::string id;
  std::string created;
  std::string updated;
  std::string error;
  SessionStatus status = SessionStatus::kRunning;
  std::size_t transitions = 0;
  bool halted = false;
  std::unique_ptr<Session> session;

  std::mutex mutex;  // guards everything above
  std::atomic<bool> stop{false};

  std::mutex worker_mutex;
  std::thread worker;

  mutable std::mutex snapshot_mutex;
  std::shared_ptr<const Snapshot> snapshot;

  std::shared_ptr<const Snapshot> read() const {
    std::lock_guard lock(snapshot_mutex);
    return snapshot;
  }
};

SessionService::SessionService(ServiceOptions options) : options_(std::move(options)) {
  std::filesystem::create_directories(options_.data_dir);
}

SessionService::~SessionService() { shutdown(); }

std::shared_ptr<SessionService::Record> SessionService::find(const std::string& id) const {
  std::lock_guard lock(registry_mutex_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

namespace {

SessionStatus derive_status(const Session& s, bool failed) {
  if (failed) return SessionStatus::kFailed;
  if (s.phase() == Phase::kDone) return SessionStatus::kDone;
  if (s.awaiting_ranking()) return SessionStatus::kAwaitingRanking;
  return SessionStatus::kRunning;
}

}  // namespace

void SessionService::publish(Record& r) {
  auto snap = std::make_shared<Snapshot>();
  const Session& s = *r.session;
  const auto& state = s.state();
  snap->status = r.status;
  snap->summary = Json{{"session_id", r.id},
                       {"status", to_string(r.status)},
                       {"phase", to_string(s.phase())},
                       {"created", r.created},
                       {"updated", r.updated},
                       {"observations", state.observations.size()},
                       {"phase1_remaining", s.phase1_remaining()},
                       {"rankings", state.rankings.size()},
                       {"queries_issued", state.queries_issued},
                       {"pending_query_id", state.pending ? Json(state.pending->query.id) : Json(nullptr)},
                       {"oracle", to_string(s.config().oracle.kind)},
                       {"m", s.config().m},
                       {"n_phase1", s.config().n_phase1},
                       {"n_phase2", s.config().n_phase2},
                       {"alpha", s.config().alpha_default},
                       {"assets", s.objective().asset_names}};
  if (!r.error.empty()) snap->summary["error"] = r.error;
  if (state.pending) snap->query = to_json(state.pending->query, s.objective().asset_names);
  if (state.x_opt_index) snap->result = s.result();
  std::lock_guard lock(r.snapshot_mutex);
  r.snapshot = std::move(snap);
}

bool SessionService::persist(Record& r, std::unique_lock<std::mutex>& held) {
  (void)held;
  if (r.halted) return false;
  r.updated = now_utc();
  r.status = derive_status(*r.session, !r.error.empty());
  Json doc{{"schema", kStateSchemaVersion},
           {"session_id", r.id},
           {"status", to_string(r.status)},
           {"created", r.created},
           {"updated", r.updated},
           {"config", to_json(r.session->config())},
           {"state", to_json(r.session->state())}};
  if (!r.error.empty()) doc["error"] = r.error;
  write_atomically(options_.data_dir / (r.id + ".json"), doc.dump(2) + "\n");
  ++r.transitions;
  if (options_.halt_after_transitions && r.transitions >= *options_.halt_after_transitions) r.halted = true;
  publish(r);
  return !r.halted;
}

void SessionService::launch(const std::shared_ptr<Record>& record) {
  std::lock_guard lock(record->worker_mutex);
  if (record->worker.joinable()) record->worker.join();
  record->worker = std::thread([this, record] { drive(record); });
}

void SessionService::drive(const std::shared_ptr<Record>& record) {
  Record& r = *record;
  while (!r.stop) {
    std::unique_lock lock(r.mutex);
    if (r.halted || !r.error.empty()) return;
    Session& s = *r.session;
    try {
      switch (s.phase()) {
        case Phase::kInit: s.start(); break;
        case Phase::kPhase1: s.step_phase1(); break;
        case Phase::kPhase2:
          if (s.awaiting_ranking()) {
            const auto answer = answer_ranking(s.config().oracle, s.state().pending->query);
            if (std::holds_alternative<Deferred>(answer)) return;
            s.submit_ranking(std::get<RankingResponse>(answer));
          } else if (s.can_propose()) {
            s.propose_query();
          } else {
            return;
          }
          break;
        case Phase::kDone: return;
      }
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    if (!persist(r, lock)) return;
  }
}

ApiResponse SessionService::create_session(const std::string& body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::exception& e) {
    return error(400, std::string("body: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) return error(400, "body: expected a JSON object");
  if (options_.random_seeds && !j.contains("seed")) {
    std::random_device rd;
    j["seed"] = (static_cast<std::uint64_t>(rd()) << 32 | rd()) >> 1;
  }
  SessionConfig config;
  try {
    config = session_config_from_json(j);
    config.validate();
  } catch (const ConfigError& e) {
    return error(400, e.what());
  }
  if (!config.objective) return error(400, "objective: required");
  std::filesystem::path data(config.objective->data_path);
  if (data.is_relative() && !options_.base_dir.empty()) data = options_.base_dir / data;
  if (!std::filesystem::is_regular_file(data)) return error(404, "objective.data: no such file " + data.string());
  config.objective->data_path = std::filesystem::absolute(data).lexically_normal().string();

  auto record = std::make_shared<Record>();
  try {
    Objective objective = make_sharpe_objective(*config.objective);
    record->session = std::make_unique<Session>(config, std::move(objective));
  } catch (const ConfigError& e) {
    return error(400, e.what());
  } catch (const DataError& e) {
    return error(400, std::string("objective.data: ") + e.what());
  } catch (const std::invalid_argument& e) {
    return error(400, std::string("objective: ") + e.what());
  }
  record->id = make_uuid();
  record->created = now_utc();
  {
    std::unique_lock lock(record->mutex);
    persist(*record, lock);
  }
  {
    std::lock_guard lock(registry_mutex_);
    if (stopping_) return error(503, "service shutting down");
    sessions_[record->id] = record;
  }
  launch(record);
  return {201, Json{{"session_id", record->id}}};
}

std::size_t SessionService::resume() {
  std::size_t loaded = 0;
  for (const auto& entry : std::filesystem::directory_iterator(options_.data_dir)) {
    if (entry.path().extension() != ".json") continue;
    Json doc;
    {
      std::ifstream in(entry.path(), std::ios::binary);
      doc = Json::parse(in, nullptr, false);
    }
    if (doc.is_discarded() || !doc.contains("session_id")) {
      std::cerr << "skipping unreadable session file " << entry.path() << "\n";
      continue;
    }
    const std::string id = doc["session_id"].get<std::string>();
    if (find(id)) continue;
    auto record = std::make_shared<Record>();
    record->id = id;
    record->created = doc.value("created", "");
    record->updated = doc.value("updated", "");
    record->error = doc.value("error", "");
    try {
      SessionConfig config = session_config_from_json(doc.at("config"));
      Objective objective = make_sharpe_objective(*config.objective);
      record->session = std::make_unique<Session>(
          Session::restore(std::move(config), session_state_from_json(doc.at("state")), std::move(objective)));
    } catch (const std::exception& e) {
      std::cerr << "cannot resume session " << id << ": " << e.what() << "\n";
      continue;
    }
    record->status = derive_status(*record->session, !record->error.empty());
    publish(*record);
    {
      std::lock_guard lock(registry_mutex_);
      sessions_[id] = record;
    }
    ++loaded;
    if (record->status == SessionStatus::kRunning ||
        (record->status == SessionStatus::kAwaitingRanking && record->session->config().oracle.simulated())) {
      launch(record);
    }
  }
  return loaded;
}

ApiResponse SessionService::list_sessions() const {
  std::vector<std::shared_ptr<Record>> records;
  {
    std::lock_guard lock(registry_mutex_);
    for (const auto& [id, r] : sessions_) records.push_back(r);
  }
  Json list = Json::array();
  for (const auto& r : records) {
    if (const auto snap = r->read()) list.push_back(snap->summary);
  }
  return {200, Json{{"sessions", list}}};
}

ApiResponse SessionService::get_session(const std::string& id) const {
  const auto r = find(id);
  if (!r) return error(404, "unknown session " + id);
  return {200, r->read()->summary};
}

ApiResponse SessionService::get_query(const std::string& id) const {
  const auto r = find(id);
  if (!r) return error(404, "unknown session " + id);
  const auto snap = r->read();
  if (snap->query.is_null()) return {204, nullptr};
  return {200, snap->query};
}

ApiResponse SessionService::post_ranking(const std::string& id, const std::string& body) {
  const auto record = find(id);
  if (!record) return error(404, "unknown session " + id);
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::exception& e) {
    return error(400, std::string("body: invalid JSON: ") + e.what());
  }
  Record& r = *record;
  std::unique_lock lock(r.mutex);
  if (r.halted) return error(503, "session halted");
  Session& s = *r.session;
  const auto& pending = s.state().pending;
  if (!pending) return error(409, "query_id: no ranking query is pending");
  if (!j.is_object() || !j.contains("query_id") || !j["query_id"].is_string()) {
    return error(422, "query_id: required");
  }
  if (j["query_id"].get<std::string>() != pending->query.id) {
    return error(409, "query_id: " + j["query_id"].get<std::string>() + " is not the pending query");
  }
  try {
    s.submit_ranking(ranking_response_from_json(j));
  } catch (const StaleQueryError& e) {
    return error(409, std::string("query_id: ") + e.what());
  } catch (const InvalidRankingError& e) {
    return error(422, std::string("order: ") + e.what());
  }
  try {
    if (s.can_propose()) s.propose_query();
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  if (!persist(r, lock)) return error(503, "session halted");
  const auto& next = s.state().pending;
  Json out{{"status", to_string(r.status)},
           {"phase", to_string(s.phase())},
           {"next_query_id", next ? Json(next->query.id) : Json(nullptr)}};
  return {200, out};
}

ApiResponse SessionService::get_results(const std::string& id, const std::optional<std::string>& alpha,
                                        bool partial) const {
  const auto r = find(id);
  if (!r) return error(404, "unknown session " + id);
  const auto snap = r->read();
  double a = snap->result ? snap->result->alpha : 0.0;
  if (alpha) {
    const char* first = alpha->data();
    const char* last = first + alpha->size();
    const auto [ptr, ec] = std::from_chars(first, last, a);
    if (ec != std::errc() || ptr != last) return error(422, "alpha: not a number");
    if (!(a > 0.0 && a < 1.0)) return error(422, "alpha: must lie in (0, 1)");
  }
  if (snap->status != SessionStatus::kDone && !partial) {
    return error(409, "session is " + to_string(snap->status) + "; pass partial=true for a snapshot");
  }
  if (!snap->result) return error(409, "x_opt not determined yet");
  return {200, to_json(snap->result->with_alpha(a))};
}

void SessionService::wait(const std::string& id) {
  const auto r = find(id);
  if (!r) return;
  std::lock_guard lock(r->worker_mutex);
  if (r->worker.joinable()) r->worker.join();
}

void SessionService::shutdown() {
  std::vector<std::shared_ptr<Record>> records;
  {
    std::lock_guard lock(registry_mutex_);
    stopping_ = true;
    for (const auto& [id, r] : sessions_) records.push_back(r);
  }
  for (const auto& r : records) r->stop = true;
  for (const auto& r : records) {
    std::lock_guard lock(r->worker_mutex);
    if (r->worker.joinable()) r->worker.join();
  }
}

namespace {

void reply(httplib::Response& res, const ApiResponse& api) {
  res.status = api.status;
  if (!api.body.is_null()) res.set_content(api.body.dump(), "application/json");
}

bool truthy(const std::string& v) { return v == "1" || v == "true" || v == "yes"; }

}  // namespace

void SessionService::bind(httplib::Server& server) {
  const std::string id = "([0-9A-Za-z-]+)";
  server.Post("/api/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    reply(res, create_session(req.body));
  });
  server.Get("/api/v1/sessions", [this](const httplib::Request&, httplib::Response& res) {
    reply(res, list_sessions());
  });
  server.Get("/api/v1/sessions/" + id, [this](const httplib::Request& req, httplib::Response& res) {
    reply(res, get_session(req.matches[1]));
  });
  server.Get("/api/v1/sessions/" + id + "/query", [this](const httplib::Request& req, httplib::Response& res) {
    reply(res, get_query(req.matches[1]));
  });
  server.Post("/api/v1/sessions/" + id + "/ranking",
              [this](const httplib::Request& req, httplib::Response& res) {
                reply(res, post_ranking(req.matches[1], req.body));
              });
  server.Get("/api/v1/sessions/" + id + "/results",
             [this](const httplib::Request& req, httplib::Response& res) {
               std::optional<std::string> alpha;
               if (req.has_param("alpha")) alpha = req.get_param_value("alpha");
               const bool partial = req.has_param("partial") && truthy(req.get_param_value("partial"));
               reply(res, get_results(req.matches[1], alpha, partial));
             });
  if (!options_.ui_dir.empty() && std::filesystem::is_directory(options_.ui_dir)) {
    server.set_mount_point("/", options_.ui_dir.string());
  }
}

int serve(const ServiceOptions& options, const std::string& host, int port) {
  SessionService service(options);
  const std::size_t resumed = service.resume();
  httplib::Server server;
  service.bind(server);
  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(host);
  } else if (!server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    std::cerr << "cannot bind " << host << ":" << port << "\n";
    return 3;
  }
  std::cerr << "listening on http://" << host << ":" << bound << " (" << resumed << " sessions resumed)\n";
  return server.listen_after_bind() ? 0 : 3;
}

}  // namespace distinctbo
