#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "distinctbo/orchestrator.h"
#include "distinctbo/serialization.h"

namespace httplib {
class Server;
}

namespace distinctbo {

enum class SessionStatus { kRunning, kAwaitingRanking, kDone, kFailed };
std::string to_string(SessionStatus status);
SessionStatus session_status_from_string(const std::string& name);

struct ServiceOptions {
  std::filesystem::path data_dir = "sessions";  // one JSON document per session
  std::filesystem::path base_dir;               // resolves relative price file paths
  std::filesystem::path ui_dir;                 // served at "/" when it exists
  // Gives configs without a "seed" a fresh random one (stored with the
  // session, so resumes stay reproducible). Otherwise the default seed is 0.
  bool random_seeds = false;
  // Test hook: a session's worker stops for good after this many persisted
  // transitions, as if the process had been killed right after the write.
  std::optional<std::size_t> halt_after_transitions;
};

struct ApiResponse {
  int status = 200;
  Json body;  // null means no body
};

// Session registry behind the /api/v1 endpoints. Handlers are plain methods
// so they can be exercised without a socket; `bind` wires them to a server.
class SessionService {
 public:
  explicit SessionService(ServiceOptions options);
  ~SessionService();
  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  // Reloads every persisted session and resumes unfinished simulated ones.
  // Returns the number of sessions loaded.
  std::size_t resume();

  ApiResponse create_session(const std::string& body);
  ApiResponse list_sessions() const;
  ApiResponse get_session(const std::string& id) const;
  ApiResponse get_query(const std::string& id) const;
  ApiResponse post_ranking(const std::string& id, const std::string& body);
  ApiResponse get_results(const std::string& id, const std::optional<std::string>& alpha, bool partial) const;

  // Blocks until the session's background worker has exited.
  void wait(const std::string& id);
  void shutdown();

  void bind(httplib::Server& server);
  const ServiceOptions& options() const { return options_; }

 private:
  struct Record;
  std::shared_ptr<Record> find(const std::string& id) const;
  void launch(const std::shared_ptr<Record>& record);
  void drive(const std::shared_ptr<Record>& record);
  bool persist(Record& record, std::unique_lock<std::mutex>& held);
  void publish(Record& record);

  ServiceOptions options_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Record>> sessions_;
  bool stopping_ = false;
};

// Serves the API until stop() is called on `server` (or the process ends).
int serve(const ServiceOptions& options, const std::string& host, int port);

}  // namespace distinctbo
