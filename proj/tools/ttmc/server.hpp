#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace httplib {
class Server;
}

namespace ttmc {

struct ServerOptions {
  std::string default_model;  // used when POST /sessions names no model
  bool verbose = false;
  std::size_t max_sessions = 256;
  std::size_t event_backlog = 256;  // push events kept per session
};

/// HTTP+JSON front end for simulator sessions.
///
///   POST   /sessions                 {model?|source?, seed?} -> 201 {id, state}
///   GET    /sessions/:id/state
///   GET    /sessions/:id/enabled
///   POST   /sessions/:id/fire        {transition | index, choice?}
///   POST   /sessions/:id/undo        {k?}
///   POST   /sessions/:id/redo
///   POST   /sessions/:id/walk        {steps}
///   GET    /sessions/:id/trace       line-delimited JSON trace
///   POST   /sessions/:id/trace       replace the session by a trace
///   GET    /sessions/:id/events      server-sent events, one per change
///   DELETE /sessions/:id
class SimServer {
 public:
  explicit SimServer(ServerOptions opts);
  ~SimServer();

  /// Binds without serving; port 0 picks a free port. Returns the port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void run();
  void stop();
  bool running() const;

 private:
  struct Entry;
  std::shared_ptr<Entry> find(const std::string& id);
  void routes();
  void publish(Entry& e, const std::string& kind);

  ServerOptions opts_;
  std::unique_ptr<httplib::Server> http_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_id_ = 1;
  std::atomic<bool> stopping_{false};
};

}  // namespace ttmc
