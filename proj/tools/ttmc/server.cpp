#include "server.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "app.hpp"
#include "ttm/sim/session.hpp"

namespace ttmc {

using nlohmann::json;
using ttm::Error;
using ttm::ErrorKind;

struct SimServer::Entry {
  std::mutex mu;
  std::condition_variable cv;
  std::unique_ptr<ttm::sim::Session> session;
  std::deque<std::string> events;  // formatted SSE messages
  std::uint64_t seq = 0;           // number of events ever published
  bool closed = false;
};

namespace {

int status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotEnabled:
    case ErrorKind::BadChoice:
    case ErrorKind::BadIndex:
    case ErrorKind::ModelMismatch:
    case ErrorKind::ReplayDivergence:
      return 409;
    case ErrorKind::IoError:
      return 400;
    case ErrorKind::StateLimitExceeded:
      return 507;
    default:
      return 422;
  }
}

void send_json(httplib::Response& res, const json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind, const std::string& message) {
  send_json(res, json{{"error", kind}, {"message", message}}, status);
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body);  // json::parse_error is reported as 400
  if (!j.is_object()) throw Error(ErrorKind::IoError, "request body must be a JSON object");
  return j;
}

json state_of(const ttm::sim::Session& s) { return json::parse(s.state_json()); }

json enabled_of(const ttm::sim::Session& s) {
  json list = json::array();
  auto en = s.enabled();
  for (std::size_t i = 0; i < en.size(); ++i) {
    const char* kind = en[i].name.kind == ttm::lts::TransitionName::Kind::Tick   ? "tick"
                       : en[i].name.kind == ttm::lts::TransitionName::Kind::Hash ? "hash"
                                                                                  : "event";
    list.push_back(
        {{"index", i}, {"transition", en[i].label}, {"kind", kind}, {"choices", en[i].choices}, {"advances", en[i].advances}});
  }
  return json{{"step", s.history().size()}, {"enabled", list}};
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const json::exception& e) {
    send_error(res, 400, "BadRequest", e.what());
  } catch (const Error& e) {
    std::string msg = render_error(e, "");
    while (!msg.empty() && msg.back() == '\n') msg.pop_back();
    send_error(res, status_of(e.kind()), ttm::to_string(e.kind()), msg);
  } catch (const std::exception& e) {
    send_error(res, 500, "InternalError", e.what());
  }
}

}  // namespace

SimServer::SimServer(ServerOptions opts) : opts_(std::move(opts)), http_(std::make_unique<httplib::Server>()) {
  routes();
}

SimServer::~SimServer() { stop(); }

int SimServer::bind(const std::string& host, int port) {
  if (port == 0) return http_->bind_to_any_port(host);
  return http_->bind_to_port(host, port) ? port : -1;
}

void SimServer::run() {
  stopping_ = false;
  http_->listen_after_bind();
}

void SimServer::stop() {
  stopping_ = true;
  {
    std::lock_guard lock(mu_);
    for (auto& [id, e] : sessions_) {
      std::lock_guard l(e->mu);
      e->closed = true;
      e->cv.notify_all();
    }
  }
  if (http_->is_running()) http_->stop();
}

bool SimServer::running() const { return http_->is_running(); }

std::shared_ptr<SimServer::Entry> SimServer::find(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

void SimServer::publish(Entry& e, const std::string& kind) {
  ++e.seq;
  e.events.push_back(fmt::format("event: {}\nid: {}\ndata: {}\n\n", kind, e.seq, e.session->state_json()));
  while (e.events.size() > opts_.event_backlog) e.events.pop_front();
  e.cv.notify_all();
}

void SimServer::routes() {
  auto& s = *http_;
  if (opts_.verbose)
    s.set_logger([](const httplib::Request& req, const httplib::Response& res) {
      spdlog::info("{} {} -> {}", req.method, req.path, res.status);
    });

  s.Get("/health", [](const httplib::Request&, httplib::Response& res) { send_json(res, json{{"ok", true}}); });

  s.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json b = body_of(req);
      LoadedModel m;
      if (b.contains("source")) m = load_source(b["source"].get<std::string>(), "<source>");
      else if (b.contains("model")) m = load_model(b["model"].get<std::string>());
      else if (!opts_.default_model.empty()) m = load_model(opts_.default_model);
      else throw Error(ErrorKind::IoError, "no model given and the server has no default model");
      auto e = std::make_shared<Entry>();
      e->session = std::make_unique<ttm::sim::Session>(m.sys, b.value("seed", std::uint64_t{0}));
      std::string id;
      {
        std::lock_guard lock(mu_);
        if (sessions_.size() >= opts_.max_sessions)
          throw Error(ErrorKind::StateLimitExceeded, "too many open sessions");
        id = fmt::format("s{}", next_id_++);
        sessions_[id] = e;
      }
      send_json(res, json{{"id", id}, {"model", ttm::sim::hex(e->session->model_hash())}, {"state", state_of(*e->session)}},
                201);
    });
  });

  // Runs `f` on a session under its lock; 404 for unknown ids.
  auto with = [this](const httplib::Request& req, httplib::Response& res, auto&& f) {
    auto e = find(req.matches[1]);
    if (!e) return send_error(res, 404, "UnknownSession", fmt::format("no session '{}'", std::string(req.matches[1])));
    guarded(res, [&] {
      std::lock_guard lock(e->mu);
      f(*e);
    });
  };

  s.Get(R"(/sessions/([^/]+)/state)", [with](const httplib::Request& req, httplib::Response& res) {
    with(req, res, [&](Entry& e) { send_json(res, state_of(*e.session)); });
  });

  s.Get(R"(/sessions/([^/]+)/enabled)", [with](const httplib::Request& req, httplib::Response& res) {
    with(req, res, [&](Entry& e) { send_json(res, enabled_of(*e.session)); });
  });

  s.Post(R"(/sessions/([^/]+)/fire)", [this, with](const httplib::Request& req, httplib::Response& res) {
    with(req, res, [&](Entry& e) {
      json b = body_of(req);
      std::optional<std::size_t> choice;
      if (b.contains("choice") && !b["choice"].is_null()) choice = b["choice"].get<std::size_t>();
      if (b.contains("index")) {
        auto en = e.session->enabled();
        auto i = b["index"].get<std::size_t>();
        if (i >= en.size()) throw Error(ErrorKind::BadIndex, fmt::format("no transition {}; {} are enabled", i, en.size()));
        e.session->fire(en[i].name, choice);
      } else if (b.contains("transition")) {
        e.session->fire(b["transition"].get<std::string>(), choice);
      } else {
        throw Error(ErrorKind::IoError, "fire needs 'transition' or 'index'");
      }
      publish(e, "fire");
      send_json(res, state_of(*e.session));
    });
  });

  s.Post(R"(/sessions/([^/]+)/undo)", [this, with](const httplib::Request& req, httplib::Response& res) {
    with(req, res, [&](Entry& e) {
      json b = body_of(req);
      e.session->undo(b.value("k", std::size_t{1}));
      publish(e, "undo");
      send_json(res, state_of(*e.session));
    });
  });

  s.Post(R"(/sessions/([^/]+)/redo)", [this, with](const httplib::Request& req, httplib::Response& res) {
    with(req, res, [&](Entry& e) {
      if (!e.session->redo()) throw Error(ErrorKind::BadIndex, "nothing to redo");
      publish(e, "redo");
      send_json(res, state_of(*e.session));
    });
  });

  s.Post(R"(/sessions/([^/]+)/walk)", [this, with](const httplib::Request& req, httplib::Response& res) {
    with(req, res, [&](Entry& e) {
      json b = body_of(req);
      std::size_t n = e.session->random_walk(b.value("steps", std::size_t{1}));
      publish(e, "walk");
      json out = state_of(*e.session);
      out["fired"] = n;
      send_json(res, out);
    });
  });

  s.Get(R"(/sessions/([^/]+)/trace)", [with](const httplib::Request& req, httplib::Response& res) {
    with(req, res, [&](Entry& e) { res.set_content(e.session->export_trace(), "application/x-ndjson"); });
  });

  s.Post(R"(/sessions/([^/]+)/trace)", [this, with](const httplib::Request& req, httplib::Response& res) {
    with(req, res, [&](Entry& e) {
      auto imported = ttm::sim::Session::import_trace(e.session->system_ptr(), req.body);
      *e.session = std::move(imported);
      publish(e, "import");
      send_json(res, state_of(*e.session));
    });
  });

  s.Delete(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    std::shared_ptr<Entry> e;
    {
      std::lock_guard lock(mu_);
      auto it = sessions_.find(req.matches[1]);
      if (it != sessions_.end()) {
        e = it->second;
        sessions_.erase(it);
      }
    }
    if (!e) return send_error(res, 404, "UnknownSession", fmt::format("no session '{}'", std::string(req.matches[1])));
    std::lock_guard l(e->mu);
    e->closed = true;
    e->cv.notify_all();
    res.status = 204;
  });

  s.Get(R"(/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
    auto e = find(req.matches[1]);
    if (!e) return send_error(res, 404, "UnknownSession", fmt::format("no session '{}'", std::string(req.matches[1])));
    std::uint64_t next;
    std::string snapshot;
    {
      std::lock_guard lock(e->mu);
      next = e->seq + 1;
      snapshot = fmt::format("event: state\nid: {}\ndata: {}\n\n", e->seq, e->session->state_json());
    }
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, e, next, snapshot, sent = false, idle = 0](std::size_t, httplib::DataSink& sink) mutable {
          if (!sent) {
            sent = true;
            return sink.write(snapshot.data(), snapshot.size());
          }
          std::unique_lock lock(e->mu);
          e->cv.wait_for(lock, std::chrono::milliseconds(200),
                         [&] { return e->closed || stopping_ || e->seq >= next; });
          if (e->closed || stopping_) {
            lock.unlock();
            sink.done();
            return true;
          }
          std::string out;
          const std::uint64_t first = e->seq - e->events.size() + 1;
          if (next < first) next = first;  // the client fell behind the backlog
          for (; next <= e->seq; ++next) out += e->events[static_cast<std::size_t>(next - first)];
          lock.unlock();
          if (out.empty()) {
            if (++idle < 75) return true;  // comment line every 15 s keeps proxies from closing the stream
            idle = 0;
            return sink.write(": keep-alive\n\n", 14);
          }
          idle = 0;
          return sink.write(out.data(), out.size());
        });
  });
}

}  // namespace ttmc
