#pragma once

// HTTP transport for sessions. Messages travel as JSON; streams are NDJSON.
//
//   POST   /session                 hello -> ack (with "session") or 4xx error
//   POST   /session/{id}/send       one message -> NDJSON of the messages it produced
//   GET    /session/{id}/events     ?from=N&follow=0|1, NDJSON of the log from index N
//   DELETE /session/{id}
//   GET    /catalog

#include <atomic>
#include <map>
#include <memory>

#include <httplib.h>

#include "marijke/session.hpp"

namespace marijke {

inline std::string to_ndjson(const std::vector<json>& messages) {
  std::string out;
  for (const json& m : messages)
    out += m.dump() + '\n';
  return out;
}

inline json catalog_json() {
  json out = json::array();
  for (const Requirement& r : catalog())
    out.push_back({{"id", r.id}, {"title", r.title}, {"category", std::string(name(r.category))}});
  return out;
}

class Service {
public:
  explicit Service(SessionOptions defaults = {}) : defaults_(std::move(defaults)) { routes(); }

  ~Service() { stop(); }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and serves on the calling thread until stop().
  bool listen(const std::string& host, int port) { return server_.listen(host, port); }

  /// Binds an ephemeral port and serves on a background thread.
  int start(const std::string& host = "127.0.0.1") {
    const int port = server_.bind_to_any_port(host);
    if (port < 0)
      throw Error("cannot bind " + host);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port;
  }

  void stop() {
    stopping_ = true;
    {
      std::unique_lock lock(mu_);
      for (auto& [id, s] : sessions_)
        s->close();
    }
    server_.stop();
    if (thread_.joinable())
      thread_.join();
  }

  std::shared_ptr<Session> session(const std::string& id) const {
    std::unique_lock lock(mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

private:
  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static json error_json(const std::string& message) {
    return {{"kind", "error"}, {"id", nullptr}, {"message", message}};
  }

  void routes() {
    server_.Get("/catalog", [](const httplib::Request&, httplib::Response& res) { reply(res, 200, catalog_json()); });

    server_.Post("/session", [this](const httplib::Request& req, httplib::Response& res) {
      json hello;
      try {
        hello = json::parse(req.body);
      } catch (const json::exception& e) {
        return reply(res, 400, error_json(std::string("malformed hello: ") + e.what()));
      }
      const json corr = hello.is_object() && hello.contains("id") ? hello["id"] : json(nullptr);
      try {
        SessionOptions opt = parse_hello(hello, defaults_);
        std::shared_ptr<Session> s;
        {
          std::unique_lock lock(mu_);
          const std::string id = "s" + std::to_string(++counter_);
          s = std::make_shared<Session>(id, opt);
          sessions_.emplace(id, s);
        }
        reply(res, 200, s->hello_ack(corr));
      } catch (const ProtocolError& e) {
        json err = error_json(e.what());
        err["id"] = corr;
        err["v"] = protocol_version;
        reply(res, 426, err);
      } catch (const Error& e) {
        json err = error_json(e.what());
        err["id"] = corr;
        reply(res, 400, err);
      }
    });

    server_.Post(R"(/session/([^/]+)/send)", [this](const httplib::Request& req, httplib::Response& res) {
      auto s = session(req.matches[1]);
      if (!s)
        return reply(res, 404, error_json("unknown session"));
      res.set_content(to_ndjson(s->handle_text(req.body)), "application/x-ndjson");
    });

    server_.Get(R"(/session/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
      auto s = session(req.matches[1]);
      if (!s)
        return reply(res, 404, error_json("unknown session"));
      std::size_t from = 0;
      try {
        if (req.has_param("from"))
          from = std::stoull(req.get_param_value("from"));
      } catch (const std::exception&) {
        return reply(res, 400, error_json("bad 'from'"));
      }
      const bool follow = req.get_param_value("follow") == "1";
      if (!follow)
        return res.set_content(to_ndjson(s->messages(from)), "application/x-ndjson");
      auto next = std::make_shared<std::size_t>(from);
      res.set_chunked_content_provider("application/x-ndjson", [this, s, next](std::size_t, httplib::DataSink& sink) {
        while (!stopping_ && sink.is_writable()) {
          auto batch = s->messages(*next, std::chrono::milliseconds(200));
          if (!batch.empty()) {
            *next += batch.size();
            const std::string text = to_ndjson(batch);
            return sink.write(text.data(), text.size());
          }
          if (s->closed())
            break;
        }
        sink.done();
        return true;
      });
    });

    server_.Delete(R"(/session/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::shared_ptr<Session> s;
      {
        std::unique_lock lock(mu_);
        auto it = sessions_.find(req.matches[1]);
        if (it == sessions_.end())
          return reply(res, 404, error_json("unknown session"));
        s = it->second;
        sessions_.erase(it);
      }
      s->close();
      res.status = 204;
    });
  }

  SessionOptions defaults_;
  httplib::Server server_;
  std::thread thread_;
  std::atomic<bool> stopping_{false};
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
};

} // namespace marijke
