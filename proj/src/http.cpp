#include "pp/http.hpp"

#include <httplib.h>

#include <map>
#include <mutex>

#include "pp/error.hpp"
#include "pp/service.hpp"

namespace pp::http {

namespace fs = std::filesystem;
using service::Run;

int status_for(std::string_view code) {
  if (code == "NotFound") return 404;
  if (code == "GateAlreadyResolved" || code == "GateConflict" || code == "GateOrderViolation" ||
      code == "PhaseError") {
    return 409;
  }
  return 422;
}

struct Server::Impl {
  ServerOptions opts;
  httplib::Server server;
  std::mutex locks_mu;
  std::map<std::string, std::unique_ptr<std::mutex>> locks;
  std::mutex create_mu;

  std::mutex& lock_for(const std::string& id) {
    std::lock_guard g(locks_mu);
    auto& m = locks[id];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
  }

  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  template <class F>
  static void guarded(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      const auto code = std::string(to_string(e.code()));
      reply(res, status_for(code), {{"error", code}, {"message", e.message()}});
    } catch (const json::exception& e) {
      reply(res, 400, {{"error", "BadRequest"}, {"message", e.what()}});
    } catch (const std::exception& e) {
      reply(res, 500, {{"error", "Internal"}, {"message", e.what()}});
    }
  }

  static std::optional<std::string> query(const httplib::Request& req, const char* key) {
    if (!req.has_param(key)) return std::nullopt;
    return req.get_param_value(key);
  }

  static json body_of(const httplib::Request& req) {
    return req.body.empty() ? json::object() : json::parse(req.body);
  }

  Run open(const httplib::Request& req) const { return Run::open(opts.runs_root, req.matches[1].str()); }

  void routes() {
    server.Get("/api/runs", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        json runs = json::array();
        for (const auto& id : service::list_runs(opts.runs_root)) {
          const auto run = Run::open(opts.runs_root, id);
          runs.push_back({{"run_id", id}, {"phase", service::to_string(run.phase())}});
        }
        reply(res, 200, {{"runs", runs}});
      });
    });

    server.Post("/api/runs", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = body_of(req);
        const auto cfg = service::run_config_from_json(body, opts.base_dir);
        const bool auto_approve = body.value("auto_approve", false);
        std::lock_guard g(create_mu);
        auto run = Run::create(opts.runs_root, cfg);
        std::lock_guard rg(lock_for(run.id()));
        run.advance(auto_approve);
        reply(res, 201, run.info());
      });
    });

    server.Get(R"(/api/runs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, open(req).info()); });
    });

    server.Get(R"(/api/runs/([^/]+)/categories)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, open(req).categories(query(req, "profile"))); });
    });

    server.Post(R"(/api/runs/([^/]+)/selection)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto run = open(req);
        const json body = body_of(req);
        std::optional<std::string> profile;
        if (body.contains("profile")) profile = body.at("profile").get<std::string>();
        std::lock_guard g(lock_for(run.id()));
        run.select_categories(body.at("categories").get<std::vector<std::string>>(), profile);
        run.advance();
        reply(res, 200, run.info());
      });
    });

    server.Get(R"(/api/runs/([^/]+)/ranking)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, open(req).ranking(query(req, "profile"))); });
    });

    server.Get(R"(/api/runs/([^/]+)/matches)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, open(req).matches()); });
    });

    server.Get(R"(/api/runs/([^/]+)/reports)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, open(req).reports()); });
    });

    server.Get(R"(/api/runs/([^/]+)/gates/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto run = open(req);
        reply(res, 200, run.gate(gates::gate_from_string(req.matches[2].str())));
      });
    });

    server.Post(R"(/api/runs/([^/]+)/gates/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto run = open(req);
        const auto g = gates::gate_from_string(req.matches[2].str());
        const json body = body_of(req);
        std::lock_guard lock(lock_for(run.id()));
        if (body.value("action", "") == "reopen") {
          run.reopen(g);
        } else {
          auto s = gates::submission_from_json(body);
          if (s.gate_id.empty()) s.gate_id = std::string(gates::to_string(g));
          run.review(g, s);
          run.advance();
        }
        json out = run.gate(g);
        out["run"] = run.info();
        reply(res, 200, out);
      });
    });

    if (opts.static_dir) server.set_mount_point("/", opts.static_dir->string());
  }
};

Server::Server(ServerOptions opts) : impl_(std::make_unique<Impl>()) {
  impl_->opts = std::move(opts);
  impl_->routes();
}

Server::~Server() = default;

int Server::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool Server::serve() { return impl_->server.listen_after_bind(); }

void Server::stop() { impl_->server.stop(); }

}  // namespace pp::http
