#include "gameblend/errors.hpp"
#include "gameblend/workbench.hpp"

// After Eigen: resolv.h, pulled in by httplib, defines a `_res` macro that
// collides with Eigen parameter names.
#include <httplib.h>

namespace gameblend {

struct HttpServer::Impl {
  const Service& service;
  httplib::Server server;
  explicit Impl(const Service& s) : service(s) {}
};

HttpServer::HttpServer(const Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    const Response r = impl_->service.handle(req.method, req.path, req.body, query);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto& s = impl_->server;
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  // The UI sends JSON bodies, which makes browsers preflight.
  s.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  s.Get(R"(/.*)", route);
  s.Post(R"(/.*)", route);
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  auto& s = impl_->server;
  if (port == 0) {
    const int p = s.bind_to_any_port(host);
    if (p < 0) throw DataError("cannot bind " + host);
    return p;
  }
  if (!s.bind_to_port(host, port)) throw DataError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace gameblend
