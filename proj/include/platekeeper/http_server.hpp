#pragma once

#include <string>

#include <httplib.h>

#include "platekeeper/api.hpp"

namespace platekeeper::api {

/// Binds the v1 route table onto an httplib server.
class HttpServer {
public:
    explicit HttpServer(Api& api) : api_(api) { install_routes(); }

    /// Blocks until stop() is called. Returns false if the address cannot be bound.
    bool listen(const std::string& host, int port) { return server_.listen(host, port); }

    /// Returns the bound port (port 0 picks a free one), or -1.
    int bind(const std::string& host, int port) {
        if (port == 0) return server_.bind_to_any_port(host);
        return server_.bind_to_port(host, port) ? port : -1;
    }
    bool listen_after_bind() { return server_.listen_after_bind(); }

    void stop() { server_.stop(); }
    bool is_running() const { return server_.is_running(); }
    void wait_until_ready() const { server_.wait_until_ready(); }

private:
    static void reply(httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body, kContentType);
    }

    template <class F>
    static void guarded(httplib::Response& res, F&& f) {
        try {
            reply(res, f());
        } catch (const Error& e) {
            reply(res, error_response(e.code_name(), e.what()));
        } catch (const std::exception& e) {
            reply(res, error_response("INTERNAL", e.what()));
        }
    }

    static std::map<std::string, std::string> query(const httplib::Request& req) {
        std::map<std::string, std::string> out;
        for (const auto& [k, v] : req.params) out.emplace(k, v);
        return out;
    }

    void install_routes() {
        server_.Post("/api/v1/plates", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { return api_.register_plate(req.body); });
        });
        server_.Post(R"(/api/v1/plates/([^/]+)/position)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { return api_.change_position(req.matches[1], req.body); });
        });
        server_.Post(R"(/api/v1/plates/([^/]+)/decommission)",
                     [this](const httplib::Request& req, httplib::Response& res) {
                         guarded(res, [&] { return api_.decommission(req.matches[1]); });
                     });
        server_.Get(R"(/api/v1/plates/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { return api_.plate_lookup(req.matches[1]); });
        });
        server_.Post("/api/v1/maintenances", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { return api_.capture_submission(req.body); });
        });
        server_.Delete(R"(/api/v1/maintenances/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { return api_.delete_maintenance(req.matches[1]); });
        });
        server_.Get(R"(/api/v1/reports/(top-cost|period-comparison|replacement))",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        guarded(res, [&] { return api_.report(req.matches[1].str(), query(req)); });
                    });
        server_.Get(R"(/api/v1/catalog/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { return api_.catalog(req.matches[1].str()); });
        });
        server_.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) {
                auto code = res.status == 404 ? "NOT_FOUND" : "INTERNAL";
                res.set_content(json{{"code", code}, {"message", "no such route"}}.dump(), kContentType);
            }
        });
    }

    Api& api_;
    httplib::Server server_;
};

}  // namespace platekeeper::api
