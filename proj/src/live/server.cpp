#include "live/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <deque>
#include <filesystem>

#include "common/error.hpp"
#include "live/session.hpp"
#include "runs/layout.hpp"

namespace predprey::live {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
namespace fs = std::filesystem;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

Session load_session(const RunLayout& layout, int generation) {
  const RunConfig config = load_run_dir_config(layout);
  GenerationLineup lineup;
  lineup.generation = generation;
  for (int i = 0; i < kPredatorCount; ++i) {
    lineup.predators[i] = load_hof_genome(layout, predator_role(i), generation);
  }
  lineup.prey = load_hof_genome(layout, Role::kPrey, generation);
  return Session(std::move(lineup), config.env.arena, config.env.camera);
}

json error_message(const std::string& code, const std::string& message) {
  return {{"type", "error"}, {"code", code}, {"message", message}};
}

const char* mime_type(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

}  // namespace

class WsClient;
class HttpConnection;

class LiveServer::Impl : public std::enable_shared_from_this<LiveServer::Impl> {
 public:
  explicit Impl(ServeOptions options);

  void start();
  void shutdown();
  void accept();
  void schedule_tick();
  void do_tick();

  void attach(const std::shared_ptr<WsClient>& client);
  void detach(WsClient* client);
  bool has_client() const { return client_ != nullptr; }
  void on_message(const std::string& text);
  void send(const json& message);
  http::response<http::string_body> handle_http(const http::request<http::string_body>& req);

  ServeOptions options_;
  RunLayout layout_;
  Session session_;
  net::io_context ioc_{1};
  tcp::acceptor acceptor_{ioc_};
  net::steady_timer timer_{ioc_};
  net::steady_timer::time_point next_tick_;
  net::signal_set signals_{ioc_};
  std::shared_ptr<WsClient> client_;
  std::vector<std::weak_ptr<HttpConnection>> pending_http_;
  bool stopping_ = false;
};

class WsClient : public std::enable_shared_from_this<WsClient> {
 public:
  WsClient(tcp::socket socket, std::shared_ptr<LiveServer::Impl> server)
      : ws_(std::move(socket)), server_(std::move(server)) {}

  void start(http::request<http::string_body> req) {
    websocket::stream_base::timeout timeouts{};
    timeouts.handshake_timeout = std::chrono::seconds(2);
    timeouts.idle_timeout = websocket::stream_base::none();
    timeouts.keep_alive_pings = false;
    ws_.set_option(timeouts);
    ws_.text(true);
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->server_->attach(self);
      self->read();
    });
  }

  void send(std::string text) {
    if (closed_) return;
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) write();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    ws_.async_close(websocket::close_code::going_away, [self = shared_from_this()](beast::error_code) {});
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        self->server_->detach(self.get());
        return;
      }
      std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->server_->on_message(text);
      self->read();
    });
  }

  void write() {
    ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->queue_.clear();
        return;
      }
      self->queue_.pop_front();
      if (!self->queue_.empty() && !self->closed_) self->write();
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<LiveServer::Impl> server_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool closed_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, std::shared_ptr<LiveServer::Impl> server)
      : stream_(std::move(socket)), server_(std::move(server)) {}

  void abort() {
    beast::error_code ignored;
    stream_.socket().close(ignored);
  }

  void start() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (!ec) self->on_request();
    });
  }

 private:
  void on_request() {
    if (websocket::is_upgrade(req_)) {
      if (server_->has_client()) {
        respond(text_response(http::status::conflict, "session already has a client\n"));
        return;
      }
      stream_.expires_never();
      std::make_shared<WsClient>(stream_.release_socket(), server_)->start(std::move(req_));
      return;
    }
    respond(server_->handle_http(req_));
  }

  http::response<http::string_body> text_response(http::status status, std::string body) {
    http::response<http::string_body> res{status, req_.version()};
    res.set(http::field::content_type, "text/plain");
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  }

  void respond(http::response<http::string_body> res) {
    res.keep_alive(false);
    auto msg = std::make_shared<http::response<http::string_body>>(std::move(res));
    http::async_write(stream_, *msg, [self = shared_from_this(), msg](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  std::shared_ptr<LiveServer::Impl> server_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

LiveServer::Impl::Impl(ServeOptions options)
    : options_(std::move(options)),
      layout_{options_.run_dir},
      session_(load_session(layout_, options_.generation)) {
  if (options_.session_log.empty()) options_.session_log = (layout_.root / "sessions.jsonl").string();
  session_.open_log(options_.session_log);

  beast::error_code ec;
  const auto address = net::ip::make_address(options_.bind_address, ec);
  if (ec) throw Error(ErrorCode::kArgument, "bad bind address " + options_.bind_address);
  const tcp::endpoint endpoint{address, options_.port};
  acceptor_.open(endpoint.protocol(), ec);
  if (!ec) acceptor_.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) acceptor_.bind(endpoint, ec);
  if (ec == net::error::address_in_use) {
    throw Error(ErrorCode::kPortInUse, "port " + std::to_string(options_.port) + " is already in use");
  }
  if (!ec) acceptor_.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot listen on port " + std::to_string(options_.port) + ": " + ec.message());
}

void LiveServer::Impl::start() {
  accept();
  if (!options_.lockstep) {
    next_tick_ = net::steady_timer::clock_type::now() + options_.tick_interval;
    schedule_tick();
  }
  if (options_.handle_signals) {
    signals_.add(SIGINT);
    signals_.add(SIGTERM);
    signals_.async_wait([self = shared_from_this()](beast::error_code ec, int) {
      if (!ec) self->shutdown();
    });
  }
}

void LiveServer::Impl::shutdown() {
  if (stopping_) return;
  stopping_ = true;
  beast::error_code ignored;
  acceptor_.close(ignored);
  timer_.cancel();
  signals_.cancel(ignored);
  if (client_) client_->close();
  client_.reset();
  for (auto& w : pending_http_) {
    if (auto conn = w.lock()) conn->abort();
  }
  pending_http_.clear();
  session_.flush_log();
}

void LiveServer::Impl::accept() {
  acceptor_.async_accept(net::make_strand(ioc_), [self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    auto conn = std::make_shared<HttpConnection>(std::move(socket), self);
    std::erase_if(self->pending_http_, [](const auto& w) { return w.expired(); });
    self->pending_http_.push_back(conn);
    conn->start();
    self->accept();
  });
}

void LiveServer::Impl::schedule_tick() {
  timer_.expires_at(next_tick_);
  timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
    if (ec || self->stopping_) return;
    self->do_tick();
    // Falling behind skips wall time instead of bunching ticks together.
    const auto now = net::steady_timer::clock_type::now();
    self->next_tick_ = std::max(self->next_tick_ + self->options_.tick_interval, now);
    self->schedule_tick();
  });
}

void LiveServer::Impl::do_tick() {
  const auto step = session_.tick();
  if (!step) return;
  send(frame_to_json(step->frame));
  if (step->ended) {
    json end = record_to_json(*step->ended);
    end["type"] = "trial_end";
    send(end);
  }
}

void LiveServer::Impl::attach(const std::shared_ptr<WsClient>& client) {
  if (stopping_ || client_) {
    client->close();
    return;
  }
  client_ = client;
}

void LiveServer::Impl::detach(WsClient* client) {
  if (client_.get() != client) return;
  client_.reset();
  session_.abort_trial();
}

void LiveServer::Impl::send(const json& message) {
  if (client_) client_->send(message.dump());
}

void LiveServer::Impl::on_message(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception&) {
    send(error_message("E_MALFORMED", "message is not JSON"));
    return;
  }
  try {
    const std::string type = doc.value("type", "");
    if (type == "start") {
      const Role role = role_from_name(doc.value("role", "prey"));
      const std::uint64_t seed = doc.value("seed", static_cast<std::uint64_t>(session_.records().size() + 1));
      const FrameMessage first = session_.start_trial(role, seed);
      send({{"type", "start"},
            {"trial", first.trial},
            {"role", role_name(role)},
            {"seed", seed},
            {"generation", session_.generation()},
            {"countdown", options_.lockstep ? 0.0 : kCountdownSeconds},
            {"dt", session_.arena().dt},
            {"episode_time", session_.arena().episode_time},
            {"side_length", session_.arena().side_length},
            {"catch_radius", session_.arena().catch_radius},
            {"body_radius", session_.arena().robot_body_radius}});
      send(frame_to_json(first));
    } else if (type == "control") {
      const int trial = doc.at("trial").get<int>();
      const auto keys = doc.at("keys").get<std::int64_t>();
      if (keys < 0 || keys > 0xffffffffLL) throw Error(ErrorCode::kArgument, "keys out of range");
      if (session_.set_keys(trial, static_cast<std::uint32_t>(keys)) && options_.lockstep) do_tick();
    } else if (type == "stats") {
      send(stats_to_json(trial_stats(session_.records())));
    } else {
      send(error_message("E_MALFORMED", "unknown message type '" + type + "'"));
    }
  } catch (const Error& e) {
    send(error_message(error_code_name(e.code()), e.what()));
  } catch (const json::exception& e) {
    send(error_message("E_MALFORMED", e.what()));
  }
}

http::response<http::string_body> LiveServer::Impl::handle_http(const http::request<http::string_body>& req) {
  auto reply = [&](http::status status, const std::string& type, std::string body) {
    http::response<http::string_body> res{status, req.version()};
    res.set(http::field::content_type, type);
    res.set(http::field::access_control_allow_origin, "*");
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  };
  if (req.method() != http::verb::get) return reply(http::status::method_not_allowed, "text/plain", "GET only\n");
  std::string target(req.target());
  if (const auto q = target.find('?'); q != std::string::npos) target.resize(q);

  if (target == "/api/runs") {
    json runs = json::array();
    const fs::path root = fs::absolute(layout_.root).lexically_normal();
    const fs::path parent = root.has_filename() ? root.parent_path() : root.parent_path().parent_path();
    std::vector<fs::path> dirs;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(parent, ec)) {
      if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
      try {
        const Manifest m = read_manifest(RunLayout{dir});
        runs.push_back({{"name", dir.filename().string()},
                        {"generations", m.generations_completed},
                        {"complete", m.complete}});
      } catch (const Error&) {
        // Unreadable manifests are left out of the picker.
      }
    }
    const json body = {{"runs", std::move(runs)},
                       {"served", {{"run", root.filename().string()}, {"generation", session_.generation()}}}};
    return reply(http::status::ok, "application/json", body.dump() + "\n");
  }
  if (target == "/api/stats") {
    if (session_.records().empty()) {
      return reply(http::status::not_found, "application/json",
                   error_message("E_TRIAL", "no finished trials").dump() + "\n");
    }
    return reply(http::status::ok, "application/json", stats_to_json(trial_stats(session_.records())).dump() + "\n");
  }
  if (!options_.static_dir.empty() && target.find("..") == std::string::npos && !target.empty() &&
      target.front() == '/') {
    fs::path file = fs::path(options_.static_dir) / target.substr(1);
    if (target == "/") file = fs::path(options_.static_dir) / "index.html";
    if (fs::is_regular_file(file)) return reply(http::status::ok, mime_type(file), read_file(file));
  }
  return reply(http::status::not_found, "text/plain", "not found\n");
}

LiveServer::LiveServer(ServeOptions options) : impl_(std::make_shared<Impl>(std::move(options))) {}

LiveServer::~LiveServer() { stop(); }

unsigned short LiveServer::port() const {
  beast::error_code ec;
  const auto ep = impl_->acceptor_.local_endpoint(ec);
  return ec ? impl_->options_.port : ep.port();
}

void LiveServer::run() {
  impl_->start();
  impl_->ioc_.run();
  impl_->session_.flush_log();
}

void LiveServer::stop() {
  auto impl = impl_;
  net::post(impl->ioc_, [impl] { impl->shutdown(); });
}

}  // namespace predprey::live
