#include "vibedaq/net/master_server.hpp"

#include <sys/socket.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <fstream>
#include <regex>
#include <spdlog/spdlog.h>
#include <sstream>

#include "json_views.hpp"
#include "vibedaq/master/csv_writer.hpp"
#include "vibedaq/protocol/frame.hpp"

namespace vibedaq::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

/// Unblocks a thread sitting in a synchronous read on `sock`.
void hard_shutdown(tcp::socket& sock) {
  if (sock.is_open()) ::shutdown(sock.native_handle(), SHUT_RDWR);
}

tcp::endpoint endpoint_of(const HostPort& hp) {
  return {asio::ip::make_address(hp.host), hp.port};
}

}  // namespace

struct MasterServer::Io {
  asio::io_context ctx;
  tcp::acceptor data_acceptor{ctx};
};

struct MasterServer::Connection {
  explicit Connection(tcp::socket s) : sock(std::move(s)) {}

  bool send(const proto::Message& msg) {
    const auto bytes = proto::encode_frame(msg);
    std::lock_guard lock(write_mu);
    boost::system::error_code ec;
    asio::write(sock, asio::buffer(bytes), ec);
    if (ec) {
      hard_shutdown(sock);
      return false;
    }
    return true;
  }

  tcp::socket sock;
  std::mutex write_mu;
  std::optional<std::uint8_t> slave_id;
};

// ---------------------------------------------------------------------------
// HTTP/WS API

struct MasterServer::ApiServer {
  explicit ApiServer(MasterServer& m) : master(m), acceptor(ctx) {}

  void start(const HostPort& hp) {
    const auto ep = endpoint_of(hp);
    acceptor.open(ep.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen();
    port = acceptor.local_endpoint().port();
    running = true;
    accept_thread = std::thread([this] { accept_loop(); });
    live_thread = std::thread([this] { live_loop(); });
  }

  void stop() {
    if (!running.exchange(false)) return;
    boost::system::error_code ec;
    ::shutdown(acceptor.native_handle(), SHUT_RDWR);
    acceptor.close(ec);
    live_cv.notify_all();
    {
      std::lock_guard lock(sessions_mu);
      for (auto& w : sockets) {
        if (auto s = w.lock()) hard_shutdown(*s);
      }
    }
    if (accept_thread.joinable()) accept_thread.join();
    if (live_thread.joinable()) live_thread.join();
    std::vector<std::thread> threads;
    {
      std::lock_guard lock(sessions_mu);
      threads.swap(session_threads);
    }
    for (auto& t : threads) t.join();
  }

  void accept_loop() {
    while (running) {
      auto sock = std::make_shared<tcp::socket>(ctx);
      boost::system::error_code ec;
      acceptor.accept(*sock, ec);
      if (ec) {
        if (!running) return;
        continue;
      }
      std::lock_guard lock(sessions_mu);
      sockets.push_back(sock);
      session_threads.emplace_back([this, sock] { serve(sock); });
    }
  }

  void live_loop() {
    const auto interval = std::chrono::microseconds(master.opts_.live_interval_us);
    while (running) {
      std::string text;
      {
        std::lock_guard lock(master.mu_);
        if (auto frame = master.coord_->live_frame(master.clock_.now_us())) text = to_json(*frame).dump();
      }
      {
        std::unique_lock lock(live_mu);
        if (!text.empty()) {
          latest = std::move(text);
          ++live_seq;
        }
        live_cv.notify_all();
        live_cv.wait_for(lock, interval, [this] { return !running; });
      }
    }
  }

  void serve(const std::shared_ptr<tcp::socket>& sock) {
    beast::flat_buffer buffer;
    boost::system::error_code ec;
    for (;;) {
      http::request<http::string_body> req;
      http::read(*sock, buffer, req, ec);
      if (ec) break;
      if (websocket::is_upgrade(req)) {
        if (req.target() == "/api/v1/live") {
          serve_live(sock, req);
          return;
        }
        auto res = respond(req, http::status::not_found, error_body("no such websocket"));
        http::write(*sock, res, ec);
        break;
      }
      auto res = route(req);
      http::write(*sock, res, ec);
      if (ec || !req.keep_alive()) break;
    }
    hard_shutdown(*sock);
  }

  void serve_live(const std::shared_ptr<tcp::socket>& sock, http::request<http::string_body>& req) {
    websocket::stream<tcp::socket&> ws(*sock);
    boost::system::error_code ec;
    ws.accept(req, ec);
    if (ec) return;
    ws.text(true);
    std::uint64_t seen = 0;
    {
      std::lock_guard lock(live_mu);
      seen = live_seq;
    }
    while (running) {
      std::string frame;
      {
        std::unique_lock lock(live_mu);
        live_cv.wait(lock, [&] { return !running || live_seq != seen; });
        if (!running) break;
        seen = live_seq;
        frame = latest;
      }
      // Client messages are ignored; reading them lets a close handshake finish.
      if (sock->available(ec) > 0) {
        beast::flat_buffer in;
        ws.read(in, ec);
        if (ec) return;
      }
      ws.write(asio::buffer(frame), ec);
      if (ec) break;
    }
    ws.close(websocket::close_code::going_away, ec);
  }

  static std::string error_body(const std::string& msg) { return Json{{"error", msg}}.dump(); }

  http::response<http::string_body> respond(const http::request<http::string_body>& req,
                                            http::status status, std::string body,
                                            const char* type = "application/json") {
    http::response<http::string_body> res{status, req.version()};
    res.set(http::field::server, "vibedaq");
    res.set(http::field::content_type, type);
    res.set(http::field::access_control_allow_origin, "*");
    res.keep_alive(req.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  }

  http::response<http::string_body> route(const http::request<http::string_body>& req) {
    static const std::regex run_re(R"(^/api/v1/runs/(\d+)(/stop|/data\.csv)?$)");
    const std::string target(req.target());
    const std::string path = target.substr(0, target.find('?'));
    const auto method = req.method();

    if (method == http::verb::options) {
      auto res = respond(req, http::status::no_content, "");
      res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
      res.set(http::field::access_control_allow_headers, "Content-Type");
      return res;
    }

    const auto now = master.clock_.now_us();
    if (path == "/api/v1/status" && method == http::verb::get) {
      std::lock_guard lock(master.mu_);
      return respond(req, http::status::ok, status_json(*master.coord_, now).dump());
    }
    if (path == "/api/v1/slaves" && method == http::verb::get) {
      std::lock_guard lock(master.mu_);
      return respond(req, http::status::ok, slaves_json(*master.coord_, now).dump());
    }
    if (path == "/api/v1/runs" && method == http::verb::get) {
      std::lock_guard lock(master.mu_);
      Json arr = Json::array();
      for (auto id : master.coord_->run_ids()) arr.push_back(session_json(*master.coord_->session(id)));
      return respond(req, http::status::ok, arr.dump());
    }
    if (path == "/api/v1/runs" && method == http::verb::post) {
      AcquisitionConfig cfg;
      try {
        cfg = config_from_json(req.body().empty() ? Json::object() : Json::parse(req.body()));
      } catch (const std::exception& e) {
        return respond(req, http::status::bad_request, error_body(e.what()));
      }
      if (auto errs = validate_config(cfg); !errs.empty()) {
        return respond(req, http::status::bad_request, Json{{"error", "invalid config"}, {"violations", errs}}.dump());
      }
      try {
        const auto id = master.start_run(cfg);
        return respond(req, http::status::created, Json{{"run_id", id}}.dump());
      } catch (const master::RunError& e) {
        return respond(req, http::status::conflict, error_body(e.what()));
      }
    }

    std::smatch m;
    if (std::regex_match(path, m, run_re)) {
      const auto id = static_cast<std::uint32_t>(std::stoul(m[1].str()));
      const std::string sub = m[2].str();
      if (sub == "/stop" && method == http::verb::post) {
        try {
          master.stop_run(id);
        } catch (const master::RunError& e) {
          std::lock_guard lock(master.mu_);
          const bool known = master.coord_->session(id) != nullptr;
          return respond(req, known ? http::status::conflict : http::status::not_found, error_body(e.what()));
        }
        std::lock_guard lock(master.mu_);
        return respond(req, http::status::ok, session_json(*master.coord_->session(id)).dump());
      }
      if (sub.empty() && method == http::verb::get) {
        std::lock_guard lock(master.mu_);
        const auto* s = master.coord_->session(id);
        if (!s) return respond(req, http::status::not_found, error_body("unknown run"));
        auto j = session_json(*s);
        j["integrity"] = to_json(*master.coord_->integrity(id));
        if (auto it = master.finished_.find(id); it != master.finished_.end() && !it->second.csv.empty()) {
          j["csv"] = it->second.csv.filename().string();
        }
        return respond(req, http::status::ok, j.dump());
      }
      if (sub == "/data.csv" && method == http::verb::get) {
        std::filesystem::path file;
        {
          std::lock_guard lock(master.mu_);
          if (!master.coord_->session(id)) return respond(req, http::status::not_found, error_body("unknown run"));
          auto it = master.finished_.find(id);
          if (it == master.finished_.end()) {
            return respond(req, http::status::conflict, error_body("run not finished"));
          }
          if (it->second.csv.empty()) return respond(req, http::status::internal_server_error, error_body(it->second.csv_error));
          file = it->second.csv;
        }
        std::ifstream in(file, std::ios::binary);
        if (!in) return respond(req, http::status::internal_server_error, error_body("cannot read run file"));
        std::ostringstream ss;
        ss << in.rdbuf();
        return respond(req, http::status::ok, ss.str(), "text/csv");
      }
      return respond(req, http::status::method_not_allowed, error_body("method not allowed"));
    }
    return respond(req, http::status::not_found, error_body("not found"));
  }

  MasterServer& master;
  asio::io_context ctx;
  tcp::acceptor acceptor;
  std::uint16_t port = 0;
  std::atomic<bool> running{false};
  std::thread accept_thread;
  std::thread live_thread;

  std::mutex sessions_mu;
  std::vector<std::thread> session_threads;
  std::vector<std::weak_ptr<tcp::socket>> sockets;

  std::mutex live_mu;
  std::condition_variable live_cv;
  std::string latest;
  std::uint64_t live_seq = 0;
};

// ---------------------------------------------------------------------------

MasterServer::MasterServer(MasterServerOptions options, Clock& clock)
    : opts_(std::move(options)), clock_(clock), io_(std::make_unique<Io>()) {
  master::CoordinatorOptions copts;
  copts.on_run_finished = [this](const master::RunSession& s, const master::RunDataset& ds) {
    on_run_finished(s, ds);
  };
  copts.warn = [](std::string_view msg) { spdlog::warn("{}", msg); };
  coord_ = std::make_unique<master::Coordinator>(std::move(copts));
}

MasterServer::~MasterServer() { stop(); }

void MasterServer::start() {
  const auto ep = endpoint_of(opts_.listen);
  auto& acc = io_->data_acceptor;
  acc.open(ep.protocol());
  acc.set_option(asio::socket_base::reuse_address(true));
  acc.bind(ep);
  acc.listen();
  data_port_ = acc.local_endpoint().port();
  if (opts_.api) {
    api_ = std::make_unique<ApiServer>(*this);
    try {
      api_->start(*opts_.api);
    } catch (...) {
      boost::system::error_code ec;
      acc.close(ec);
      throw;
    }
    api_port_ = api_->port;
  }
  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
  timer_thread_ = std::thread([this] { timer_loop(); });
  spdlog::info("master listening on {}:{}", opts_.listen.host, data_port_);
  if (api_) spdlog::info("api on http://{}:{}/api/v1/status", opts_.api->host, api_port_);
}

void MasterServer::stop() {
  if (!running_.exchange(false)) return;
  if (api_) api_->stop();
  boost::system::error_code ec;
  ::shutdown(io_->data_acceptor.native_handle(), SHUT_RDWR);
  io_->data_acceptor.close(ec);
  {
    std::lock_guard lock(conn_mu_);
    for (auto& w : conns_) {
      if (auto c = w.lock()) hard_shutdown(c->sock);
    }
  }
  finished_cv_.notify_all();
  if (accept_thread_.joinable()) accept_thread_.join();
  if (timer_thread_.joinable()) timer_thread_.join();
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(conn_mu_);
    threads.swap(conn_threads_);
  }
  for (auto& t : threads) t.join();
}

void MasterServer::accept_loop() {
  while (running_) {
    tcp::socket sock(io_->ctx);
    boost::system::error_code ec;
    io_->data_acceptor.accept(sock, ec);
    if (ec) {
      if (!running_) return;
      continue;
    }
    sock.set_option(tcp::no_delay(true), ec);
    auto conn = std::make_shared<Connection>(std::move(sock));
    std::lock_guard lock(conn_mu_);
    conns_.push_back(conn);
    conn_threads_.emplace_back([this, conn] { serve_connection(conn); });
  }
}

void MasterServer::serve_connection(std::shared_ptr<Connection> conn) {
  proto::FrameDecoder decoder;
  std::array<std::uint8_t, 64 * 1024> buf{};
  for (;;) {
    boost::system::error_code ec;
    const auto n = conn->sock.read_some(asio::buffer(buf), ec);
    if (ec) break;
    decoder.feed(std::span<const std::uint8_t>(buf.data(), n));
    while (auto msg = decoder.next()) {
      std::vector<master::Outbound> out;
      {
        std::lock_guard lock(mu_);
        const auto now = clock_.now_us();
        if (!conn->slave_id) {
          const auto* hello = std::get_if<proto::Hello>(&*msg);
          if (!hello) {
            spdlog::warn("dropping {} before HELLO", proto::to_string(proto::type_of(*msg)));
            continue;
          }
          conn->slave_id = hello->slave_id;
          if (auto it = by_slave_.find(hello->slave_id); it != by_slave_.end() && it->second != conn) {
            spdlog::warn("slave {} reconnected; closing the previous connection", hello->slave_id);
            hard_shutdown(it->second->sock);
          }
          by_slave_[hello->slave_id] = conn;
          spdlog::info("slave {} connected with {} sensors", hello->slave_id, hello->mux_channels.size());
        }
        out = coord_->on_message(*conn->slave_id, *msg, now);
      }
      dispatch(out);
    }
  }
  hard_shutdown(conn->sock);
  std::lock_guard lock(mu_);
  if (conn->slave_id) {
    auto it = by_slave_.find(*conn->slave_id);
    if (it != by_slave_.end() && it->second == conn) {
      by_slave_.erase(it);
      coord_->on_disconnect(*conn->slave_id, clock_.now_us());
      spdlog::info("slave {} disconnected", *conn->slave_id);
    }
  }
}

void MasterServer::timer_loop() {
  while (running_) {
    std::vector<master::Outbound> out;
    {
      std::lock_guard lock(mu_);
      out = coord_->on_timer(clock_.now_us());
    }
    dispatch(out);
    std::unique_lock lock(mu_);
    finished_cv_.wait_for(lock, std::chrono::milliseconds(50), [this] { return !running_; });
  }
}

void MasterServer::dispatch(const std::vector<master::Outbound>& out) {
  for (const auto& o : out) {
    std::shared_ptr<Connection> conn;
    {
      std::lock_guard lock(mu_);
      auto it = by_slave_.find(o.slave_id);
      if (it != by_slave_.end()) conn = it->second;
    }
    if (!conn || !conn->send(o.message)) {
      spdlog::warn("could not deliver {} to slave {}", proto::to_string(proto::type_of(o.message)), o.slave_id);
    }
  }
}

void MasterServer::on_run_finished(const master::RunSession& s, const master::RunDataset& ds) {
  FinishedRun fr;
  fr.session = s;
  const auto path = opts_.out_dir / ("run_" + std::to_string(s.run_id) + ".csv");
  try {
    std::filesystem::create_directories(opts_.out_dir);
    master::write_csv({s.config, s.start_us, opts_.seed}, ds, path);
    fr.csv = path;
    spdlog::info("run {} {}: wrote {}", s.run_id, master::to_string(s.status), path.string());
  } catch (const std::exception& e) {
    fr.csv_error = e.what();
    spdlog::error("run {}: {}", s.run_id, e.what());
  }
  finished_[s.run_id] = std::move(fr);
  finished_cv_.notify_all();
}

std::uint32_t MasterServer::start_run(const AcquisitionConfig& cfg) {
  std::vector<master::Outbound> out;
  std::uint32_t id = 0;
  {
    std::lock_guard lock(mu_);
    id = coord_->start_run(cfg, clock_.now_us(), out);
  }
  spdlog::info("run {} starting ({} {} Hz, {} s)", id, to_string(cfg.test_type), cfg.odr_hz, cfg.duration_s);
  dispatch(out);
  return id;
}

void MasterServer::stop_run(std::uint32_t run_id) {
  std::vector<master::Outbound> out;
  {
    std::lock_guard lock(mu_);
    out = coord_->stop_run(run_id, clock_.now_us());
  }
  dispatch(out);
}

std::size_t MasterServer::connected_slaves() const {
  std::lock_guard lock(mu_);
  return by_slave_.size();
}

std::optional<FinishedRun> MasterServer::wait_finished(std::uint32_t run_id,
                                                       std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  finished_cv_.wait_for(lock, timeout, [&] { return finished_.count(run_id) > 0 || !running_; });
  auto it = finished_.find(run_id);
  if (it == finished_.end()) return std::nullopt;
  return it->second;
}

void MasterServer::with_coordinator(const std::function<void(master::Coordinator&)>& fn) {
  std::lock_guard lock(mu_);
  fn(*coord_);
}

std::optional<FinishedRun> MasterServer::finished(std::uint32_t run_id) const {
  std::lock_guard lock(mu_);
  auto it = finished_.find(run_id);
  if (it == finished_.end()) return std::nullopt;
  return it->second;
}

}  // namespace vibedaq::net
