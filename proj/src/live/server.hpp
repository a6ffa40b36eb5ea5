#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>

namespace predprey::live {

struct ServeOptions {
  std::string run_dir;
  int generation = 0;
  std::string bind_address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  // Wall-clock spacing of ticks; the simulation always advances dt per tick.
  std::chrono::milliseconds tick_interval{100};
  // Advance exactly one tick per received control message instead of on a
  // timer. Gives scripted clients tick-exact reproducibility.
  bool lockstep = false;
  std::string static_dir;   // optional browser client assets served over HTTP
  std::string session_log;  // defaults to <run_dir>/sessions.jsonl
  bool handle_signals = false;  // stop on SIGINT/SIGTERM
};

// HTTP + WebSocket front end for one Session. GET /api/runs lists the run
// directories next to the served one; any request carrying a WebSocket
// upgrade becomes the (single) session client.
class LiveServer {
 public:
  // Loads the generation's genomes (Error(kInventory)) before binding the
  // port (Error(kPortInUse)).
  explicit LiveServer(ServeOptions options);
  ~LiveServer();
  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  unsigned short port() const;
  // Serves until stop(); flushes the session log before returning.
  void run();
  // Thread-safe.
  void stop();

  class Impl;

 private:
  std::shared_ptr<Impl> impl_;
};

}  // namespace predprey::live
