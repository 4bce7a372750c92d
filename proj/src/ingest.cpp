#include "vitalfuse/ingest.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace vf::ingest {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ParseResult fail(std::string msg, std::string_view line, std::string_view near) {
  ParseResult r;
  r.error = std::move(msg);
  if (!near.empty()) {
    auto pos = line.find(near);
    if (pos != std::string_view::npos) r.error_offset = pos;
  }
  return r;
}

}  // namespace

ParseResult parse_line(std::string_view line) {
  if (line.size() > kMaxLineBytes)
    return fail("line exceeds " + std::to_string(kMaxLineBytes) + " bytes",
                line, {});
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    ParseResult r;
    r.error = e.what();
    r.error_offset = e.byte > 0 ? e.byte - 1 : 0;
    return r;
  }
  if (!j.is_object()) return fail("record is not an object", line, {});
  for (const char* field : {"patient", "kind", "ts_ms", "value", "seq"})
    if (!j.contains(field))
      return fail(std::string("missing field '") + field + "'", line, {});

  if (!j["patient"].is_string())
    return fail("'patient' must be a string", line, "\"patient\"");
  if (!j["kind"].is_string())
    return fail("'kind' must be a string", line, "\"kind\"");
  const std::string kind_tok = j["kind"].get<std::string>();
  auto kind = model::kind_from_token(kind_tok);
  if (!kind) return fail("unknown kind '" + kind_tok + "'", line, kind_tok);

  if (!j["ts_ms"].is_number_integer())
    return fail("'ts_ms' must be an integer", line, "\"ts_ms\"");
  if (!j["seq"].is_number_integer() ||
      (!j["seq"].is_number_unsigned() && j["seq"].get<std::int64_t>() < 0))
    return fail("'seq' must be a non-negative integer", line, "\"seq\"");

  double value;
  if (j["value"].is_number()) {
    value = j["value"].get<double>();
  } else if (j["value"].is_string()) {
    // tolerated for sloppy senders; still must be a finite number
    try {
      value = std::stod(j["value"].get<std::string>());
    } catch (const std::exception&) {
      return fail("'value' does not parse as a number", line, "\"value\"");
    }
  } else {
    return fail("'value' must be a number", line, "\"value\"");
  }
  if (!std::isfinite(value))
    return fail("non-finite value", line, "\"value\"");

  ParseResult r;
  r.sample = model::VitalSample{
      j["patient"].get<std::string>(), *kind, j["ts_ms"].get<std::int64_t>(),
      value, j["seq"].get<std::uint64_t>()};
  return r;
}

std::string serialize(const model::VitalSample& s) {
  ordered_json j;
  j["patient"] = s.patient_id;
  j["kind"] = model::kind_token(s.kind);
  j["ts_ms"] = s.ts_ms;
  j["value"] = s.value;
  j["seq"] = s.seq;
  return j.dump();
}

void write_wire(std::span<const model::VitalSample> samples,
                std::ostream& out) {
  for (const auto& s : samples) out << serialize(s) << '\n';
}

namespace {

// Shared by server and replay: counts a line, validates seq order.
class StatsTracker {
 public:
  void on_line() { ++stats_.lines_read; }
  void on_failure() { ++stats_.parse_failures; }
  void on_sample(const model::VitalSample& s) {
    ++stats_.samples_accepted;
    ++stats_.per_patient[s.patient_id];
    auto key = s.patient_id + '\0' + std::string(model::kind_token(s.kind));
    auto [it, fresh] = last_seq_.try_emplace(key, s.seq);
    if (!fresh) {
      if (s.seq <= it->second) ++stats_.seq_violations;
      it->second = std::max(it->second, s.seq);
    }
  }
  const IngestStats& stats() const { return stats_; }

 private:
  IngestStats stats_;
  std::map<std::string, std::uint64_t> last_seq_;
};

}  // namespace

struct Server::Impl {
  std::string host;
  std::uint16_t requested_port = 0;
  SampleSink sink;

  int listen_fd = -1;
  std::uint16_t bound_port = 0;
  std::thread accept_thread;
  std::vector<std::thread> workers;
  std::vector<int> client_fds;
  std::atomic<bool> stopping{false};
  bool started = false;

  mutable std::mutex mu;  // guards sink hand-off, stats, fd bookkeeping
  StatsTracker tracker;

  void handle_client(int fd) {
    std::string buf;
    char chunk[4096];
    for (;;) {
      ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
      if (n <= 0) break;
      buf.append(chunk, static_cast<std::size_t>(n));
      std::size_t start = 0;
      for (;;) {
        auto nl = buf.find('\n', start);
        if (nl == std::string::npos) break;
        process_line(std::string_view(buf).substr(start, nl - start));
        start = nl + 1;
      }
      buf.erase(0, start);
      if (buf.size() > 1 << 20) break;  // runaway unterminated line
    }
    if (!buf.empty()) process_line(buf);  // connection closed mid-record
    ::close(fd);
  }

  void process_line(std::string_view line) {
    if (line.empty()) return;
    auto res = parse_line(line);
    std::lock_guard lock(mu);
    tracker.on_line();
    if (res) {
      tracker.on_sample(*res.sample);
      if (sink) sink(*res.sample);
    } else {
      tracker.on_failure();
    }
  }

  void accept_loop() {
    for (;;) {
      int fd = ::accept(listen_fd, nullptr, nullptr);
      if (fd < 0) {
        if (stopping || errno != EINTR) break;
        continue;
      }
      std::lock_guard lock(mu);
      client_fds.push_back(fd);
      workers.emplace_back([this, fd] { handle_client(fd); });
    }
  }
};

Server::Server(std::string host, std::uint16_t port, SampleSink sink)
    : impl_(new Impl) {
  impl_->host = std::move(host);
  impl_->requested_port = port;
  impl_->sink = std::move(sink);
}

Server::~Server() { stop(); }

void Server::start() {
  Impl& s = *impl_;
  if (s.started) throw std::runtime_error("server already started");

  s.listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (s.listen_fd < 0) throw std::runtime_error("socket() failed");
  int one = 1;
  ::setsockopt(s.listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(s.requested_port);
  if (s.host.empty() || s.host == "0.0.0.0") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
  } else if (::inet_pton(AF_INET, s.host.c_str(), &addr.sin_addr) != 1) {
    ::close(s.listen_fd);
    throw std::runtime_error("bad listen address: " + s.host);
  }
  if (::bind(s.listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 ||
      ::listen(s.listen_fd, 64) < 0) {
    int err = errno;
    ::close(s.listen_fd);
    throw std::runtime_error(std::string("cannot listen: ") +
                             std::strerror(err));
  }
  socklen_t len = sizeof addr;
  ::getsockname(s.listen_fd, reinterpret_cast<sockaddr*>(&addr), &len);
  s.bound_port = ntohs(addr.sin_port);
  s.started = true;
  s.accept_thread = std::thread([&s] { s.accept_loop(); });
}

std::uint16_t Server::port() const { return impl_->bound_port; }

void Server::stop() {
  Impl& s = *impl_;
  if (!s.started || s.stopping.exchange(true)) {
    if (s.accept_thread.joinable()) s.accept_thread.join();
    return;
  }
  ::shutdown(s.listen_fd, SHUT_RDWR);
  ::close(s.listen_fd);
  if (s.accept_thread.joinable()) s.accept_thread.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(s.mu);
    for (int fd : s.client_fds) ::shutdown(fd, SHUT_RDWR);
    workers.swap(s.workers);
  }
  for (auto& t : workers) t.join();
}

IngestStats Server::stats() const {
  std::lock_guard lock(impl_->mu);
  return impl_->tracker.stats();
}

IngestStats replay(const std::filesystem::path& file, double speed_factor,
                   const SampleSink& sink) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open replay file: " + file.string());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  StatsTracker tracker;
  std::optional<std::int64_t> prev_ts;
  std::size_t start = 0;
  while (start < content.size()) {
    auto nl = content.find('\n', start);
    const bool terminated = nl != std::string::npos;
    std::string_view line = std::string_view(content).substr(
        start, (terminated ? nl : content.size()) - start);
    start = terminated ? nl + 1 : content.size();
    if (line.empty()) continue;
    tracker.on_line();
    if (!terminated) {  // truncated tail, do not trust it
      tracker.on_failure();
      break;
    }
    auto res = parse_line(line);
    if (!res) {
      tracker.on_failure();
      continue;
    }
    if (speed_factor > 0 && prev_ts) {
      double gap_s = double(res.sample->ts_ms - *prev_ts) / 1000.0 / speed_factor;
      if (gap_s > 0)
        std::this_thread::sleep_for(std::chrono::duration<double>(gap_s));
    }
    prev_ts = res.sample->ts_ms;
    tracker.on_sample(*res.sample);
    if (sink) sink(*res.sample);
  }
  return tracker.stats();
}

}  // namespace vf::ingest
