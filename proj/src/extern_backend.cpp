#include "agreebench/extern_backend.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <future>
#include <map>
#include <mutex>
#include <json.hpp>
#include <semaphore>
#include <thread>

#include "agreebench/error.hpp"

namespace agreebench {

using json = nlohmann::json;

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::string errno_text() { return std::strerror(errno); }

class FdReader {
 public:
  explicit FdReader(int fd) : fd_(fd) {}

  std::optional<std::string> read_line() {
    for (;;) {
      auto nl = buffer_.find('\n', scanned_);
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        scanned_ = 0;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      scanned_ = buffer_.size();
      char chunk[4096];
      ssize_t n = ::read(fd_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        if (buffer_.empty()) return std::nullopt;
        std::string line = std::move(buffer_);
        buffer_.clear();
        scanned_ = 0;
        return line;
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_;
  std::string buffer_;
  std::size_t scanned_ = 0;
};

void write_all(int fd, const std::string& data) {
  std::size_t done = 0;
  while (done < data.size()) {
    ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw TransportError("write to scorer failed: " + errno_text());
    done += static_cast<std::size_t>(n);
  }
}

class FdTransport final : public Transport {
 public:
  FdTransport(int read_fd, int write_fd, pid_t child = -1, bool socket = false)
      : read_fd_(read_fd), write_fd_(write_fd), child_(child), socket_(socket),
        reader_(read_fd) {
    ignore_sigpipe();
  }

  ~FdTransport() override {
    close();
    if (child_ > 0) reap();
    if (read_fd_ >= 0) ::close(read_fd_);
  }

  void write_line(const std::string& line) override {
    std::lock_guard lock(write_mu_);
    if (write_fd_ < 0) throw TransportError("scorer channel is closed");
    write_all(write_fd_, line + "\n");
  }

  std::optional<std::string> read_line() override { return reader_.read_line(); }

  void close() override {
    std::lock_guard lock(write_mu_);
    if (write_fd_ < 0) return;
    if (socket_) ::shutdown(write_fd_, SHUT_WR);
    ::close(write_fd_);
    write_fd_ = -1;
  }

  void abort() override {
    if (child_ > 0) ::kill(child_, SIGKILL);
    if (socket_) ::shutdown(read_fd_, SHUT_RDWR);
  }

 private:
  void reap() {
    using namespace std::chrono;
    auto deadline = steady_clock::now() + seconds(5);
    int status = 0;
    while (::waitpid(child_, &status, WNOHANG) == 0) {
      if (steady_clock::now() > deadline) {
        ::kill(child_, SIGKILL);
        ::waitpid(child_, &status, 0);
        break;
      }
      std::this_thread::sleep_for(milliseconds(10));
    }
    child_ = -1;
  }

  int read_fd_;
  int write_fd_;
  pid_t child_;
  bool socket_;
  FdReader reader_;
  std::mutex write_mu_;
};

}  // namespace

std::unique_ptr<Transport> fd_transport(int read_fd, int write_fd) {
  return std::make_unique<FdTransport>(read_fd, write_fd);
}

std::unique_ptr<Transport> spawn_transport(const std::string& command) {
  int to_child[2], from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0)
    throw TransportError("pipe failed: " + errno_text());
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw TransportError("pipe failed: " + errno_text());
  }
  pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]})
      ::close(fd);
    throw TransportError("fork failed: " + errno_text());
  }
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<FdTransport>(from_child[0], to_child[1], pid);
}

std::unique_ptr<Transport> connect_transport(const std::string& address) {
  int fd = -1;
  if (address.rfind("unix:", 0) == 0) {
    std::string path = address.substr(5);
    sockaddr_un addr{};
    if (path.empty() || path.size() >= sizeof addr.sun_path)
      throw TransportError("bad socket path '" + path + "'");
    addr.sun_family = AF_UNIX;
    std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
    fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw TransportError("socket failed: " + errno_text());
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
      std::string why = errno_text();
      ::close(fd);
      throw TransportError("cannot connect to " + address + ": " + why);
    }
  } else {
    auto colon = address.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == address.size())
      throw TransportError("address must be host:port or unix:/path, got '" +
                           address + "'");
    std::string host = address.substr(0, colon);
    std::string port = address.substr(colon + 1);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &found); rc != 0)
      throw TransportError("cannot resolve " + address + ": " + gai_strerror(rc));
    std::string why = "no addresses";
    for (addrinfo* a = found; a; a = a->ai_next) {
      fd = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
      why = errno_text();
      ::close(fd);
      fd = -1;
    }
    ::freeaddrinfo(found);
    if (fd < 0) throw TransportError("cannot connect to " + address + ": " + why);
  }
  int write_fd = ::fcntl(fd, F_DUPFD_CLOEXEC, 0);
  if (write_fd < 0) {
    ::close(fd);
    throw TransportError("dup failed: " + errno_text());
  }
  return std::make_unique<FdTransport>(fd, write_fd, -1, true);
}

struct ExternBackend::State {
  std::unique_ptr<Transport> transport;
  Hello hello;
  std::size_t limit = 1;
  std::unique_ptr<std::counting_semaphore<>> slots;

  std::mutex mu;
  std::map<long long, std::promise<json>> pending;
  long long next_id = 1;
  bool dead = false;
  std::string death;
  std::size_t in_flight = 0;
  std::size_t peak = 0;

  std::thread reader;
  bool reader_done = false;
  std::condition_variable reader_cv;
  bool shut = false;

  void fail_all(const std::string& why) {
    std::lock_guard lock(mu);
    if (!dead) {
      dead = true;
      death = why;
    }
    for (auto& [id, p] : pending)
      p.set_exception(std::make_exception_ptr(TransportError(death)));
    pending.clear();
  }

  void read_loop() {
    std::string why = "scorer closed the connection";
    try {
      while (auto line = transport->read_line()) {
        if (line->empty()) continue;
        json reply = json::parse(*line, nullptr, false);
        if (reply.is_discarded() || !reply.is_object() || !reply.contains("id") ||
            !reply["id"].is_number_integer()) {
          why = "scorer sent a non-protocol line: " + line->substr(0, 200);
          break;
        }
        long long id = reply["id"].get<long long>();
        std::lock_guard lock(mu);
        auto it = pending.find(id);
        if (it == pending.end()) {
          if (id == -1 && reply.contains("error")) {
            why = "scorer rejected a request: " + reply["error"].dump();
            break;
          }
          continue;
        }
        it->second.set_value(std::move(reply));
        pending.erase(it);
      }
    } catch (const std::exception& e) {
      why = std::string("scorer read failed: ") + e.what();
    }
    fail_all(why);
    std::lock_guard lock(mu);
    reader_done = true;
    reader_cv.notify_all();
  }

  json request(json body) {
    slots->acquire();
    struct Release {
      State* s;
      ~Release() {
        {
          std::lock_guard lock(s->mu);
          --s->in_flight;
        }
        s->slots->release();
      }
    };
    std::future<json> reply;
    long long id;
    {
      std::lock_guard lock(mu);
      ++in_flight;
      peak = std::max(peak, in_flight);
    }
    Release release{this};
    {
      std::lock_guard lock(mu);
      if (dead) throw TransportError(death);
      id = next_id++;
      reply = pending[id].get_future();
    }
    body["id"] = id;
    try {
      transport->write_line(body.dump());
    } catch (const TransportError& e) {
      std::lock_guard lock(mu);
      pending.erase(id);
      throw;
    }
    json r = reply.get();
    if (r.contains("error"))
      throw ScoringError("scorer error: " +
                         (r["error"].is_string() ? r["error"].get<std::string>()
                                                 : r["error"].dump()));
    return r;
  }
};

namespace {

Hello parse_hello(const json& j) {
  if (!j.is_object()) throw TransportError("handshake reply is not an object");
  if (j.contains("error"))
    throw TransportError("scorer failed to start: " + j["error"].dump());
  if (j.value("op", "") != "hello")
    throw TransportError("handshake reply lacks op hello: " + j.dump());
  Hello h;
  try {
    h.name = j.at("name").get<std::string>();
    h.vocab_size = j.at("vocab_size").get<std::size_t>();
    h.max_len = j.value("max_len", std::size_t{0});
    h.concurrency_limit = j.value("concurrency_limit", std::size_t{1});
    if (j.contains("capabilities"))
      h.capabilities = j["capabilities"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed handshake: ") + e.what());
  }
  if (h.concurrency_limit == 0) h.concurrency_limit = 1;
  return h;
}

bool has(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

ExternBackend::ExternBackend(std::unique_ptr<Transport> transport,
                             std::optional<std::size_t> max_in_flight)
    : state_(std::make_unique<State>()) {
  auto& s = *state_;
  s.transport = std::move(transport);
  s.transport->write_line(R"({"op":"hello"})");
  std::optional<std::string> line;
  while ((line = s.transport->read_line()) && line->empty()) {
  }
  if (!line) throw TransportError("scorer closed the connection during handshake");
  json reply = json::parse(*line, nullptr, false);
  if (reply.is_discarded())
    throw TransportError("handshake reply is not JSON: " + line->substr(0, 200));
  s.hello = parse_hello(reply);
  s.limit = s.hello.concurrency_limit;
  if (max_in_flight) s.limit = std::max<std::size_t>(1, std::min(s.limit, *max_in_flight));
  s.slots = std::make_unique<std::counting_semaphore<>>(
      static_cast<std::ptrdiff_t>(s.limit));
  s.reader = std::thread([&s] { s.read_loop(); });
}

ExternBackend::~ExternBackend() {
  try {
    shutdown();
  } catch (...) {
  }
}

void ExternBackend::shutdown() {
  auto& s = *state_;
  if (s.shut) return;
  s.shut = true;
  try {
    bool alive;
    {
      std::lock_guard lock(s.mu);
      alive = !s.dead;
    }
    if (alive) s.transport->write_line(R"({"op":"bye"})");
  } catch (const TransportError&) {
  }
  s.transport->close();
  {
    std::unique_lock lock(s.mu);
    if (!s.reader_cv.wait_for(lock, std::chrono::seconds(5),
                              [&s] { return s.reader_done; })) {
      lock.unlock();
      s.transport->abort();
    }
  }
  if (s.reader.joinable()) s.reader.join();
}

const Hello& ExternBackend::hello() const { return state_->hello; }
std::string ExternBackend::name() const { return state_->hello.name; }
std::size_t ExternBackend::vocab_size() const { return state_->hello.vocab_size; }
std::size_t ExternBackend::concurrency_limit() const { return state_->limit; }

Capabilities ExternBackend::capabilities() const {
  const auto& caps = state_->hello.capabilities;
  return {has(caps, "score"), has(caps, "masked")};
}

std::size_t ExternBackend::peak_in_flight() const {
  std::lock_guard lock(state_->mu);
  return state_->peak;
}

SentenceScore ExternBackend::score(std::string_view text) const {
  json r = state_->request({{"op", "score"}, {"text", std::string(text)}});
  try {
    auto n = r.at("num_tokens").get<std::size_t>();
    if (n == 0) throw ScoringError("scorer reported zero tokens");
    if (r.contains("token_nll")) {
      auto nll = r["token_nll"].get<std::vector<double>>();
      if (nll.size() != n)
        throw ScoringError("scorer reported " + std::to_string(nll.size()) +
                           " token losses for " + std::to_string(n) + " tokens");
      double sum = 0.0;
      for (double x : nll) sum += x;
      return SentenceScore::from_sum(n, sum);
    }
    double sum = r.at("sum_nll").get<double>();
    double mean = r.at("mean_nll").get<double>();
    if (!std::isfinite(sum) || !std::isfinite(mean))
      throw ScoringError("scorer reported a non-finite score");
    double expect = mean * static_cast<double>(n);
    if (std::abs(sum - expect) > 1e-9 * std::max(1.0, std::abs(sum)))
      throw ScoringError("scorer sum_nll disagrees with mean_nll x num_tokens");
    return SentenceScore{n, mean, sum};
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed score reply: ") + e.what());
  }
}

MaskedResult ExternBackend::masked(std::string_view text, CharSpan span,
                                   const std::vector<std::string>& candidates) const {
  json r = state_->request({{"op", "masked"},
                            {"text", std::string(text)},
                            {"char_span", {span.first, span.second}},
                            {"candidates", candidates}});
  try {
    MaskedResult out;
    for (const auto& v : r.at("candidate_logprobs")) {
      if (v.is_null())
        out.logprobs.push_back(std::nullopt);
      else
        out.logprobs.push_back(v.get<double>());
    }
    if (r.contains("candidate_num_subwords"))
      out.num_subwords = r["candidate_num_subwords"].get<std::vector<std::size_t>>();
    return out;
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed masked reply: ") + e.what());
  }
}

namespace {

json error_reply(const json& id, const std::string& message) {
  return {{"id", id}, {"error", message}};
}

}  // namespace

std::optional<std::string> respond(const ScorerBackend& backend,
                                   const std::string& request_line,
                                   std::size_t concurrency_limit) {
  json req = json::parse(request_line, nullptr, false);
  if (req.is_discarded() || !req.is_object())
    return error_reply(-1, "malformed request").dump();
  json id = -1;
  if (req.contains("id") && req["id"].is_number_integer()) id = req["id"];
  std::string op = req.contains("op") && req["op"].is_string()
                       ? req["op"].get<std::string>()
                       : "";
  try {
    if (op == "bye") return std::nullopt;
    if (op == "hello") {
      json caps = json::array();
      auto c = backend.capabilities();
      if (c.unmasked_scoring) caps.push_back("score");
      if (c.masked_candidates) caps.push_back("masked");
      return json{{"op", "hello"},
                  {"name", backend.name()},
                  {"vocab_size", backend.vocab_size()},
                  {"max_len", 512},
                  {"concurrency_limit", concurrency_limit},
                  {"capabilities", caps}}
          .dump();
    }
    if (id == -1) return error_reply(-1, "request without an integer id").dump();
    if (op == "score") {
      auto s = score_sentence(backend, req.at("text").get<std::string>());
      return json{{"id", id},
                  {"num_tokens", s.num_tokens},
                  {"sum_nll", s.sum_nll},
                  {"mean_nll", s.mean_nll}}
          .dump();
    }
    if (op == "masked") {
      auto span = req.at("char_span").get<std::vector<std::size_t>>();
      if (span.size() != 2) return error_reply(id, "char_span needs two offsets").dump();
      auto r = masked_candidates(backend, req.at("text").get<std::string>(),
                                 {span[0], span[1]},
                                 req.at("candidates").get<std::vector<std::string>>());
      json lps = json::array();
      for (const auto& lp : r.logprobs) lps.push_back(lp ? json(*lp) : json(nullptr));
      return json{{"id", id},
                  {"candidate_logprobs", lps},
                  {"candidate_num_subwords", r.num_subwords}}
          .dump();
    }
    return error_reply(id, "unknown op '" + op + "'").dump();
  } catch (const std::exception& e) {
    return error_reply(id, e.what()).dump();
  }
}

std::size_t serve(const ScorerBackend& backend, int in_fd, int out_fd,
                  std::size_t concurrency_limit) {
  ignore_sigpipe();
  FdReader reader(in_fd);
  std::mutex out_mu;
  std::atomic<std::size_t> answered{0};
  auto answer = [&](const std::string& line) {
    auto reply = respond(backend, line, concurrency_limit);
    if (!reply) return;
    std::lock_guard lock(out_mu);
    write_all(out_fd, *reply + "\n");
    ++answered;
  };

  if (concurrency_limit <= 1) {
    while (auto line = reader.read_line()) {
      if (line->empty()) continue;
      auto reply = respond(backend, *line, 1);
      if (!reply) break;
      write_all(out_fd, *reply + "\n");
      ++answered;
    }
    return answered;
  }

  std::mutex q_mu;
  std::condition_variable q_cv;
  std::deque<std::string> queue;
  bool done = false;
  std::vector<std::thread> workers;
  for (std::size_t i = 0; i < concurrency_limit; ++i) {
    workers.emplace_back([&] {
      for (;;) {
        std::string line;
        {
          std::unique_lock lock(q_mu);
          q_cv.wait(lock, [&] { return done || !queue.empty(); });
          if (queue.empty()) return;
          line = std::move(queue.front());
          queue.pop_front();
        }
        try {
          answer(line);
        } catch (const TransportError&) {
        }
      }
    });
  }
  while (auto line = reader.read_line()) {
    if (line->empty()) continue;
    json req = json::parse(*line, nullptr, false);
    if (req.is_object() && req.value("op", "") == "bye") break;
    std::lock_guard lock(q_mu);
    queue.push_back(std::move(*line));
    q_cv.notify_one();
  }
  {
    std::lock_guard lock(q_mu);
    done = true;
  }
  q_cv.notify_all();
  for (auto& w : workers) w.join();
  return answered;
}

}  // namespace agreebench
