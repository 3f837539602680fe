// Native stand-in for an external scorer: serves a built-in backend over
// the line protocol on stdin/stdout or a socket.

#include <sys/socket.h>
#include <sys/un.h>
#include <netinet/in.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <cstring>
#include <iostream>
#include <random>
#include <thread>
#include <unordered_set>

#include "agreebench/error.hpp"
#include "agreebench/extern_backend.hpp"
#include "agreebench/pairfile.hpp"

using namespace agreebench;

namespace {

// Delays each request and can stop the process after a number of requests.
class Faulty final : public ScorerBackend {
 public:
  Faulty(std::unique_ptr<ScorerBackend> inner, int delay_ms, long die_after)
      : inner_(std::move(inner)), delay_ms_(delay_ms), die_after_(die_after) {}

  std::string name() const override { return inner_->name(); }
  std::size_t vocab_size() const override { return inner_->vocab_size(); }
  Capabilities capabilities() const override { return inner_->capabilities(); }

  SentenceScore score(std::string_view text) const override {
    before();
    return inner_->score(text);
  }
  MaskedResult masked(std::string_view text, CharSpan span,
                      const std::vector<std::string>& candidates) const override {
    before();
    return inner_->masked(text, span, candidates);
  }

 private:
  void before() const {
    long n = ++calls_;
    if (die_after_ >= 0 && n > die_after_) std::_Exit(4);
    if (delay_ms_ > 0) {
      thread_local std::mt19937 rng(std::hash<std::thread::id>{}(std::this_thread::get_id()));
      std::this_thread::sleep_for(
          std::chrono::milliseconds(std::uniform_int_distribution<int>(0, delay_ms_)(rng)));
    }
  }

  std::unique_ptr<ScorerBackend> inner_;
  int delay_ms_;
  long die_after_;
  mutable std::atomic<long> calls_{0};
};

int listen_once(const std::string& address) {
  int fd;
  if (address.rfind("unix:", 0) == 0) {
    std::string path = address.substr(5);
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (path.size() >= sizeof addr.sun_path) throw Error("socket path too long");
    std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
    ::unlink(path.c_str());
    fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (fd < 0 || ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
      throw Error("cannot bind " + address + ": " + std::strerror(errno));
  } else {
    auto colon = address.rfind(':');
    int port = std::stoi(address.substr(colon + 1));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<uint16_t>(port));
    fd = ::socket(AF_INET, SOCK_STREAM, 0);
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (fd < 0 || ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
      throw Error("cannot bind " + address + ": " + std::strerror(errno));
  }
  if (::listen(fd, 1) != 0) throw Error("listen failed");
  std::cerr << "listening on " << address << std::endl;
  int conn = ::accept(fd, nullptr, nullptr);
  ::close(fd);
  if (conn < 0) throw Error("accept failed");
  return conn;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stub scorer speaking the agreebench line protocol"};
  std::string backend = "uniform";
  std::string pairs;
  std::size_t vocab_size = 171;
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  int delay_ms = 0;
  long die_after = -1;
  bool fail_hello = false;
  std::string listen;
  app.add_option("--backend", backend, "uniform, oracle, bigram or random")
      ->check(CLI::IsMember({"uniform", "oracle", "bigram", "random"}));
  app.add_option("--pairs", pairs, "Pair file for oracle and bigram");
  app.add_option("--vocab-size", vocab_size);
  app.add_option("--seed", seed);
  app.add_option("--threads", threads, "Requests answered concurrently");
  app.add_option("--delay-ms", delay_ms, "Random delay of up to this many ms per request");
  app.add_option("--die-after", die_after, "Exit abruptly after this many requests");
  app.add_flag("--fail-hello", fail_hello, "Refuse the handshake");
  app.add_option("--listen", listen, "host:port or unix:/path instead of stdio");
  CLI11_PARSE(app, argc, argv);

  try {
    if (fail_hello) {
      std::cout << R"({"id":-1,"error":"model failed to load"})" << std::endl;
      return 1;
    }
    std::unique_ptr<ScorerBackend> inner;
    if (backend == "uniform") {
      inner = make_uniform_backend(vocab_size);
    } else if (backend == "random") {
      inner = make_random_backend(seed);
    } else {
      if (pairs.empty()) throw Error("--backend " + backend + " needs --pairs");
      auto file = read_pairs_file(pairs, false);
      if (backend == "oracle") {
        std::unordered_set<std::string> g;
        for (const auto& p : file.pairs) g.insert(join_tokens(p.grammatical));
        inner = make_oracle_backend(std::move(g));
      } else {
        std::vector<std::vector<std::string>> corpus;
        for (const auto& p : file.pairs) corpus.push_back(p.grammatical);
        inner = train_ngram(corpus, 2, 0.1);
      }
    }
    Faulty model(std::move(inner), delay_ms, die_after);
    int in_fd = STDIN_FILENO, out_fd = STDOUT_FILENO;
    if (!listen.empty()) in_fd = out_fd = listen_once(listen);
    serve(model, in_fd, out_fd, std::max<std::size_t>(1, threads));
    if (!listen.empty()) ::close(in_fd);
  } catch (const std::exception& e) {
    std::cerr << "stub-scorer: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
