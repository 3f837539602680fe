#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agreebench/scoring.hpp"

namespace agreebench {

// A bidirectional line channel to an external scorer.
class Transport {
 public:
  virtual ~Transport() = default;
  // Throws TransportError when the peer is gone.
  virtual void write_line(const std::string& line) = 0;
  // nullopt on end of stream.
  virtual std::optional<std::string> read_line() = 0;
  // Ends the outgoing direction; idempotent.
  virtual void close() = 0;
  // Forces end of stream on the reading side (kills a child, resets a
  // socket).
  virtual void abort() = 0;
};

// Runs `command` through /bin/sh with its standard streams as the channel.
std::unique_ptr<Transport> spawn_transport(const std::string& command);

// `host:port` for TCP or `unix:/path` for a local socket.
std::unique_ptr<Transport> connect_transport(const std::string& address);

// Owns both descriptors.
std::unique_ptr<Transport> fd_transport(int read_fd, int write_fd);

struct Hello {
  std::string name;
  std::size_t vocab_size = 0;
  std::size_t max_len = 0;
  std::size_t concurrency_limit = 1;
  std::vector<std::string> capabilities;
};

// Client side of the line-delimited JSON scorer protocol. Requests carry
// increasing ids and may be answered in any order.
class ExternBackend final : public ScorerBackend {
 public:
  // Performs the hello handshake. `max_in_flight` caps the advertised
  // concurrency limit.
  explicit ExternBackend(std::unique_ptr<Transport> transport,
                         std::optional<std::size_t> max_in_flight = {});
  ~ExternBackend() override;

  ExternBackend(const ExternBackend&) = delete;
  ExternBackend& operator=(const ExternBackend&) = delete;

  const Hello& hello() const;

  std::string name() const override;
  std::size_t vocab_size() const override;
  std::size_t concurrency_limit() const override;
  Capabilities capabilities() const override;

  SentenceScore score(std::string_view text) const override;
  MaskedResult masked(std::string_view text, CharSpan span,
                      const std::vector<std::string>& candidates) const override;

  // Sends bye and waits for the peer; called by the destructor.
  void shutdown();

  // Largest number of requests that were outstanding at once.
  std::size_t peak_in_flight() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

// Server side: the reply line for one request line, or nullopt for bye.
// Never throws; failures become error replies carrying the request id when
// it can be recovered, else -1.
std::optional<std::string> respond(const ScorerBackend& backend,
                                   const std::string& request_line,
                                   std::size_t concurrency_limit = 1);

// Reads requests from `in_fd` and writes replies to `out_fd` until bye or end
// of input. Returns the number of requests answered.
std::size_t serve(const ScorerBackend& backend, int in_fd, int out_fd,
                  std::size_t concurrency_limit = 1);

}  // namespace agreebench
