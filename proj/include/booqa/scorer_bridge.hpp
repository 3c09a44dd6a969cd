#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "booqa/entity_typing.hpp"
#include "booqa/lexicon.hpp"
#include "booqa/scorer.hpp"

namespace booqa {

// Newline-delimited JSON transport to an external scorer.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  // Throws ScorerError when the peer is gone.
  virtual void send_line(std::string_view line) = 0;
  // nullopt on timeout; throws ScorerError on end of stream.
  virtual std::optional<std::string> receive_line(std::chrono::milliseconds timeout) = 0;
  // Re-establish the connection after a failure (respawn, reconnect).
  virtual void reset() = 0;
  virtual std::string describe() const = 0;
};

// Talks to a child process (`/bin/sh -c command`) over its stdin/stdout.
class ProcessChannel : public LineChannel {
 public:
  explicit ProcessChannel(std::string command);
  ~ProcessChannel() override;
  ProcessChannel(const ProcessChannel&) = delete;
  ProcessChannel& operator=(const ProcessChannel&) = delete;

  void send_line(std::string_view line) override;
  std::optional<std::string> receive_line(std::chrono::milliseconds timeout) override;
  void reset() override;
  std::string describe() const override { return "process:" + command_; }

 private:
  void spawn();
  void stop();

  std::string command_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

class TcpChannel : public LineChannel {
 public:
  TcpChannel(std::string host, std::uint16_t port);
  // "host:port"
  static std::unique_ptr<TcpChannel> from_endpoint(std::string_view endpoint);
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  void send_line(std::string_view line) override;
  std::optional<std::string> receive_line(std::chrono::milliseconds timeout) override;
  void reset() override;
  std::string describe() const override { return "tcp:" + host_ + ":" + std::to_string(port_); }

 private:
  void connect_socket();

  std::string host_;
  std::uint16_t port_;
  int fd_ = -1;
  std::string buffer_;
};

struct BridgeOptions {
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;
  std::size_t batch_size = 64;
};

// Request/response client: {"id","kind","items"} out, {"id","scores"} back.
// Responses with a stale id are discarded; timeouts, malformed lines and
// "error" responses are retried, resetting the channel in between.
class BridgeClient {
 public:
  BridgeClient(std::unique_ptr<LineChannel> channel, BridgeOptions options = {});

  // Returns the validated response. "scores" (or "labels" for kind "type")
  // has exactly one entry per item. Batches larger than the negotiated size
  // are split transparently and the responses concatenated.
  nlohmann::json call(std::string_view kind, const nlohmann::json& items);

  std::size_t batch_size() const;
  std::string describe() const { return channel_->describe(); }

 private:
  nlohmann::json call_once(std::string_view kind, const nlohmann::json& items);

  std::unique_ptr<LineChannel> channel_;
  BridgeOptions options_;
  std::uint64_t next_id_ = 1;
  std::size_t batch_size_;
  mutable std::mutex mutex_;
};

nlohmann::json relation_json(const Relation& r);

class BridgeScorer : public Scorer {
 public:
  BridgeScorer(std::shared_ptr<BridgeClient> client, std::string name = "bridge");
  std::string identity() const override { return name_; }
  ScorerCapabilities capabilities() const override;
  std::vector<std::optional<double>> score_batch(std::span<const ScoringItem> items) override;

 private:
  std::shared_ptr<BridgeClient> client_;
  std::string name_;
};

// Sends one "wsd" item per candidate synset and picks the highest score;
// ties go to the earlier sense.
class BridgeDisambiguator : public Disambiguator {
 public:
  explicit BridgeDisambiguator(std::shared_ptr<BridgeClient> client) : client_(std::move(client)) {}
  std::string choose(const SpanMatch& match, std::span<const std::string> predicate_tokens,
                     std::string_view context_sentence) override;
  bool concurrency_safe() const override { return true; }

 private:
  std::shared_ptr<BridgeClient> client_;
};

class BridgeTypeAssigner : public TypeAssigner {
 public:
  explicit BridgeTypeAssigner(std::shared_ptr<BridgeClient> client) : client_(std::move(client)) {}
  std::optional<std::string> assign(std::string_view argument) override;
  std::vector<std::optional<std::string>> assign_many(std::span<const std::string> arguments);
  bool concurrency_safe() const override { return true; }

 private:
  std::shared_ptr<BridgeClient> client_;
};

}  // namespace booqa
