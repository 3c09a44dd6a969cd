#include "booqa/scorer_bridge.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <thread>

#include "booqa/errors.hpp"
#include "booqa/log.hpp"

namespace booqa {

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void write_all(int fd, std::string_view data, const std::string& who) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ScorerError(who + ": write failed: " + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

// Reads from fd into buffer until a full line is available or the deadline
// passes.
std::optional<std::string> read_line(int fd, std::string& buffer, std::chrono::milliseconds timeout,
                                     const std::string& who) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (auto nl = buffer.find('\n'); nl != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd p{fd, POLLIN, 0};
    const int r = ::poll(&p, 1, static_cast<int>(left.count()));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ScorerError(who + ": poll failed: " + std::strerror(errno));
    }
    if (r == 0) return std::nullopt;
    char chunk[65536];
    const ssize_t n = ::read(fd, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw ScorerError(who + ": read failed: " + std::strerror(errno));
    }
    if (n == 0) throw ScorerError(who + ": peer closed the stream");
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

// The peer rejected a batch as too large and named the size it accepts.
struct BatchTooLarge {
  std::size_t accepted;
};

}  // namespace

ProcessChannel::ProcessChannel(std::string command) : command_(std::move(command)) {
  ignore_sigpipe();
  spawn();
}

ProcessChannel::~ProcessChannel() { stop(); }

void ProcessChannel::spawn() {
  int in_pipe[2], out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw ScorerError("pipe failed: " + std::string(std::strerror(errno)));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw ScorerError("pipe failed: " + std::string(std::strerror(errno)));
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw ScorerError("fork failed: " + std::string(std::strerror(errno)));
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  buffer_.clear();
}

void ProcessChannel::stop() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    // Closing stdin asks a well-behaved scorer to exit; give it a moment.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
}

void ProcessChannel::send_line(std::string_view line) {
  if (to_child_ < 0) throw ScorerError(describe() + ": not running");
  std::string data(line);
  data += '\n';
  write_all(to_child_, data, describe());
}

std::optional<std::string> ProcessChannel::receive_line(std::chrono::milliseconds timeout) {
  if (from_child_ < 0) throw ScorerError(describe() + ": not running");
  return read_line(from_child_, buffer_, timeout, describe());
}

void ProcessChannel::reset() {
  stop();
  spawn();
}

TcpChannel::TcpChannel(std::string host, std::uint16_t port) : host_(std::move(host)), port_(port) {
  ignore_sigpipe();
  connect_socket();
}

std::unique_ptr<TcpChannel> TcpChannel::from_endpoint(std::string_view endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == endpoint.size()) {
    throw std::invalid_argument("TCP endpoint must be host:port, got " + std::string(endpoint));
  }
  const std::string port_text(endpoint.substr(colon + 1));
  char* end = nullptr;
  const long port = std::strtol(port_text.c_str(), &end, 10);
  if (*end != '\0' || port <= 0 || port > 65535) throw std::invalid_argument("bad TCP port " + port_text);
  return std::make_unique<TcpChannel>(std::string(endpoint.substr(0, colon)), static_cast<std::uint16_t>(port));
}

TcpChannel::~TcpChannel() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpChannel::connect_socket() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  buffer_.clear();
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(port_);
  if (int rc = ::getaddrinfo(host_.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw ScorerError(describe() + ": " + ::gai_strerror(rc));
  }
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) throw ScorerError(describe() + ": connection refused");
}

void TcpChannel::send_line(std::string_view line) {
  if (fd_ < 0) throw ScorerError(describe() + ": not connected");
  std::string data(line);
  data += '\n';
  write_all(fd_, data, describe());
}

std::optional<std::string> TcpChannel::receive_line(std::chrono::milliseconds timeout) {
  if (fd_ < 0) throw ScorerError(describe() + ": not connected");
  return read_line(fd_, buffer_, timeout, describe());
}

void TcpChannel::reset() { connect_socket(); }

BridgeClient::BridgeClient(std::unique_ptr<LineChannel> channel, BridgeOptions options)
    : channel_(std::move(channel)), options_(options), batch_size_(std::max<std::size_t>(1, options.batch_size)) {}

std::size_t BridgeClient::batch_size() const {
  std::lock_guard lock(mutex_);
  return batch_size_;
}

nlohmann::json BridgeClient::call(std::string_view kind, const nlohmann::json& items) {
  if (!items.is_array()) throw std::invalid_argument("bridge items must be an array");
  std::lock_guard lock(mutex_);
  const std::string field = kind == "type" ? "labels" : "scores";
  nlohmann::json merged = {{field, nlohmann::json::array()}};
  std::size_t start = 0;
  while (start < items.size()) {
    const std::size_t end = std::min(items.size(), start + batch_size_);
    nlohmann::json chunk = nlohmann::json::array();
    for (std::size_t i = start; i < end; ++i) chunk.push_back(items[i]);
    nlohmann::json response;
    try {
      response = call_once(kind, chunk);
    } catch (const BatchTooLarge& e) {
      log::info("bridge_batch_negotiated", {{"channel", channel_->describe()}, {"max_batch", e.accepted}});
      batch_size_ = e.accepted;
      continue;
    }
    if (response.contains("max_batch") && response["max_batch"].is_number_unsigned()) {
      const auto negotiated = response["max_batch"].get<std::size_t>();
      if (negotiated > 0 && negotiated < batch_size_) batch_size_ = negotiated;
    }
    for (auto& v : response[field]) merged[field].push_back(std::move(v));
    start = end;
  }
  return merged;
}

nlohmann::json BridgeClient::call_once(std::string_view kind, const nlohmann::json& items) {
  const std::string field = kind == "type" ? "labels" : "scores";
  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      log::warn("bridge_retry", {{"channel", channel_->describe()}, {"attempt", attempt}, {"reason", last_error}});
      try {
        channel_->reset();
      } catch (const ScorerError& e) {
        last_error = e.what();
        continue;
      }
    }
    const std::uint64_t id = next_id_++;
    nlohmann::json request = {{"id", id}, {"kind", kind}, {"items", items}};
    try {
      channel_->send_line(request.dump());
      const auto deadline = std::chrono::steady_clock::now() + options_.timeout;
      for (;;) {
        const auto left =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        auto line = left.count() > 0 ? channel_->receive_line(left) : std::nullopt;
        if (!line) throw ScorerError("timed out after " + std::to_string(options_.timeout.count()) + " ms");
        auto response = nlohmann::json::parse(*line, nullptr, false);
        if (response.is_discarded() || !response.is_object() || !response.contains("id")) {
          throw ScorerError("malformed response line");
        }
        if (response["id"] != request["id"]) continue;  // stale reply to an abandoned request
        if (response.contains("error")) {
          if (response.contains("max_batch") && response["max_batch"].is_number_unsigned()) {
            const auto accepted = response["max_batch"].get<std::size_t>();
            if (accepted > 0 && accepted < items.size()) throw BatchTooLarge{accepted};
          }
          throw ScorerError("scorer reported: " + response["error"].dump());
        }
        if (!response.contains(field) || !response[field].is_array() || response[field].size() != items.size()) {
          throw ScorerError("response needs \"" + field + "\" with " + std::to_string(items.size()) + " entries");
        }
        for (const auto& v : response[field]) {
          const bool ok = v.is_null() || (field == "labels" ? v.is_string() : v.is_number());
          if (!ok) throw ScorerError("response entry of the wrong type: " + v.dump());
        }
        return response;
      }
    } catch (const ScorerError& e) {
      last_error = e.what();
    }
  }
  throw ScorerError(channel_->describe() + ": giving up after " + std::to_string(options_.max_retries + 1) +
                    " attempts: " + last_error);
}

nlohmann::json relation_json(const Relation& r) {
  return {{"subject", r.subject}, {"predicate", r.predicate}, {"object", r.object}};
}

BridgeScorer::BridgeScorer(std::shared_ptr<BridgeClient> client, std::string name)
    : client_(std::move(client)), name_(std::move(name)) {}

ScorerCapabilities BridgeScorer::capabilities() const { return {client_->batch_size(), false, true}; }

std::vector<std::optional<double>> BridgeScorer::score_batch(std::span<const ScoringItem> items) {
  nlohmann::json payload = nlohmann::json::array();
  for (const auto& item : items) {
    nlohmann::json j = {{"premise", item.premise_text}, {"hypothesis", item.hypothesis_text}};
    j["premise_relation"] = item.premise_relation ? relation_json(*item.premise_relation) : nlohmann::json(nullptr);
    j["hypothesis_relation"] = relation_json(item.hypothesis);
    payload.push_back(std::move(j));
  }
  const auto response = client_->call("score", payload);
  std::vector<std::optional<double>> out;
  out.reserve(items.size());
  for (const auto& v : response["scores"]) {
    if (v.is_null()) {
      out.emplace_back(std::nullopt);
    } else {
      const double s = v.get<double>();
      out.emplace_back(std::isfinite(s) ? std::optional<double>(s) : std::nullopt);
    }
  }
  return out;
}

std::string BridgeDisambiguator::choose(const SpanMatch& match, std::span<const std::string> predicate_tokens,
                                        std::string_view context_sentence) {
  nlohmann::json payload = nlohmann::json::array();
  for (const Synset* s : match.synsets) {
    payload.push_back({{"predicate", std::vector<std::string>(predicate_tokens.begin(), predicate_tokens.end())},
                       {"span", {match.span.start, match.span.end}},
                       {"lemma", match.lemma},
                       {"context", context_sentence},
                       {"synset", s->id},
                       {"lemmas", s->lemmas}});
  }
  const auto response = client_->call("wsd", payload);
  std::size_t best = 0;
  std::optional<double> best_score;
  for (std::size_t i = 0; i < match.synsets.size(); ++i) {
    const auto& v = response["scores"][i];
    if (v.is_null()) continue;
    const double s = v.get<double>();
    if (!best_score || s > *best_score) {
      best_score = s;
      best = i;
    }
  }
  return match.synsets[best]->id;
}

std::optional<std::string> BridgeTypeAssigner::assign(std::string_view argument) {
  std::string arg(argument);
  return assign_many(std::span(&arg, 1)).front();
}

std::vector<std::optional<std::string>> BridgeTypeAssigner::assign_many(std::span<const std::string> arguments) {
  nlohmann::json payload = nlohmann::json::array();
  for (const auto& a : arguments) payload.push_back({{"argument", a}});
  const auto response = client_->call("type", payload);
  std::vector<std::optional<std::string>> out;
  for (const auto& v : response["labels"]) {
    out.push_back(v.is_string() ? std::optional<std::string>(v.get<std::string>()) : std::nullopt);
  }
  return out;
}

}  // namespace booqa
