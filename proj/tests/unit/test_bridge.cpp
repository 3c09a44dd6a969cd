#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <sstream>
#include <thread>

#include "../support/fixtures.hpp"
#include "booqa/eval_harness.hpp"
#include "booqa/levyholt_mesh.hpp"
#include "booqa/scorer_bridge.hpp"

using namespace booqa;
using nlohmann::json;

namespace {

std::shared_ptr<BridgeClient> stub(const std::string& flags, BridgeOptions options = {}) {
  return std::make_shared<BridgeClient>(std::make_unique<ProcessChannel>(std::string(STUB_SCORER) + " " + flags),
                                        options);
}

json score_items(std::initializer_list<std::pair<const char*, const char*>> pairs) {
  json items = json::array();
  for (const auto& [p, h] : pairs) items.push_back({{"premise", p}, {"hypothesis", h}});
  return items;
}

std::vector<json> logged_requests(const std::filesystem::path& log) {
  std::vector<json> out;
  std::istringstream in(fixture::read_file(log));
  for (std::string line; std::getline(in, line);) out.push_back(json::parse(line));
  return out;
}

}  // namespace

TEST_SUITE("bridge") {
  TEST_CASE("constant stub gives constant confidences") {
    BridgeScorer scorer(stub("--mode constant --constant 0.5"));
    std::vector<ScoringItem> items(5);
    for (auto& it : items) it.premise_text = "a b";
    for (auto s : scorer.score_batch(items)) CHECK(s == 0.5);
  }

  TEST_CASE("responses come back in order with matching ids") {
    fixture::TempDir dir("bridge-order");
    auto client = stub("--log " + (dir / "log").string());
    const auto r = client->call("score", score_items({{"a b", "a b"}, {"a", "a b"}, {"x", "a b"}}));
    REQUIRE(r["scores"].size() == 3);
    CHECK(r["scores"][0] == 1.0);
    CHECK(r["scores"][1] == 0.5);
    CHECK(r["scores"][2] == 0.0);
    client->call("score", score_items({{"q", "q"}}));
    const auto log = logged_requests(dir / "log");
    REQUIRE(log.size() == 2);
    CHECK(log[0]["kind"] == "score");
    CHECK(log[0]["items"].size() == 3);
    CHECK(log[1]["id"].get<std::uint64_t>() > log[0]["id"].get<std::uint64_t>());
  }

  TEST_CASE("stale replies are ignored") {
    auto client = stub("--stale");
    const auto r = client->call("score", score_items({{"a", "a"}, {"b", "a"}}));
    CHECK(r["scores"] == json::array({1.0, 0.0}));
  }

  TEST_CASE("malformed replies are retried on a fresh process") {
    fixture::TempDir dir("bridge-retry");
    const auto state = (dir / "state").string();
    BridgeOptions opts;
    opts.max_retries = 2;
    auto client = stub("--fail-first 2 --state " + state, opts);
    CHECK(client->call("score", score_items({{"a", "a"}}))["scores"][0] == 1.0);

    auto doomed = stub("--fail-first 5 --state " + (dir / "state2").string(), opts);
    CHECK_THROWS_AS(doomed->call("score", score_items({{"a", "a"}})), ScorerError);
  }

  TEST_CASE("timeouts are retried and then fail") {
    BridgeOptions opts;
    opts.timeout = std::chrono::milliseconds(100);
    opts.max_retries = 1;
    auto client = stub("--sleep-ms 400", opts);
    CHECK_THROWS_AS(client->call("score", score_items({{"a", "a"}})), ScorerError);
  }

  TEST_CASE("a process that exits is restarted") {
    auto client = stub("--exit-after 1");
    CHECK(client->call("score", score_items({{"a", "a"}}))["scores"][0] == 1.0);
    CHECK(client->call("score", score_items({{"a", "b"}}))["scores"][0] == 0.0);
  }

  TEST_CASE("batch size is negotiated down") {
    fixture::TempDir dir("bridge-batch");
    BridgeOptions opts;
    opts.batch_size = 10;
    auto client = stub("--max-batch 3 --log " + (dir / "log").string(), opts);
    json items = json::array();
    for (int i = 0; i < 8; ++i) items.push_back({{"premise", "w" + std::to_string(i)}, {"hypothesis", "w3"}});
    const auto r = client->call("score", items);
    REQUIRE(r["scores"].size() == 8);
    for (int i = 0; i < 8; ++i) CHECK(r["scores"][i] == (i == 3 ? 1.0 : 0.0));
    CHECK(client->batch_size() == 3);
    for (const auto& req : logged_requests(dir / "log")) {
      if (req["id"] != 1) CHECK(req["items"].size() <= 3);
    }
  }

  TEST_CASE("abstentions stay missing and failures stay per item") {
    BridgeScorer scorer(stub("--abstain-on skip --fail-on boom"));
    std::vector<ScoringItem> items(3);
    items[0].premise_text = "skip me";
    items[1].premise_text = "a";
    items[1].hypothesis_text = "a";
    items[2].premise_text = "boom";
    CHECK_THROWS_AS(scorer.score_batch(items), ScorerError);
    items.pop_back();
    const auto s = scorer.score_batch(items);
    CHECK_FALSE(s[0]);
    CHECK(s[1] == 1.0);

    std::vector<Evidence> ev{{std::nullopt, "skip", "a", "1"}, {std::nullopt, "boom", "a", "2"},
                             {std::nullopt, "x y", "a", "3"}};
    Proposition hyp;
    hyp.subject = "x";
    hyp.predicate = {"y"};
    hyp.object = "z";
    Diagnostics diags;
    const auto r = score_hypothesis(hyp, ev, scorer, &diags);
    CHECK(r.score == doctest::Approx(2.0 / 3.0));
    CHECK(r.failed == 1);
    CHECK(r.abstained == 1);
    CHECK(diags.size() == 1);
  }

  TEST_CASE("word-sense and typing requests") {
    Synset first{"visit.v.01", {"visit"}, {}};
    Synset second{"visit.v.02", {"visit", "see"}, {}};
    SpanMatch match{{0, 1}, "visit", {&first, &second}};
    const std::vector<std::string> tokens{"visit"};
    BridgeDisambiguator prefer_second(stub("--prefer visit.v.02"));
    CHECK(prefer_second.choose(match, tokens, "Obama visited Berlin.") == "visit.v.02");
    BridgeDisambiguator no_preference(stub("--prefer none"));
    CHECK(no_preference.choose(match, tokens, "Obama visited Berlin.") == "visit.v.01");

    BridgeTypeAssigner types(stub(""));
    const std::vector<std::string> args{"NATO", "Obama", "berlin"};
    const auto labels = types.assign_many(args);
    CHECK(labels[0] == "organization");
    CHECK(labels[1] == "person");
    CHECK_FALSE(labels[2]);
    CHECK(types.assign("Merkel") == "person");
  }

  TEST_CASE("rendered prompt text scores within the unit interval") {
    const auto prompts = render_prompts({"obama", {"visit"}, "berlin"}, {"obama", {"go", "to"}, "berlin"},
                                        std::vector<PromptTemplate>{{"t1", "If {premise}, then {hypothesis}?"}}, true);
    REQUIRE(prompts.size() == 2);
    json items = json::array();
    for (const auto& p : prompts) items.push_back({{"premise", p.text}, {"hypothesis", "obama go to berlin"}});
    const auto r = stub("")->call("score", items);
    for (const auto& s : r["scores"]) {
      CHECK(s.get<double>() >= 0.0);
      CHECK(s.get<double>() <= 1.0);
    }
  }

  TEST_CASE("tcp channel") {
    const int server = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(server >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::bind(server, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(server, 1) != 0) {
      ::close(server);
      MESSAGE("loopback sockets unavailable");
      return;
    }
    socklen_t len = sizeof addr;
    ::getsockname(server, reinterpret_cast<sockaddr*>(&addr), &len);
    const auto port = ntohs(addr.sin_port);
    std::thread peer([server] {
      const int fd = ::accept(server, nullptr, nullptr);
      std::string buffer;
      char chunk[512];
      for (;;) {
        const auto n = ::read(fd, chunk, sizeof chunk);
        if (n <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(n));
        const auto nl = buffer.find('\n');
        if (nl == std::string::npos) continue;
        const auto request = json::parse(buffer.substr(0, nl));
        json scores = json::array();
        for (std::size_t i = 0; i < request["items"].size(); ++i) scores.push_back(0.25 * static_cast<double>(i));
        const std::string reply = json{{"id", request["id"]}, {"scores", scores}}.dump() + "\n";
        (void)::write(fd, reply.data(), reply.size());
        break;
      }
      ::close(fd);
    });
    auto client = std::make_shared<BridgeClient>(TcpChannel::from_endpoint("127.0.0.1:" + std::to_string(port)));
    const auto r = client->call("score", score_items({{"a", "b"}, {"c", "d"}}));
    CHECK(r["scores"] == json::array({0.0, 0.25}));
    peer.join();
    ::close(server);
    CHECK_THROWS(TcpChannel::from_endpoint("nohost"));
    CHECK_THROWS(TcpChannel::from_endpoint("h:99999"));
  }
}
