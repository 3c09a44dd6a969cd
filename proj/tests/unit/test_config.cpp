#include <doctest.h>

#include <sstream>

#include "../support/fixtures.hpp"
#include "booqa/config.hpp"
#include "booqa/manifest.hpp"

using namespace booqa;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return RunConfig::from_toml(in);
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("the checked-in defaults equal the built-in ones") {
    const auto file = RunConfig::from_file(std::filesystem::path(SOURCE_DIR) / "configs" / "full-scale.toml");
    CHECK(file == RunConfig{});
    CHECK(file.window_span_days == 3);
    CHECK(file.synthesis.min_articles == 15);
    CHECK(file.synthesis.min_predicates == 15);
    CHECK(file.synthesis.min_argpairs == 30);
    CHECK(file.synthesis.max_negatives == 2);
    CHECK(file.eval.evidence_cap == 3200);
    CHECK(file.eval.tfidf_k == 5);
    CHECK(file.buckets.boundaries == std::vector<std::size_t>{60, 100, 300, 500, 700, 1000, 1500, 2000, 2500, 3000,
                                                              4000, 5000, 6000, 8000, 10000, 15000, 20000, 30000,
                                                              50000, 100000});
    CHECK(file.eval.boundary == LeftBoundary::inclusive);
    CHECK_FALSE(file.boundary_date);
  }

  TEST_CASE("round trip through the canonical form") {
    auto c = parse(
        "window_span_days = 5\nmin_articles = 2 # inline comment\nseed = 42\nbucket_boundaries = [10, 20]\n"
        "bucket_slack = 0.1\nboundary_date = \"2020-02-01\"\nretrieval = \"tfidf\"\nauc_boundary = \"first_threshold\"\n"
        "transitive_hyponyms = true\nhonly_token = \"正确\"\n");
    CHECK(c.window_span_days == 5);
    CHECK(c.synthesis.min_articles == 2);
    CHECK(c.synthesis.seed == 42);
    CHECK(c.synthesis.transitive_hyponyms);
    CHECK(c.buckets.boundaries == std::vector<std::size_t>{10, 20});
    CHECK(c.bucket_slack == 0.1);
    REQUIRE(c.boundary_date);
    CHECK(c.eval.retrieval == RetrievalMode::tfidf);
    CHECK(c.eval.boundary == LeftBoundary::first_threshold);
    CHECK(c.honly_token == "正确");
    const auto text = c.to_toml();
    CHECK(parse(text) == c);
    CHECK(parse(text).to_toml() == text);
    CHECK(text.find("bucket_slack = 0.1\n") != std::string::npos);
  }

  TEST_CASE("hash follows content but not the thread count") {
    RunConfig a, b;
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 64);
    b.eval.jobs = 8;
    CHECK(a.hash() == b.hash());
    b.synthesis.seed = 1;
    CHECK(a.hash() != b.hash());
  }

  TEST_CASE("bad config files are rejected") {
    for (const char* text : {"unknown_key = 1\n", "[section]\n", "seed = 1\nseed = 2\n", "seed = \"x\"\n",
                             "window_span_days = 0\n", "bucket_boundaries = [5, 3]\n", "evidence_cap = 0\n",
                             "retrieval = \"bogus\"\n", "boundary_date = \"2020-13-01\"\n", "seed 1\n",
                             "min_articles = -1\n", "name = \"unterminated\n"}) {
      CAPTURE(text);
      CHECK_THROWS_AS(parse(text), InputError);
    }
    CHECK_THROWS_AS(RunConfig::from_file("/nonexistent/booqa.toml"), InputError);
  }

  TEST_CASE("flat parser value kinds") {
    std::istringstream in("a = 1\nb = -2.5\nc = true\nd = \"x # y\"\ne = []\nf = [1,2 , 3]\n");
    const auto m = parse_flat_toml(in);
    CHECK(std::get<std::int64_t>(m.at("a")) == 1);
    CHECK(std::get<double>(m.at("b")) == -2.5);
    CHECK(std::get<bool>(m.at("c")));
    CHECK(std::get<std::string>(m.at("d")) == "x # y");
    CHECK(std::get<std::vector<std::int64_t>>(m.at("e")).empty());
    CHECK(std::get<std::vector<std::int64_t>>(m.at("f")) == std::vector<std::int64_t>{1, 2, 3});
  }

  TEST_CASE("manifests") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    fixture::TempDir dir("manifest");
    fixture::write_file(dir / "in" / "b.txt", "two");
    fixture::write_file(dir / "in" / "a.txt", "one");
    fixture::write_file(dir / "single.txt", "abc");
    CHECK(sha256_file(dir / "single.txt") == sha256_hex("abc"));

    RunManifest m;
    m.command = "synthesize";
    m.config_hash = RunConfig{}.hash();
    m.seed = 7;
    m.add_input("corpus", dir / "in");
    m.add_input("file", dir / "single.txt");
    CHECK(m.input_digests.at("corpus") ==
          sha256_hex("a.txt\t" + sha256_hex("one") + "\nb.txt\t" + sha256_hex("two") + "\n"));
    const auto back = RunManifest::from_json(m.to_json());
    CHECK(back.to_json() == m.to_json());
    CHECK(back.tool_version == kToolVersion);

    write_manifest_sidecar(dir / "out.jsonl", m);
    write_timings_sidecar(dir / "out.jsonl", {{"total", 0.25}});
    CHECK(std::filesystem::exists(dir / "out.jsonl.manifest.json"));
    CHECK(nlohmann::json::parse(fixture::read_file(dir / "out.jsonl.timings.json"))["total"] == 0.25);
    CHECK_THROWS(m.add_input("missing", dir / "nope"));
  }
}
