#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "booqa/bench_synthesis.hpp"
#include "booqa/config.hpp"
#include "booqa/corpus_store.hpp"
#include "booqa/eg_scorer.hpp"
#include "booqa/entity_typing.hpp"
#include "booqa/errors.hpp"
#include "booqa/eval_harness.hpp"
#include "booqa/levyholt_mesh.hpp"
#include "booqa/lexicon.hpp"
#include "booqa/log.hpp"
#include "booqa/manifest.hpp"
#include "booqa/metrics.hpp"
#include "booqa/scorer_bridge.hpp"

namespace fs = std::filesystem;
using namespace booqa;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

struct BridgeFlags {
  std::string command;
  std::string endpoint;
  int timeout_ms = 30000;
  int retries = 2;
  std::size_t batch = 64;

  bool given() const { return !command.empty() || !endpoint.empty(); }

  void add_to(CLI::App& app, const std::string& prefix) {
    auto* cmd = app.add_option("--" + prefix + "-cmd", command, "Shell command that starts the external scorer");
    app.add_option("--" + prefix + "-tcp", endpoint, "host:port of a running external scorer")->excludes(cmd);
    app.add_option("--bridge-timeout-ms", timeout_ms, "Per-request timeout")->capture_default_str();
    app.add_option("--bridge-retries", retries, "Retries per request")->capture_default_str();
    app.add_option("--bridge-batch", batch, "Initial batch size")->capture_default_str();
  }

  std::shared_ptr<BridgeClient> connect() const {
    std::unique_ptr<LineChannel> channel;
    if (!command.empty()) {
      channel = std::make_unique<ProcessChannel>(command);
    } else {
      channel = TcpChannel::from_endpoint(endpoint);
    }
    BridgeOptions options;
    options.timeout = std::chrono::milliseconds(timeout_ms);
    options.max_retries = retries;
    options.batch_size = batch;
    return std::make_shared<BridgeClient>(std::move(channel), options);
  }
};

RunConfig load_config(const std::string& path) {
  return path.empty() ? RunConfig{} : RunConfig::from_file(path);
}

Lexicon load_lexicon(const fs::path& path, std::size_t max_span) {
  Lexicon lex = fs::is_directory(path) ? Lexicon::from_wordnet_dir(path) : Lexicon::from_json_file(path);
  lex.set_max_span(max_span);
  return lex;
}

std::unordered_set<std::string> read_id_list(const fs::path& path) {
  auto in = open_in(path);
  std::unordered_set<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty() && line[0] != '#') ids.insert(line);
  }
  return ids;
}

Dataset read_dataset(const fs::path& path) {
  auto in = open_in(path);
  return read_dataset_jsonl(in);
}

void write_dataset(const fs::path& path, const Dataset& dataset) {
  auto out = open_out(path);
  write_dataset_jsonl(out, dataset);
}

std::shared_ptr<TypeAssigner> make_types(const std::string& gazetteer, const BridgeFlags* bridge,
                                         const std::string& fallback) {
  if (!gazetteer.empty()) {
    return std::make_shared<GazetteerTypeAssigner>(GazetteerTypeAssigner::from_tsv_file(gazetteer));
  }
  if (bridge && bridge->given()) return std::make_shared<BridgeTypeAssigner>(bridge->connect());
  if (!fallback.empty()) return std::make_shared<ConstantTypeAssigner>(fallback);
  return nullptr;
}

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
  std::string config, articles, triples, out, exclude;
};

int run_ingest(const IngestArgs& a) {
  const auto start = Clock::now();
  const RunConfig config = load_config(a.config);
  IngestOptions options;
  options.window_span_days = config.window_span_days;
  if (!a.exclude.empty()) options.excluded_articles = read_id_list(a.exclude);
  auto articles = open_in(a.articles);
  auto triples = open_in(a.triples);
  IngestReport report;
  const CorpusStore store = CorpusStore::ingest(articles, triples, options, &report);
  store.save(a.out);

  RunManifest m;
  m.command = "ingest";
  m.config_hash = config.hash();
  m.add_input("articles", a.articles);
  m.add_input("triples", a.triples);
  if (!a.exclude.empty()) m.add_input("exclude", a.exclude);
  write_manifest_sidecar(fs::path(a.out) / "index", m);
  write_timings_sidecar(fs::path(a.out) / "index", {{"ingest", seconds_since(start)}});
  log::info("ingest_done", {{"articles", report.articles_accepted},
                            {"articles_rejected", report.articles_rejected},
                            {"triples", report.triples_accepted},
                            {"triples_rejected", report.triples_rejected},
                            {"windows", store.windows().size()}});
  return 0;
}

// ---- synthesize -----------------------------------------------------------

struct SynthesizeArgs {
  std::string config, corpus, lexicon, out, audit, types;
  std::size_t audit_per_label = 50;
  BridgeFlags wsd;
};

int run_synthesize(const SynthesizeArgs& a, unsigned jobs) {
  const auto start = Clock::now();
  const RunConfig config = load_config(a.config);
  const CorpusStore store = CorpusStore::load(a.corpus);
  const Lexicon lexicon = load_lexicon(a.lexicon, config.max_span);
  const SynsetStrategy strategy = parse_synset_strategy(config.synset_strategy);
  std::shared_ptr<Disambiguator> hook;
  if (strategy == SynsetStrategy::external) {
    if (!a.wsd.given()) throw InputError("synset_strategy \"external\" needs --wsd-cmd or --wsd-tcp");
    hook = std::make_shared<BridgeDisambiguator>(a.wsd.connect());
  }
  const SynsetSelector selector(strategy, hook);
  const Population population = synthesize_population(store, lexicon, selector, config.synthesis, jobs);

  Dataset all;
  all.bundles = population.bundles;
  all.diagnostics = population.diagnostics;
  write_dataset(a.out, all);

  RunManifest m;
  m.command = "synthesize";
  m.config_hash = config.hash();
  m.seed = config.synthesis.seed;
  m.add_input("corpus", a.corpus);
  m.add_input("lexicon", a.lexicon);
  write_manifest_sidecar(a.out, m);

  if (!a.audit.empty()) {
    auto types = make_types(a.types, nullptr, "entity");
    auto out = open_out(a.audit);
    write_audit_sample(out, all, a.audit_per_label, *types, config.synthesis.seed);
  }
  write_timings_sidecar(a.out, {{"synthesize", seconds_since(start)}});
  log::info("synthesize_done", {{"positives", population.positives.size()},
                                {"candidates", population.candidate_count},
                                {"negatives", population.negatives.size()},
                                {"bundles", population.bundles.size()}});
  return 0;
}

// ---- sample ---------------------------------------------------------------

struct SampleArgs {
  std::string config, corpus, population, out, dev_out, test_out;
};

int run_sample(const SampleArgs& a) {
  const auto start = Clock::now();
  const RunConfig config = load_config(a.config);
  const CorpusStore store = CorpusStore::load(a.corpus);
  const Dataset population = read_dataset(a.population);
  validate_against_corpus(population, store);

  SamplingConfig sc;
  sc.buckets = config.buckets;
  sc.seed = config.synthesis.seed;
  sc.bucket_slack = config.bucket_slack;
  sc.target_positive_count = config.target_positives == 0 ? population.bundles.size() : config.target_positives;
  const Dataset dataset = sample_dataset(population.bundles, sc, store);
  for (const auto& d : dataset.diagnostics) log::warn(d.code, {{"message", d.message}});
  write_dataset(a.out, dataset);

  RunManifest m;
  m.command = "sample";
  m.config_hash = config.hash();
  m.seed = sc.seed;
  m.add_input("corpus", a.corpus);
  m.add_input("population", a.population);
  write_manifest_sidecar(a.out, m);

  if (!a.dev_out.empty() || !a.test_out.empty()) {
    if (!config.boundary_date) throw InputError("--dev-out/--test-out need boundary_date in the config");
    const auto [dev, test] = split_by_time(dataset, *config.boundary_date, store);
    if (!a.dev_out.empty()) {
      write_dataset(a.dev_out, dev);
      write_manifest_sidecar(a.dev_out, m);
    }
    if (!a.test_out.empty()) {
      write_dataset(a.test_out, test);
      write_manifest_sidecar(a.test_out, m);
    }
  }
  write_timings_sidecar(a.out, {{"sample", seconds_since(start)}});
  log::info("sample_done", {{"positives", dataset.positive_count()}, {"negatives", dataset.negative_count()}});
  return 0;
}

// ---- evaluate -------------------------------------------------------------

struct EvaluateArgs {
  std::string config, corpus, dataset, out, curve_csv;
  std::string scorer = "eg";
  double constant = 0.5;
  std::string graph_dir, sims_section, types;
  bool fuzzy = false;
  bool cross_type = false;
  std::optional<std::string> retrieval, boundary;
  std::optional<std::size_t> cap, tfidf_k;
  BridgeFlags bridge;
  BridgeFlags typer;
};

int run_evaluate(const EvaluateArgs& a, unsigned jobs) {
  const auto start = Clock::now();
  RunConfig config = load_config(a.config);
  if (a.retrieval) config.eval.retrieval = parse_retrieval_mode(*a.retrieval);
  if (a.boundary) config.eval.boundary = parse_left_boundary(*a.boundary);
  if (a.cap) config.eval.evidence_cap = *a.cap;
  if (a.tfidf_k) config.eval.tfidf_k = *a.tfidf_k;
  config.eval.jobs = jobs;
  config.eval.validate();

  const CorpusStore store = CorpusStore::load(a.corpus);
  const Dataset dataset = read_dataset(a.dataset);

  RunManifest m;
  m.command = "evaluate";
  m.config_hash = config.hash();
  m.add_input("corpus", a.corpus);
  m.add_input("dataset", a.dataset);

  std::unique_ptr<Scorer> scorer;
  if (a.scorer == "constant") {
    scorer = std::make_unique<ConstantScorer>(a.constant);
  } else if (a.scorer == "eg") {
    if (a.graph_dir.empty()) throw InputError("--scorer eg needs --graph-dir");
    auto graph = EntailmentGraph::open_dir(a.graph_dir);
    if (!a.sims_section.empty()) graph->set_sims_section(a.sims_section);
    m.add_input("graph", a.graph_dir);
    auto types = make_types(a.types, &a.typer, "");
    if (!a.types.empty()) m.add_input("types", a.types);
    scorer = std::make_unique<EgScorer>(graph, EgScorerOptions{a.fuzzy, a.cross_type}, types);
  } else if (a.scorer == "bridge") {
    if (!a.bridge.given()) throw InputError("--scorer bridge needs --bridge-cmd or --bridge-tcp");
    auto client = a.bridge.connect();
    const std::string name = "bridge:" + client->describe();
    scorer = std::make_unique<BridgeScorer>(std::move(client), name);
  } else {
    throw InputError("unknown scorer " + a.scorer);
  }

  const EvalResult result = run_eval(dataset, store, *scorer, config.eval);
  auto j = eval_result_json(result);
  j["manifest"] = m.to_json();
  auto out = open_out(a.out);
  out << j.dump(2) << '\n';
  if (!a.curve_csv.empty()) {
    auto csv = open_out(a.curve_csv);
    write_curve_csv(csv, result.report.curve);
  }
  write_timings_sidecar(a.out, {{"evaluate", seconds_since(start)}});
  return 0;
}

// ---- probe ----------------------------------------------------------------

struct ProbeArgs {
  std::string config, dataset, eval_dataset, out_dir, types;
  std::size_t train_size = 0;
  std::size_t dev2_size = 0;
  BridgeFlags bridge;
  BridgeFlags typer;
};

struct HonlyItem {
  std::string id;
  bool positive = false;
  std::string hypothesis;
};

std::vector<HonlyItem> honly_items(const Dataset& dataset, TypeAssigner& types, Diagnostics& diagnostics) {
  std::vector<HonlyItem> out;
  for (const auto& p : dataset.propositions()) {
    const Relation masked = mask_arguments(p.relation(), types, &diagnostics);
    out.push_back({p.id, p.label == Label::positive, masked.text()});
  }
  return out;
}

void write_honly(const fs::path& path, std::span<const HonlyItem> items, std::span<const std::size_t> which,
                 std::string_view token) {
  auto out = open_out(path);
  for (std::size_t i : which) {
    nlohmann::ordered_json j;
    j["id"] = items[i].id;
    j["premise"] = token;
    j["hypothesis"] = items[i].hypothesis;
    j["label"] = items[i].positive ? 1 : 0;
    out << j.dump() << '\n';
  }
}

int run_probe(const ProbeArgs& a) {
  const RunConfig config = load_config(a.config);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  auto types = make_types(a.types, &a.typer, "entity");
  Diagnostics diagnostics;

  const Dataset dev = read_dataset(a.dataset);
  const auto items = honly_items(dev, *types, diagnostics);
  std::vector<std::string> hypotheses;
  for (const auto& it : items) hypotheses.push_back(it.hypothesis);
  const std::size_t train_size = a.train_size ? a.train_size : items.size() - items.size() / 5;
  const std::size_t dev2_size = a.dev2_size ? a.dev2_size : items.size() - train_size;
  const SubsplitResult split = subsplit_dev(hypotheses, train_size, dev2_size, config.synthesis.seed);
  write_honly(dir / "honly_train.jsonl", items, split.train, config.honly_token);
  write_honly(dir / "honly_dev2.jsonl", items, split.dev2, config.honly_token);
  diagnostics.insert(diagnostics.end(), split.diagnostics.begin(), split.diagnostics.end());

  std::vector<HonlyItem> eval_items;
  std::vector<std::size_t> eval_index;
  if (!a.eval_dataset.empty()) {
    eval_items = honly_items(read_dataset(a.eval_dataset), *types, diagnostics);
    for (std::size_t i = 0; i < eval_items.size(); ++i) eval_index.push_back(i);
    write_honly(dir / "honly_eval.jsonl", eval_items, eval_index, config.honly_token);
  } else {
    eval_items = items;
    eval_index = split.dev2;
  }

  nlohmann::ordered_json summary;
  summary["train"] = split.train.size();
  summary["dev2"] = split.dev2.size();
  summary["dropped"] = split.dropped.size();
  summary["eval"] = eval_index.size();

  if (a.bridge.given()) {
    auto client = a.bridge.connect();
    nlohmann::json train_request = nlohmann::json::array();
    train_request.push_back({{"train", fs::absolute(dir / "honly_train.jsonl").string()},
                             {"dev", fs::absolute(dir / "honly_dev2.jsonl").string()}});
    const auto trained = client->call("train", train_request);
    summary["trainer_dev_score"] = trained["scores"][0];

    nlohmann::json request = nlohmann::json::array();
    for (std::size_t i : eval_index) {
      request.push_back({{"premise", config.honly_token},
                         {"hypothesis", eval_items[i].hypothesis},
                         {"premise_relation", nullptr},
                         {"hypothesis_relation", nullptr}});
    }
    const auto response = client->call("score", request);
    std::vector<std::optional<double>> scores;
    auto labels = std::make_unique<bool[]>(eval_index.size());
    for (std::size_t k = 0; k < eval_index.size(); ++k) {
      const auto& v = response["scores"][k];
      scores.push_back(v.is_number() ? std::optional<double>(v.get<double>()) : std::nullopt);
      labels[k] = eval_items[eval_index[k]].positive;
    }
    try {
      const auto report = evaluate_scores(scores, std::span<const bool>(labels.get(), eval_index.size()),
                                          config.eval.boundary);
      summary["auc_norm"] = report.auc_norm;
      summary["auc_50"] = report.auc_50;
      summary["xi"] = report.xi;
    } catch (const std::invalid_argument& e) {
      summary["auc_norm"] = nullptr;
      summary["auc_50"] = nullptr;
      summary["xi"] = nullptr;
      diagnostics.push_back({"auc_undefined", e.what()});
      log::warn("auc_undefined", {{"message", e.what()}});
    }
  }
  nlohmann::ordered_json diag = nlohmann::ordered_json::array();
  for (const auto& d : diagnostics) diag.push_back({{"code", d.code}, {"message", d.message}});
  summary["diagnostics"] = diag;
  auto out = open_out(dir / "probe.json");
  out << summary.dump(2) << '\n';
  log::info("probe_done", {{"train", split.train.size()}, {"dev2", split.dev2.size()}});
  return 0;
}

// ---- mesh -----------------------------------------------------------------

struct MeshArgs {
  std::string config, levyholt, out_dir, prompts, types;
  bool keep_leakage = false;
  bool symmetric = false;
  bool honly = false;
};

int run_mesh(const MeshArgs& a) {
  const RunConfig config = load_config(a.config);
  PairCollection c = load_levyholt_dir(a.levyholt);
  std::size_t moved = 0;
  if (!a.keep_leakage) moved = fix_split_leakage(c.pairs, config.synthesis.seed);
  const auto groups = classify_subgroups(c.pairs);

  std::vector<EntailmentPair> pairs = c.pairs;
  if (a.honly) {
    auto types = make_types(a.types, nullptr, "");
    for (auto& p : pairs) {
      const auto converse = p.converse;
      p = honly_transform(p, config.honly_token);
      p.converse = converse;
      if (types) p.hypothesis = mask_arguments(p.hypothesis, *types, &c.diagnostics);
    }
  }
  std::vector<PromptTemplate> templates;
  if (!a.prompts.empty()) {
    auto in = open_in(a.prompts);
    templates = read_prompt_templates(in);
  }

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  for (const auto& subset : build_mesh(pairs, groups)) {
    auto out = open_out(dir / (subset.name() + ".jsonl"));
    write_subset_jsonl(out, subset, pairs);
    if (!templates.empty()) {
      auto pout = open_out(dir / (subset.name() + ".prompts.jsonl"));
      for (const auto& e : subset.entries) {
        const auto& p = pairs[e.pair];
        for (const auto& inst : render_prompts(p.premise, p.hypothesis, templates, a.symmetric)) {
          nlohmann::ordered_json j;
          j["id"] = p.id;
          j["template"] = inst.template_id;
          j["direction"] = inst.direction == PromptDirection::forward ? "forward" : "reversed";
          j["text"] = inst.text;
          j["label"] = e.label;
          j["split"] = split_name(p.split);
          pout << j.dump() << '\n';
        }
      }
    }
  }

  nlohmann::ordered_json summary;
  summary["pairs"] = c.pairs.size();
  summary["unpaired"] = c.unpaired.size();
  summary["leakage_moved"] = moved;
  nlohmann::ordered_json counts;
  for (SubGroup g : {SubGroup::paraphrases, SubGroup::dir_true, SubGroup::dir_false, SubGroup::unrelated}) {
    nlohmann::ordered_json per_split;
    for (Split s : {Split::train, Split::dev, Split::test}) {
      std::size_t n = 0;
      for (std::size_t i = 0; i < c.pairs.size(); ++i) n += groups[i] == g && c.pairs[i].split == s;
      per_split[std::string(split_name(s))] = n;
    }
    counts[std::string(subgroup_name(g))] = per_split;
  }
  summary["subgroups"] = counts;
  nlohmann::ordered_json diag = nlohmann::ordered_json::array();
  for (const auto& d : c.diagnostics) diag.push_back({{"code", d.code}, {"message", d.message}});
  summary["diagnostics"] = diag;
  auto out = open_out(dir / "mesh_summary.json");
  out << summary.dump(2) << '\n';
  log::info("mesh_done", {{"pairs", c.pairs.size()}, {"unpaired", c.unpaired.size()}});
  return 0;
}

// ---- report ---------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> results;
  std::string format = "table";
  std::string out;
};

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

int run_report(const ReportArgs& a) {
  const std::vector<std::string> columns{"scorer",   "retrieval", "positives",     "negatives", "xi",
                                         "auc_norm", "auc_50",    "recall_ceiling", "coverage"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& path : a.results) {
    auto in = open_in(path);
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("report")) throw InputError(path + " is not an evaluation result");
    try {
      const auto& r = j.at("report");
      rows.push_back({j.at("scorer").get<std::string>(), j.at("retrieval").get<std::string>(),
                      std::to_string(r.at("positives").get<std::size_t>()),
                      std::to_string(r.at("negatives").get<std::size_t>()), fixed(r.at("xi").get<double>(), 4),
                      fixed(100.0 * r.at("auc_norm").get<double>(), 1),
                      fixed(100.0 * r.at("auc_50").get<double>(), 1),
                      fixed(100.0 * j.at("recall_ceiling").get<double>(), 1),
                      fixed(100.0 * j.at("coverage").get<double>(), 1)});
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path + ": " + e.what());
    }
  }
  std::ostringstream text;
  if (a.format == "csv") {
    for (std::size_t c = 0; c < columns.size(); ++c) text << (c ? "," : "") << columns[c];
    text << '\n';
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        const bool quote = row[c].find_first_of(",\"") != std::string::npos;
        std::string cell = row[c];
        if (quote) {
          std::string escaped;
          for (char ch : cell) escaped += ch == '"' ? std::string("\"\"") : std::string(1, ch);
          cell = "\"" + escaped + "\"";
        }
        text << (c ? "," : "") << cell;
      }
      text << '\n';
    }
  } else {
    std::vector<std::size_t> width(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      width[c] = columns[c].size();
      for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
    }
    auto line = [&](const std::vector<std::string>& cells) {
      text << '|';
      for (std::size_t c = 0; c < cells.size(); ++c) text << ' ' << std::setw(int(width[c])) << std::left << cells[c] << " |";
      text << '\n';
    };
    line(columns);
    text << '|';
    for (auto w : width) text << std::string(w + 2, '-') << '|';
    text << '\n';
    for (const auto& row : rows) line(row);
  }
  if (a.out.empty()) {
    std::cout << text.str();
  } else {
    auto out = open_out(a.out);
    out << text.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark synthesis and evaluation for directional predicate entailment"};
  app.require_subcommand(1);
  unsigned jobs = 1;
  std::string log_level = "info";
  std::string log_file;
  app.add_option("--jobs,-j", jobs, "Worker threads for synthesis and evaluation")->capture_default_str();
  app.add_option("--log-level", log_level, "debug, info, warn or error")
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}))
      ->capture_default_str();
  app.add_option("--log-file", log_file, "Write JSONL logs here instead of stderr");

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Index articles and triples into context windows");
  c_ingest->add_option("--config", ingest.config, "Run config");
  c_ingest->add_option("--articles", ingest.articles, "Articles JSONL")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--triples", ingest.triples, "Triples JSONL")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--out", ingest.out, "Index directory")->required();
  c_ingest->add_option("--exclude-articles", ingest.exclude, "File with one article id per line to drop")
      ->check(CLI::ExistingFile);

  SynthesizeArgs synth;
  auto* c_synth = app.add_subcommand("synthesize", "Build the positive/negative bundle population");
  c_synth->add_option("--config", synth.config, "Run config");
  c_synth->add_option("--corpus", synth.corpus, "Index directory from ingest")->required()->check(CLI::ExistingDirectory);
  c_synth->add_option("--lexicon", synth.lexicon, "Lexicon JSON or WordNet dict directory")
      ->required()
      ->check(CLI::ExistingPath);
  c_synth->add_option("--out", synth.out, "Population JSONL")->required();
  c_synth->add_option("--audit", synth.audit, "Also write a masked felicitousness audit sample here");
  c_synth->add_option("--audit-per-label", synth.audit_per_label, "Audit items per label")->capture_default_str();
  c_synth->add_option("--types", synth.types, "Gazetteer TSV for argument types")->check(CLI::ExistingFile);
  synth.wsd.add_to(*c_synth, "wsd");

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("sample", "Sample a frequency-matched dataset from a population");
  c_sample->add_option("--config", sample.config, "Run config");
  c_sample->add_option("--corpus", sample.corpus, "Index directory")->required()->check(CLI::ExistingDirectory);
  c_sample->add_option("--population", sample.population, "Population JSONL")->required()->check(CLI::ExistingFile);
  c_sample->add_option("--out", sample.out, "Dataset JSONL")->required();
  c_sample->add_option("--dev-out", sample.dev_out, "Windows before boundary_date");
  c_sample->add_option("--test-out", sample.test_out, "Windows from boundary_date on");

  EvaluateArgs eval;
  auto* c_eval = app.add_subcommand("evaluate", "Score a dataset and compute precision-recall metrics");
  c_eval->add_option("--config", eval.config, "Run config");
  c_eval->add_option("--corpus", eval.corpus, "Index directory")->required()->check(CLI::ExistingDirectory);
  c_eval->add_option("--dataset", eval.dataset, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--out", eval.out, "Result JSON")->required();
  c_eval->add_option("--curve-csv", eval.curve_csv, "Also write the PR curve as CSV");
  c_eval->add_option("--scorer", eval.scorer, "eg, bridge or constant")
      ->check(CLI::IsMember({"eg", "bridge", "constant"}))
      ->capture_default_str();
  c_eval->add_option("--constant", eval.constant, "Score of the constant scorer")->capture_default_str();
  c_eval->add_option("--graph-dir", eval.graph_dir, "Entailment graph directory")->check(CLI::ExistingDirectory);
  c_eval->add_option("--sims-section", eval.sims_section, "Similarity block to read from sims files");
  c_eval->add_flag("--fuzzy", eval.fuzzy, "Ignore role slots when matching graph nodes");
  c_eval->add_flag("--cross-type", eval.cross_type, "With --fuzzy, search every type-pair subgraph");
  c_eval->add_option("--types", eval.types, "Gazetteer TSV for argument types")->check(CLI::ExistingFile);
  c_eval->add_option("--retrieval", eval.retrieval, "relation, sentence or tfidf")
      ->check(CLI::IsMember({"relation", "sentence", "tfidf"}));
  c_eval->add_option("--cap", eval.cap, "Maximum evidence per hypothesis");
  c_eval->add_option("--tfidf-k", eval.tfidf_k, "Articles per hypothesis in tfidf mode");
  c_eval->add_option("--boundary", eval.boundary, "PR curve left boundary: inclusive or first_threshold")
      ->check(CLI::IsMember({"inclusive", "first_threshold"}));
  eval.bridge.add_to(*c_eval, "bridge");
  c_eval->add_option("--typer-tcp", eval.typer.endpoint, "host:port of an external entity typer");
  c_eval->add_option("--typer-cmd", eval.typer.command, "Command that starts an external entity typer");

  ProbeArgs probe;
  auto* c_probe = app.add_subcommand("probe", "Prepare and run the hypothesis-only probe");
  c_probe->add_option("--config", probe.config, "Run config");
  c_probe->add_option("--dataset", probe.dataset, "Dev dataset JSONL to split into train/dev2")
      ->required()
      ->check(CLI::ExistingFile);
  c_probe->add_option("--eval-dataset", probe.eval_dataset, "Dataset to score; defaults to dev2")
      ->check(CLI::ExistingFile);
  c_probe->add_option("--out-dir", probe.out_dir, "Output directory")->required();
  c_probe->add_option("--train-size", probe.train_size, "Target train size; default 80%");
  c_probe->add_option("--dev2-size", probe.dev2_size, "Target dev2 size; default the rest");
  c_probe->add_option("--types", probe.types, "Gazetteer TSV for argument masking")->check(CLI::ExistingFile);
  probe.bridge.add_to(*c_probe, "bridge");
  c_probe->add_option("--typer-tcp", probe.typer.endpoint, "host:port of an external entity typer");
  c_probe->add_option("--typer-cmd", probe.typer.command, "Command that starts an external entity typer");

  MeshArgs mesh;
  auto* c_mesh = app.add_subcommand("mesh", "Split a premise-hypothesis dataset into converse sub-groups");
  c_mesh->add_option("--config", mesh.config, "Run config");
  c_mesh->add_option("--levyholt", mesh.levyholt, "Directory with train/dev/test files")
      ->required()
      ->check(CLI::ExistingDirectory);
  c_mesh->add_option("--out-dir", mesh.out_dir, "Output directory")->required();
  c_mesh->add_flag("--keep-leakage", mesh.keep_leakage, "Leave converse pairs that straddle splits alone");
  c_mesh->add_option("--prompts", mesh.prompts, "Prompt templates")->check(CLI::ExistingFile);
  c_mesh->add_flag("--symmetric", mesh.symmetric, "Add reversed prompt instances");
  c_mesh->add_flag("--honly", mesh.honly, "Replace premises by the hypothesis-only token");
  c_mesh->add_option("--types", mesh.types, "Gazetteer TSV for masking hypotheses with --honly")
      ->check(CLI::ExistingFile);

  ReportArgs report;
  auto* c_report = app.add_subcommand("report", "Render evaluation results as a table or CSV");
  c_report->add_option("results", report.results, "Result JSON files")->required()->check(CLI::ExistingFile);
  c_report->add_option("--format", report.format, "table or csv")
      ->check(CLI::IsMember({"table", "csv"}))
      ->capture_default_str();
  c_report->add_option("--out", report.out, "Write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::ofstream log_stream;
  if (!log_file.empty()) {
    log_stream.open(log_file, std::ios::app);
    if (!log_stream) {
      std::cerr << "cannot open log file " << log_file << '\n';
      return 1;
    }
    log::set_sink(&log_stream);
  }
  log::set_min_level(log_level == "debug"  ? log::Level::debug
                     : log_level == "warn" ? log::Level::warn
                     : log_level == "error" ? log::Level::error
                                            : log::Level::info);
  if (jobs == 0) jobs = 1;

  try {
    if (*c_ingest) return run_ingest(ingest);
    if (*c_synth) return run_synthesize(synth, jobs);
    if (*c_sample) return run_sample(sample);
    if (*c_eval) return run_evaluate(eval, jobs);
    if (*c_probe) return run_probe(probe);
    if (*c_mesh) return run_mesh(mesh);
    if (*c_report) return run_report(report);
  } catch (const ScorerError& e) {
    log::emit(log::Level::error, "scorer_failed", {{"message", e.what()}});
    return 3;
  } catch (const InputError& e) {
    log::emit(log::Level::error, "bad_input", {{"message", e.what()}});
    return 2;
  } catch (const nlohmann::json::exception& e) {
    log::emit(log::Level::error, "bad_input", {{"message", e.what()}});
    return 2;
  } catch (const std::exception& e) {
    log::emit(log::Level::error, "failed", {{"message", e.what()}});
    return 2;
  }
  return 1;
}
