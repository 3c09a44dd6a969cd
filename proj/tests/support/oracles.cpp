#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <map>
#include <sstream>

namespace oracle {

std::vector<Point> pr_points(const std::vector<std::optional<double>>& scores, const std::vector<bool>& labels,
                             bool inclusive) {
  const auto n = scores.size();
  const double positives = static_cast<double>(std::count(labels.begin(), labels.end(), true));
  std::vector<double> thresholds;
  bool any_missing = false;
  for (const auto& s : scores) {
    if (s) {
      thresholds.push_back(*s);
    } else {
      any_missing = true;
    }
  }
  std::sort(thresholds.rbegin(), thresholds.rend());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<Point> pts;
  for (double t : thresholds) {
    double tp = 0, pp = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (scores[i] && *scores[i] >= t) {
        pp += 1;
        if (labels[i]) tp += 1;
      }
    }
    pts.push_back({tp / positives, tp / pp});
  }
  if (any_missing) pts.push_back({1.0, positives / static_cast<double>(n)});
  if (inclusive) pts.insert(pts.begin(), Point{0.0, pts.front().p});
  return pts;
}

namespace {

// Splits [a, b] at the point where the line crosses p = f and integrates
// g over the pieces whose midpoint satisfies keep().
template <typename G, typename K>
double piecewise(const Point& a, const Point& b, double f, G g, K keep) {
  if (b.r <= a.r) return 0.0;
  std::vector<Point> cuts{a};
  if ((a.p - f) * (b.p - f) < 0) {
    const double x = a.r + (f - a.p) * (b.r - a.r) / (b.p - a.p);
    cuts.push_back({x, f});
  }
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double mid = (cuts[i - 1].p + cuts[i].p) / 2;
    if (keep(mid)) total += (cuts[i].r - cuts[i - 1].r) * (g(cuts[i - 1].p) + g(cuts[i].p)) / 2;
  }
  return total;
}

}  // namespace

double integrate_above(const std::vector<Point>& pts, double f) {
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    total += piecewise(
        pts[i - 1], pts[i], f, [&](double p) { return p - f; }, [&](double mid) { return mid > f; });
  }
  return total;
}

double integrate_where_at_least(const std::vector<Point>& pts, double f) {
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    total += piecewise(
        pts[i - 1], pts[i], f, [](double p) { return p; }, [&](double mid) { return mid >= f; });
  }
  return total;
}

double auc_norm(const std::vector<std::optional<double>>& scores, const std::vector<bool>& labels, bool inclusive) {
  const double xi =
      static_cast<double>(std::count(labels.begin(), labels.end(), true)) / static_cast<double>(labels.size());
  return (integrate_where_at_least(pr_points(scores, labels, inclusive), xi) - xi) / (1 - xi);
}

double auc_with_floor(const std::vector<std::optional<double>>& scores, const std::vector<bool>& labels,
                      double floor, bool inclusive) {
  return integrate_above(pr_points(scores, labels, inclusive), floor) / (1 - floor);
}

namespace {

std::string norm(const std::string& s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string joined(const std::vector<std::string>& w) {
  std::string out;
  for (const auto& x : w) out += (out.empty() ? "" : " ") + x;
  return out;
}

}  // namespace

SynthesisSets synthesize(const std::vector<booqa::Article>& articles, const std::vector<booqa::RawTriple>& triples,
                         const std::vector<booqa::Synset>& synsets, int span_days, const SynthesisRule& rule) {
  auto first = articles.front().date;
  for (const auto& a : articles) first = std::min(first, a.date);
  std::map<std::string, std::uint32_t> window_of;
  for (const auto& a : articles) {
    window_of[a.article_id] = static_cast<std::uint32_t>((a.date - first).count() / span_days);
  }

  struct Mention {
    std::uint32_t window;
    std::string s, o, key, article;
  };
  std::vector<Mention> mentions;
  for (const auto& t : triples) {
    std::string pred;
    for (const auto& tok : t.predicate) pred += " " + tok;
    mentions.push_back({window_of.at(t.article_id), norm(t.subject), norm(t.object), norm(pred), t.article_id});
  }
  auto unordered = [](const std::string& a, const std::string& b) { return a < b ? a + "\x1f" + b : b + "\x1f" + a; };

  std::map<std::string, std::set<std::string>> pairs_of_predicate;
  std::map<std::pair<std::uint32_t, std::string>, std::set<std::string>> pair_articles, pair_predicates;
  std::set<PositiveKey> present;
  for (const auto& m : mentions) {
    const auto u = unordered(m.s, m.o);
    pairs_of_predicate[m.key].insert(u);
    pair_articles[{m.window, u}].insert(m.article);
    pair_predicates[{m.window, u}].insert(m.key);
    present.insert({m.window, m.s, m.o, m.key});
  }
  auto felicitous = [&](const std::string& key) {
    auto it = pairs_of_predicate.find(key);
    return it != pairs_of_predicate.end() && it->second.size() >= rule.min_argpairs;
  };

  SynthesisSets out;
  for (const auto& m : mentions) {
    const auto u = unordered(m.s, m.o);
    if (pair_articles[{m.window, u}].size() >= rule.min_articles &&
        pair_predicates[{m.window, u}].size() >= rule.min_predicates && felicitous(m.key)) {
      out.positives.insert({m.window, m.s, m.o, m.key});
    }
  }

  auto synonyms = [&](const std::string& lemma) {
    std::set<std::string> syn{lemma};
    for (const auto& s : synsets) {
      if (std::find(s.lemmas.begin(), s.lemmas.end(), lemma) != s.lemmas.end()) {
        syn.insert(s.lemmas.begin(), s.lemmas.end());
      }
    }
    return syn;
  };
  auto find = [&](const std::string& id) -> const booqa::Synset& {
    for (const auto& s : synsets) {
      if (s.id == id) return s;
    }
    throw std::runtime_error("unknown synset " + id);
  };

  for (const auto& [w, s, o, key] : out.positives) {
    const auto tokens = words(key);
    // candidate key -> every absence set it was generated with
    std::map<std::string, std::vector<std::set<std::string>>> routes;
    for (std::size_t start = 0; start < tokens.size(); ++start) {
      for (std::size_t len = 1; len <= rule.max_span && start + len <= tokens.size(); ++len) {
        const std::string lemma =
            joined(std::vector<std::string>(tokens.begin() + start, tokens.begin() + start + len));
        const booqa::Synset* sense = nullptr;
        for (const auto& syn : synsets) {
          if (std::find(syn.lemmas.begin(), syn.lemmas.end(), lemma) != syn.lemmas.end()) {
            sense = &syn;
            break;
          }
        }
        if (!sense) continue;
        auto with = [&](const std::string& replacement) {
          std::vector<std::string> v(tokens.begin(), tokens.begin() + start);
          for (auto& x : words(replacement)) v.push_back(x);
          v.insert(v.end(), tokens.begin() + start + len, tokens.end());
          return joined(v);
        };
        for (const auto& hid : sense->hyponym_ids) {
          for (const auto& l : find(hid).lemmas) {
            const std::string candidate = with(l);
            if (candidate == key) continue;
            std::set<std::string> absence{candidate};
            for (const auto& x : synonyms(l)) absence.insert(with(x));
            for (const auto& x : synonyms(candidate)) absence.insert(x);
            routes[candidate].push_back(absence);
          }
        }
      }
    }
    for (const auto& [candidate, sets] : routes) {
      if (!felicitous(candidate)) continue;
      bool absent = true;
      for (const auto& set : sets) {
        for (const auto& x : set) absent = absent && !present.contains({w, s, o, x});
      }
      if (absent) out.negatives.insert({w, s, o, candidate, key});
    }
  }
  return out;
}

}  // namespace oracle
