#include "random_data.hpp"

#include <algorithm>

namespace cris::testing {

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

namespace {

bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[uniform(rng, 0, v.size() - 1)];
}

Iri node_iri(std::string_view ns, std::size_t i) { return make_iri("http://test.example/" + std::string(ns) + "/n" + std::to_string(i)); }

}  // namespace

RandomGraph random_graph(Rng& rng, std::size_t max_nodes) {
  RandomGraph g;
  std::size_t n = uniform(rng, 1, max_nodes);
  std::vector<Iri> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    nodes.push_back(node_iri("g", i));
    g.nodes.insert(nodes.back());
  }
  // Mostly upward edges (a DAG backbone), some back edges for cycles.
  double density = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
  std::size_t edge_count = static_cast<std::size_t>(density * static_cast<double>(n));
  for (std::size_t k = 0; k < edge_count; ++k) {
    std::size_t a = uniform(rng, 0, n - 1), b = uniform(rng, 0, n - 1);
    if (!chance(rng, 0.15) && a < b) std::swap(a, b);  // child index > parent index
    g.edges.emplace(nodes[a], nodes[b]);
  }
  // Occasionally an edge to a node that is not declared.
  if (chance(rng, 0.2)) g.edges.emplace(nodes[uniform(rng, 0, n - 1)], node_iri("g", n + 7));
  return g;
}

RandomDataset random_dataset(Rng& rng, std::size_t max_classes, std::size_t max_triples) {
  RandomDataset d;
  const Iri type = vocab::iri(vocab::kType);
  const Iri rdfs_class = vocab::iri(vocab::kClass);
  const Iri property = vocab::iri(vocab::kProperty);
  const Iri sub_class = vocab::iri(vocab::kSubClassOf);
  const Iri sub_property = vocab::iri(vocab::kSubPropertyOf);

  std::size_t nc = uniform(rng, 1, max_classes);
  for (std::size_t i = 0; i < nc; ++i) {
    d.classes.push_back(node_iri("c", i));
    d.schema_triples.emplace_back(Term(d.classes.back()), type, Term(rdfs_class));
  }
  for (std::size_t i = 1; i < nc; ++i) {
    std::size_t parents = uniform(rng, 0, 2);
    for (std::size_t k = 0; k < parents; ++k) {
      std::size_t p = uniform(rng, 0, i - 1);
      d.schema_triples.emplace_back(Term(d.classes[i]), sub_class, Term(d.classes[p]));
    }
  }
  if (nc > 2 && chance(rng, 0.3)) {  // a cycle
    d.schema_triples.emplace_back(Term(d.classes[0]), sub_class, Term(d.classes[nc - 1]));
  }

  std::size_t np = uniform(rng, 1, 6);
  for (std::size_t i = 0; i < np; ++i) {
    d.properties.push_back(node_iri("p", i));
    d.schema_triples.emplace_back(Term(d.properties.back()), type, Term(property));
    if (i > 0 && chance(rng, 0.5)) {
      d.schema_triples.emplace_back(Term(d.properties[i]), sub_property, Term(d.properties[uniform(rng, 0, i - 1)]));
    }
  }

  d.literals = {"Semantic Web", "Databases", "semantic", "Web", "", "x*y", "Wien"};
  std::size_t budget = max_triples > d.schema_triples.size() ? max_triples - d.schema_triples.size() : 0;
  std::size_t target = uniform(rng, 0, budget);
  // About two triples per individual keeps path fan-out small.
  std::size_t ni = std::max<std::size_t>(2, uniform(rng, target / 3, target / 2 + 2));
  std::vector<Term> individuals;
  for (std::size_t i = 0; i < ni; ++i) {
    if (chance(rng, 0.1)) {
      individuals.emplace_back(BlankNode("b" + std::to_string(i)));
    } else {
      individuals.emplace_back(node_iri("i", i));
    }
  }

  for (const auto& x : individuals) {
    if (d.data_triples.size() >= target) break;
    std::size_t types = uniform(rng, 0, 2);
    for (std::size_t k = 0; k < types && d.data_triples.size() < target; ++k) {
      // Now and then a type that the schema does not declare.
      Iri c = chance(rng, 0.05) ? node_iri("c", nc + 3) : pick(rng, d.classes);
      d.data_triples.emplace_back(x, type, Term(c));
    }
  }
  while (d.data_triples.size() < target) {
    const Term& s = pick(rng, individuals);
    Iri p = chance(rng, 0.05) ? node_iri("p", np + 2) : pick(rng, d.properties);
    if (chance(rng, 0.4)) {
      const std::string& lex = pick(rng, d.literals);
      d.data_triples.emplace_back(s, p, Term(Literal(lex, chance(rng, 0.2) ? "en" : "")));
    } else {
      d.data_triples.emplace_back(s, p, pick(rng, individuals));
    }
  }
  return d;
}

QueryAst random_query(Rng& rng, const RandomDataset& data, std::size_t max_patterns, std::size_t max_steps,
                      std::size_t max_conditions) {
  auto class_ref = [&] { return ClassRef{pick(rng, data.classes), chance(rng, 0.3)}; };
  if (chance(rng, 0.15)) return ClassQuery{class_ref()};

  SelectQuery q;
  std::vector<std::string> vars;
  std::size_t fresh = 0;
  auto new_var = [&] { return "V" + std::to_string(fresh++); };

  std::size_t np = uniform(rng, 1, max_patterns);
  for (std::size_t i = 0; i < np; ++i) {
    // Later patterns always share a variable with earlier ones (through the
    // head or the first step) so that results stay desk-sized.
    bool share_head = i > 0 && chance(rng, 0.7);
    bool share_step = i > 0 && !share_head;
    std::string head_var = share_head ? pick(rng, vars) : new_var();
    PathPattern p{class_ref(), head_var, {}};
    std::set<std::string> used{head_var};
    std::size_t ns = uniform(rng, share_step ? 1 : 0, max_steps);
    for (std::size_t k = 0; k < ns; ++k) {
      std::string v;
      if ((k == 0 && share_step) || (!vars.empty() && chance(rng, 0.2))) {
        v = pick(rng, vars);
        if (used.contains(v)) v = new_var();
      } else {
        v = new_var();
      }
      used.insert(v);
      p.steps.push_back({PropertyRef{pick(rng, data.properties), chance(rng, 0.2)}, v});
    }
    for (const auto& v : used) {
      if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    }
    q.patterns.push_back(std::move(p));
  }

  std::size_t nf = uniform(rng, 0, max_conditions);
  for (std::size_t k = 0; k < nf; ++k) {
    switch (uniform(rng, 0, 2)) {
      case 0: q.filter.push_back(VarEqVar{pick(rng, vars), pick(rng, vars)}); break;
      case 1: q.filter.push_back(VarEqLiteral{pick(rng, vars), pick(rng, data.literals)}); break;
      default: {
        static const std::vector<std::string> patterns{"*", "Sem*", "*Web", "*a*", "x**y", "W*n", ""};
        q.filter.push_back(VarLikeLiteral{pick(rng, vars), pick(rng, patterns)});
      }
    }
  }

  std::vector<std::string> shuffled = vars;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  shuffled.resize(uniform(rng, 1, shuffled.size()));
  q.projection = shuffled;
  return q;
}

namespace {

std::string random_text(Rng& rng, std::size_t max_len) {
  static const std::vector<std::string> pieces{"a", "Z", "0", " ", "\"", "\\", "\n", "\t", "\r", "ä", "€", "日本",
                                               "<", ">", "#", ".", "_:", "@en", "'", "{", "}"};
  std::string out;
  std::size_t n = uniform(rng, 0, max_len);
  for (std::size_t i = 0; i < n; ++i) out += pick(rng, pieces);
  return out;
}

Iri random_iri(Rng& rng) {
  static const std::vector<std::string> bases{"http://ex.org/", "https://cris.example.org/a/b?x=1&y=", "urn:isbn:",
                                              "http://derpi.tuwien.ac.at/~andrei/cerif.rdfs#", "mailto:"};
  static const std::vector<std::string> pieces{"a", "X", "0", "-", ".", "_", "~", "%20", "/", "#", "?", "=", "&", "ä", "é"};
  std::string s = pick(rng, bases);
  std::size_t n = uniform(rng, 1, 12);
  for (std::size_t i = 0; i < n; ++i) s += pick(rng, pieces);
  return make_iri(s);
}

}  // namespace

Triple random_triple(Rng& rng) {
  Term subject = chance(rng, 0.2) ? Term(BlankNode("b" + std::to_string(uniform(rng, 0, 20)))) : Term(random_iri(rng));
  Iri predicate = random_iri(rng);
  auto object = [&]() -> Term {
    static const std::vector<std::string> langs{"en", "de", "en-gb", "de-at-1996"};
    switch (uniform(rng, 0, 3)) {
      case 0: return random_iri(rng);
      case 1: return BlankNode("n" + std::to_string(uniform(rng, 0, 20)));
      case 2: return Literal(random_text(rng, 8), "");
      default: return Literal(random_text(rng, 8), pick(rng, langs));
    }
  };
  return Triple(subject, predicate, object());
}

}  // namespace cris::testing
