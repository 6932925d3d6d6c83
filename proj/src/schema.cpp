#include "cris/schema.hpp"

#include <algorithm>
#include <limits>

#include "cris/serde.hpp"

namespace cris {

namespace {

class SchemaBuilder {
 public:
  SchemaBuilder(SchemaLoadMode mode, std::vector<Triple>* rejected)
      : mode_(mode),
        rejected_(rejected),
        type_(vocab::iri(vocab::kType)),
        class_(vocab::iri(vocab::kClass)),
        property_(vocab::iri(vocab::kProperty)),
        sub_class_(vocab::iri(vocab::kSubClassOf)),
        sub_property_(vocab::iri(vocab::kSubPropertyOf)),
        domain_(vocab::iri(vocab::kDomain)),
        range_(vocab::iri(vocab::kRange)),
        label_(vocab::iri(vocab::kLabel)),
        literal_(vocab::iri(vocab::kLiteral)) {}

  void add(const Triple& t) {
    const Term& p = t.predicate();
    if (p == label_) {
      if (t.subject().is_iri() && t.object().is_literal()) {
        auto [it, fresh] = schema_.labels.emplace(t.subject().as_iri(), t.object().value());
        if (!fresh && t.object().value() < it->second) it->second = t.object().value();
      }
      return;
    }
    const bool reserved = p == type_ || p == sub_class_ || p == sub_property_ || p == domain_ || p == range_;
    if (!reserved) return;
    if (p == type_ && !(t.object() == class_ || t.object() == property_)) return;

    if (!t.subject().is_iri() || !t.object().is_iri()) {
      reject(t, t.object().is_literal() ? "literal object in schema assertion"
                                        : "blank node in schema assertion");
      return;
    }
    Iri s = t.subject().as_iri();
    Iri o = t.object().as_iri();
    if (p == type_) {
      (o == class_.as_iri() ? schema_.classes : schema_.properties).insert(s);
    } else if (p == sub_class_) {
      schema_.classes.insert(s);
      schema_.classes.insert(o);
      schema_.subclass_edges.emplace(s, o);
    } else if (p == sub_property_) {
      schema_.properties.insert(s);
      schema_.properties.insert(o);
      schema_.subproperty_edges.emplace(s, o);
    } else if (p == domain_) {
      schema_.properties.insert(s);
      schema_.classes.insert(o);
      keep_min(schema_.domain, s, o);
    } else {
      schema_.properties.insert(s);
      if (o != literal_.as_iri()) schema_.classes.insert(o);
      keep_min(schema_.range, s, o);
    }
  }

  Schema take() { return std::move(schema_); }

 private:
  static void keep_min(std::map<Iri, Iri>& map, const Iri& key, const Iri& value) {
    auto [it, fresh] = map.emplace(key, value);
    if (!fresh && value < it->second) it->second = value;
  }

  void reject(const Triple& t, const std::string& why) {
    if (mode_ == SchemaLoadMode::kStrict) throw InvalidSchemaTriple(why + ": " + t.str());
    if (rejected_ != nullptr) rejected_->push_back(t);
  }

  SchemaLoadMode mode_;
  std::vector<Triple>* rejected_;
  Schema schema_;
  Term type_, class_, property_, sub_class_, sub_property_, domain_, range_, label_, literal_;
};

}  // namespace

bool Schema::literal_ranged(const Iri& property) const {
  auto it = range.find(property);
  return it != range.end() && it->second.str() == vocab::kLiteral;
}

std::vector<Iri> Schema::direct_subclasses(const Iri& c) const {
  std::vector<Iri> out;
  for (const auto& [child, parent] : subclass_edges) {
    if (parent == c && child != c) out.push_back(child);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Iri> Schema::direct_superclasses(const Iri& c) const {
  std::vector<Iri> out;
  for (const auto& [child, parent] : subclass_edges) {
    if (child == c && parent != c) out.push_back(parent);
  }
  return out;
}

Schema load_schema(std::span<const Triple> dataset, SchemaLoadMode mode, std::vector<Triple>* rejected) {
  SchemaBuilder builder(mode, rejected);
  for (const auto& t : dataset) builder.add(t);
  return builder.take();
}

Schema load_schema(const std::set<Triple>& dataset, SchemaLoadMode mode, std::vector<Triple>* rejected) {
  SchemaBuilder builder(mode, rejected);
  for (const auto& t : dataset) builder.add(t);
  return builder.take();
}

// ---------------------------------------------------------------------------
// Closure: Tarjan SCC condensation, ancestors accumulated in the order SCCs
// are completed (every SCC finishes after all SCCs it can reach).

Hierarchy::Hierarchy(const std::set<Iri>& nodes, const std::set<std::pair<Iri, Iri>>& edges) {
  std::vector<Iri> index_to_iri(nodes.begin(), nodes.end());
  for (const auto& [child, parent] : edges) {
    index_to_iri.push_back(child);
    index_to_iri.push_back(parent);
  }
  std::sort(index_to_iri.begin(), index_to_iri.end());
  index_to_iri.erase(std::unique(index_to_iri.begin(), index_to_iri.end()), index_to_iri.end());
  const std::size_t n = index_to_iri.size();
  auto index_of = [&](const Iri& iri) {
    return static_cast<std::size_t>(std::lower_bound(index_to_iri.begin(), index_to_iri.end(), iri) -
                                    index_to_iri.begin());
  };

  std::vector<std::vector<std::size_t>> parents(n);
  std::vector<bool> self_loop(n, false);
  for (const auto& [child, parent] : edges) {
    std::size_t c = index_of(child);
    std::size_t p = index_of(parent);
    if (c == p) self_loop[c] = true;
    parents[c].push_back(p);
  }

  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0), component(n, kUnvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> component_ancestors;  // sorted node indices
  std::size_t counter = 0;

  struct Frame {
    std::size_t node;
    std::size_t next_edge;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.next_edge < parents[f.node].size()) {
        std::size_t w = parents[f.node][f.next_edge++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.node] = std::min(low[f.node], index[w]);
        }
        continue;
      }
      std::size_t v = f.node;
      call.pop_back();
      if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
      if (low[v] != index[v]) continue;

      std::vector<std::size_t> members;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        component[w] = component_ancestors.size();
        members.push_back(w);
      } while (w != v);

      std::vector<std::size_t> reach = members;
      for (std::size_t m : members) {
        for (std::size_t p : parents[m]) {
          if (component[p] == component_ancestors.size()) continue;
          const auto& up = component_ancestors[component[p]];
          reach.insert(reach.end(), up.begin(), up.end());
        }
      }
      std::sort(reach.begin(), reach.end());
      reach.erase(std::unique(reach.begin(), reach.end()), reach.end());
      component_ancestors.push_back(std::move(reach));

      if (members.size() > 1 || self_loop[v]) {
        for (std::size_t m : members) cyclic_.push_back(index_to_iri[m]);
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto& up = up_[index_to_iri[i]];
    for (std::size_t a : component_ancestors[component[i]]) {
      up.insert(index_to_iri[a]);
      down_[index_to_iri[a]].insert(index_to_iri[i]);
    }
  }
  std::sort(cyclic_.begin(), cyclic_.end());
}

std::vector<Iri> Hierarchy::ancestors(const Iri& node) const {
  auto it = up_.find(node);
  if (it == up_.end()) return {node};
  return {it->second.begin(), it->second.end()};
}

std::vector<Iri> Hierarchy::descendants(const Iri& node) const {
  auto it = down_.find(node);
  if (it == down_.end()) return {node};
  return {it->second.begin(), it->second.end()};
}

bool Hierarchy::reaches(const Iri& child, const Iri& parent) const {
  if (child == parent) return true;
  auto it = up_.find(child);
  return it != up_.end() && it->second.contains(parent);
}

ClosureTable closure(const Schema& schema) {
  return {Hierarchy(schema.classes, schema.subclass_edges),
          Hierarchy(schema.properties, schema.subproperty_edges)};
}

bool is_subclass(const ClosureTable& ct, const Iri& child, const Iri& parent) {
  return ct.classes.reaches(child, parent);
}

bool is_subproperty(const ClosureTable& ct, const Iri& child, const Iri& parent) {
  return ct.properties.reaches(child, parent);
}

// ---------------------------------------------------------------------------

std::size_t ValidationReport::error_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      findings.begin(), findings.end(), [](const Finding& f) { return f.severity == Severity::kError; }));
}

ValidationReport validate(std::span<const Triple> dataset, const Schema& schema, const ClosureTable& ct) {
  const Term type(vocab::iri(vocab::kType));
  const Iri rdfs_class = vocab::iri(vocab::kClass);
  const Iri rdf_property = vocab::iri(vocab::kProperty);

  std::map<Term, std::vector<Iri>> asserted;
  for (const auto& t : dataset) {
    if (t.predicate() == type && t.object().is_iri()) asserted[t.subject()].push_back(t.object().as_iri());
  }
  auto fits = [&](const Term& node, const Iri& target) {
    auto it = asserted.find(node);
    if (it == asserted.end()) return true;
    return std::any_of(it->second.begin(), it->second.end(),
                       [&](const Iri& c) { return is_subclass(ct, c, target); });
  };

  ValidationReport report;
  auto warn = [&](const Triple& t, std::string message) {
    report.findings.push_back({Severity::kWarning, t, std::move(message)});
  };
  for (const auto& t : dataset) {
    if (t.predicate() == type) {
      if (!t.object().is_iri()) {
        warn(t, "type object is not a class IRI");
        continue;
      }
      Iri c = t.object().as_iri();
      if (c != rdfs_class && c != rdf_property && !schema.classes.contains(c)) {
        warn(t, "instance of undeclared class " + c.str());
      }
      continue;
    }
    Iri p = t.predicate().as_iri();
    if (!schema.properties.contains(p)) continue;
    if (auto d = schema.domain.find(p); d != schema.domain.end() && !fits(t.subject(), d->second)) {
      warn(t, "subject is not typed as a " + d->second.str() + " (domain of " + p.str() + ")");
    }
    if (auto r = schema.range.find(p); r != schema.range.end()) {
      if (r->second.str() == vocab::kLiteral) {
        if (!t.object().is_literal()) warn(t, "non-literal object for literal-valued " + p.str());
      } else if (t.object().is_literal()) {
        warn(t, "literal object for class-valued " + p.str());
      } else if (!fits(t.object(), r->second)) {
        warn(t, "object is not typed as a " + r->second.str() + " (range of " + p.str() + ")");
      }
    }
  }
  std::sort(report.findings.begin(), report.findings.end(), [](const Finding& a, const Finding& b) {
    if (auto c = a.triple <=> b.triple; c != 0) return c < 0;
    return a.message < b.message;
  });
  return report;
}

std::vector<Triple> bundled_cerif_schema() {
  return parse_triples(bundled_cerif_schema_text(), "cerif").triples;
}

}  // namespace cris
