#include "oracles.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace cris::oracle {

std::map<Iri, std::set<Iri>> bfs_ancestors(const std::set<Iri>& nodes, const std::set<std::pair<Iri, Iri>>& edges) {
  std::set<Iri> all = nodes;
  for (const auto& [c, p] : edges) {
    all.insert(c);
    all.insert(p);
  }
  std::map<Iri, std::set<Iri>> out;
  for (const auto& start : all) {
    std::set<Iri> seen{start};
    std::deque<Iri> queue{start};
    while (!queue.empty()) {
      Iri cur = queue.front();
      queue.pop_front();
      for (const auto& [c, p] : edges) {
        if (c == cur && seen.insert(p).second) queue.push_back(p);
      }
    }
    out.emplace(start, std::move(seen));
  }
  return out;
}

std::set<Iri> bfs_descendants(const Iri& target, const std::set<std::pair<Iri, Iri>>& edges) {
  std::set<Iri> seen{target};
  std::deque<Iri> queue{target};
  while (!queue.empty()) {
    Iri cur = queue.front();
    queue.pop_front();
    for (const auto& [c, p] : edges) {
      if (p == cur && seen.insert(c).second) queue.push_back(c);
    }
  }
  return seen;
}

std::vector<Triple> scan_match(const std::vector<Triple>& triples, const std::optional<Term>& s,
                               const std::optional<Term>& p, const std::optional<Term>& o) {
  std::vector<Triple> out;
  for (const auto& t : triples) {
    if (s && t.subject() != *s) continue;
    if (p && t.predicate() != *p) continue;
    if (o && t.object() != *o) continue;
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

// One triple-shaped constraint: subject var, accepted predicates, object
// (a variable, or a fixed set of accepted objects for type constraints).
struct Constraint {
  std::string subject_var;
  std::set<Term> predicates;
  std::string object_var;     // empty for type constraints
  std::set<Term> object_set;  // accepted classes for type constraints
};

bool condition_holds(const Condition& c, const std::map<std::string, Term>& mu) {
  if (const auto* eq = std::get_if<VarEqLiteral>(&c)) {
    const Term& v = mu.at(eq->var);
    return v.is_literal() && v.value() == eq->text;
  }
  if (const auto* like = std::get_if<VarLikeLiteral>(&c)) {
    const Term& v = mu.at(like->var);
    return v.is_literal() && like_match(v.value(), like->pattern);
  }
  const auto& ve = std::get<VarEqVar>(c);
  return mu.at(ve.left) == mu.at(ve.right);
}

}  // namespace

BindingTable evaluate(const QueryAst& ast, const std::vector<Triple>& triples, const Schema& schema) {
  const Term type(vocab::iri(vocab::kType));
  auto class_set = [&](const ClassRef& ref) {
    std::set<Term> out;
    if (ref.strict) {
      out.insert(Term(ref.iri));
    } else {
      for (const auto& c : bfs_descendants(ref.iri, schema.subclass_edges)) out.insert(Term(c));
    }
    return out;
  };
  auto property_set = [&](const PropertyRef& ref) {
    std::set<Term> out;
    if (ref.strict) {
      out.insert(Term(ref.iri));
    } else {
      for (const auto& p : bfs_descendants(ref.iri, schema.subproperty_edges)) out.insert(Term(p));
    }
    return out;
  };

  std::vector<Constraint> constraints;
  std::vector<std::string> projection;
  std::vector<Condition> filter;
  if (const auto* cq = std::get_if<ClassQuery>(&ast)) {
    constraints.push_back({std::string(kClassQueryColumn), {type}, "", class_set(cq->class_ref)});
    projection = {std::string(kClassQueryColumn)};
  } else {
    const auto& q = std::get<SelectQuery>(ast);
    for (const auto& p : q.patterns) {
      constraints.push_back({p.head_var, {type}, "", class_set(p.head)});
      std::string prev = p.head_var;
      for (const auto& step : p.steps) {
        constraints.push_back({prev, property_set(step.property), step.var, {}});
        prev = step.var;
      }
    }
    projection = q.projection;
    filter = q.filter;
  }

  // Connected order: prefer a constraint touching an already bound variable.
  {
    std::vector<Constraint> ordered;
    std::set<std::string> bound;
    std::vector<bool> used(constraints.size(), false);
    for (std::size_t n = 0; n < constraints.size(); ++n) {
      std::size_t pick = constraints.size();
      for (std::size_t i = 0; i < constraints.size() && pick == constraints.size(); ++i) {
        if (!used[i] && (bound.contains(constraints[i].subject_var) || bound.contains(constraints[i].object_var))) pick = i;
      }
      for (std::size_t i = 0; i < constraints.size() && pick == constraints.size(); ++i) {
        if (!used[i]) pick = i;
      }
      used[pick] = true;
      bound.insert(constraints[pick].subject_var);
      if (!constraints[pick].object_var.empty()) bound.insert(constraints[pick].object_var);
      ordered.push_back(constraints[pick]);
    }
    constraints = std::move(ordered);
  }

  // Candidate triples per constraint: a predicate (and for type constraints,
  // object) filter over the full list; the search below is a plain nested loop.
  std::vector<std::vector<const Triple*>> candidates(constraints.size());
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    for (const auto& t : triples) {
      if (!constraints[i].predicates.contains(t.predicate())) continue;
      if (constraints[i].object_var.empty() && !constraints[i].object_set.contains(t.object())) continue;
      candidates[i].push_back(&t);
    }
  }
  // A condition is checked right after the last of its variables is bound.
  auto vars_of = [](const Condition& c) -> std::vector<std::string> {
    if (const auto* ve = std::get_if<VarEqVar>(&c)) return {ve->left, ve->right};
    if (const auto* eq = std::get_if<VarEqLiteral>(&c)) return {eq->var};
    return {std::get<VarLikeLiteral>(c).var};
  };
  std::vector<std::vector<Condition>> checks(constraints.size());
  for (const auto& c : filter) {
    std::size_t last = 0;
    for (const auto& v : vars_of(c)) {
      for (std::size_t i = 0; i < constraints.size(); ++i) {
        if (constraints[i].subject_var == v || constraints[i].object_var == v) {
          last = std::max(last, i);
          break;
        }
      }
    }
    checks[last].push_back(c);
  }

  std::set<std::vector<Term>> rows;
  std::map<std::string, Term> mu;
  std::function<void(std::size_t)> search = [&](std::size_t i) {
    if (i == constraints.size()) {
      std::vector<Term> row;
      for (const auto& v : projection) row.push_back(mu.at(v));
      rows.insert(std::move(row));
      return;
    }
    const Constraint& c = constraints[i];
    for (const Triple* t : candidates[i]) {
      std::vector<std::string> bound_here;
      bool ok = true;
      auto bind = [&](const std::string& var, const Term& value) {
        auto it = mu.find(var);
        if (it == mu.end()) {
          mu.emplace(var, value);
          bound_here.push_back(var);
        } else if (it->second != value) {
          ok = false;
        }
      };
      bind(c.subject_var, t->subject());
      if (ok && !c.object_var.empty()) bind(c.object_var, t->object());
      for (std::size_t k = 0; ok && k < checks[i].size(); ++k) ok = condition_holds(checks[i][k], mu);
      if (ok) search(i + 1);
      for (const auto& v : bound_here) mu.erase(v);
    }
  };
  search(0);
  return BindingTable{projection, {rows.begin(), rows.end()}};
}

}  // namespace cris::oracle
