#include <algorithm>
#include <map>
#include <set>

#include "cris/query.hpp"

namespace cris {

bool like_match(std::string_view text, std::string_view pattern) {
  // Greedy glob with backtracking to the last '*'.
  std::size_t t = 0, p = 0;
  std::size_t star = std::string_view::npos, resume = 0;
  while (t < text.size()) {
    if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      resume = t;
    } else if (p < pattern.size() && pattern[p] == text[t]) {
      ++p;
      ++t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++resume;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

namespace {

using Row = std::vector<Term>;

struct Table {
  std::vector<std::string> vars;
  std::vector<Row> rows;

  std::ptrdiff_t column(std::string_view var) const {
    auto it = std::find(vars.begin(), vars.end(), var);
    return it == vars.end() ? -1 : it - vars.begin();
  }

  void dedupe() {
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  }
};

class Evaluator {
 public:
  Evaluator(const Snapshot& snap, const ClosureTable& ct) : snap_(snap), ct_(ct), type_(vocab::iri(vocab::kType)) {}

  std::vector<Term> instances(const ClassRef& ref) const {
    std::vector<Iri> classes = ref.strict ? std::vector<Iri>{ref.iri} : ct_.classes.descendants(ref.iri);
    std::vector<Term> out;
    for (const auto& c : classes) {
      for (const auto& t : snap_.match(std::nullopt, type_, Term(c))) out.push_back(t.subject());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  Table pattern(const PathPattern& p) const {
    Table table{{p.head_var}, {}};
    for (auto& x : instances(p.head)) table.rows.push_back({std::move(x)});
    for (const auto& step : p.steps) {
      std::vector<Iri> props =
          step.property.strict ? std::vector<Iri>{step.property.iri} : ct_.properties.descendants(step.property.iri);
      std::vector<Row> next;
      for (const auto& row : table.rows) {
        const Term& from = row.back();
        if (from.is_literal()) continue;
        for (const auto& q : props) {
          for (const auto& t : snap_.match(from, Term(q), std::nullopt)) {
            Row extended = row;
            extended.push_back(t.object());
            next.push_back(std::move(extended));
          }
        }
      }
      table.vars.push_back(step.var);
      table.rows = std::move(next);
      table.dedupe();
    }
    return table;
  }

 private:
  const Snapshot& snap_;
  const ClosureTable& ct_;
  Term type_;
};

bool literal_holds(const Condition& c, const Table& table, const Row& row) {
  if (const auto* eq = std::get_if<VarEqLiteral>(&c)) {
    auto col = table.column(eq->var);
    if (col < 0) return true;
    const Term& v = row[col];
    return v.is_literal() && v.value() == eq->text;
  }
  if (const auto* like = std::get_if<VarLikeLiteral>(&c)) {
    auto col = table.column(like->var);
    if (col < 0) return true;
    const Term& v = row[col];
    return v.is_literal() && like_match(v.value(), like->pattern);
  }
  const auto& ve = std::get<VarEqVar>(c);
  auto a = table.column(ve.left);
  auto b = table.column(ve.right);
  if (a < 0 || b < 0) return true;
  return row[a] == row[b];
}

void apply_filters(Table& table, const std::vector<Condition>& filter) {
  std::erase_if(table.rows, [&](const Row& row) {
    return !std::all_of(filter.begin(), filter.end(), [&](const Condition& c) { return literal_holds(c, table, row); });
  });
}

/// Equi-join on shared variables and on var = var conditions spanning both
/// sides.
Table join(const Table& left, const Table& right, const std::vector<Condition>& filter) {
  std::vector<std::pair<std::size_t, std::size_t>> keys;
  for (std::size_t r = 0; r < right.vars.size(); ++r) {
    if (auto l = left.column(right.vars[r]); l >= 0) keys.emplace_back(l, r);
  }
  for (const auto& c : filter) {
    const auto* ve = std::get_if<VarEqVar>(&c);
    if (ve == nullptr) continue;
    auto ll = left.column(ve->left), lr = left.column(ve->right);
    auto rl = right.column(ve->left), rr = right.column(ve->right);
    if (ll >= 0 && rr >= 0 && rl < 0) keys.emplace_back(ll, rr);
    if (lr >= 0 && rl >= 0 && rr < 0) keys.emplace_back(lr, rl);
  }

  std::vector<std::size_t> carried;  // right columns appended to the output
  Table out{left.vars, {}};
  for (std::size_t r = 0; r < right.vars.size(); ++r) {
    if (left.column(right.vars[r]) < 0) {
      carried.push_back(r);
      out.vars.push_back(right.vars[r]);
    }
  }

  std::map<Row, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < right.rows.size(); ++i) {
    Row key;
    for (const auto& [l, r] : keys) key.push_back(right.rows[i][r]);
    buckets[std::move(key)].push_back(i);
  }
  for (const auto& lrow : left.rows) {
    Row key;
    for (const auto& [l, r] : keys) key.push_back(lrow[l]);
    auto it = buckets.find(key);
    if (it == buckets.end()) continue;
    for (std::size_t i : it->second) {
      Row row = lrow;
      for (std::size_t r : carried) row.push_back(right.rows[i][r]);
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace

BindingTable evaluate(const QueryAst& ast, const Snapshot& snap, const Schema& /*schema*/, const ClosureTable& ct) {
  Evaluator eval(snap, ct);
  if (const auto* cq = std::get_if<ClassQuery>(&ast)) {
    BindingTable result{{std::string(kClassQueryColumn)}, {}};
    for (auto& x : eval.instances(cq->class_ref)) result.rows.push_back({std::move(x)});
    return result;
  }

  const auto& q = std::get<SelectQuery>(ast);
  Table acc;
  for (std::size_t i = 0; i < q.patterns.size(); ++i) {
    Table t = eval.pattern(q.patterns[i]);
    apply_filters(t, q.filter);
    acc = i == 0 ? std::move(t) : join(acc, t, q.filter);
    if (acc.rows.empty()) break;
  }
  apply_filters(acc, q.filter);

  BindingTable result{q.projection, {}};
  if (acc.rows.empty()) return result;
  std::vector<std::size_t> cols;
  for (const auto& v : q.projection) cols.push_back(static_cast<std::size_t>(acc.column(v)));
  for (const auto& row : acc.rows) {
    Row projected;
    for (std::size_t c : cols) projected.push_back(row[c]);
    result.rows.push_back(std::move(projected));
  }
  std::sort(result.rows.begin(), result.rows.end());
  result.rows.erase(std::unique(result.rows.begin(), result.rows.end()), result.rows.end());
  return result;
}

}  // namespace cris
