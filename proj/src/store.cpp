#include "cris/store.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

namespace cris {

Timestamp now_utc() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string format_utc(Timestamp t) {
  std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Timestamp parse_utc(std::string_view text) {
  std::tm tm{};
  int consumed = 0;
  std::string s(text);
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2dZ%n", &tm.tm_year, &tm.tm_mon, &tm.tm_mday,
                  &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &consumed) != 6 ||
      static_cast<std::size_t>(consumed) != s.size()) {
    throw Error("malformed UTC timestamp '" + s + "'");
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  return static_cast<Timestamp>(timegm(&tm));
}

SourceId SourceId::parse(std::string_view text) {
  if (text == "local") return local();
  return from(make_iri(text));
}

namespace detail {

template <int I>
const Term& part(const Triple& t) {
  if constexpr (I == 0) return t.subject();
  else if constexpr (I == 1) return t.predicate();
  else return t.object();
}

/// Bound leading components of an index key; second may be null.
struct Prefix {
  const Term* first;
  const Term* second = nullptr;
};

template <int A, int B, int C>
struct OrderBy {
  using is_transparent = void;

  bool operator()(const Triple& x, const Triple& y) const {
    if (auto c = compare_terms(part<A>(x), part<A>(y)); c != 0) return c < 0;
    if (auto c = compare_terms(part<B>(x), part<B>(y)); c != 0) return c < 0;
    return compare_terms(part<C>(x), part<C>(y)) < 0;
  }
  bool operator()(const Triple& x, const Prefix& k) const { return cmp(x, k) < 0; }
  bool operator()(const Prefix& k, const Triple& x) const { return cmp(x, k) > 0; }

 private:
  static std::strong_ordering cmp(const Triple& x, const Prefix& k) {
    if (auto c = compare_terms(part<A>(x), *k.first); c != 0 || k.second == nullptr) return c;
    return compare_terms(part<B>(x), *k.second);
  }
};

using SpoIndex = std::set<Triple, OrderBy<0, 1, 2>>;
using PosIndex = std::set<Triple, OrderBy<1, 2, 0>>;
using OspIndex = std::set<Triple, OrderBy<2, 0, 1>>;

struct StoreState {
  SpoIndex spo;
  PosIndex pos;
  OspIndex osp;
  std::map<Triple, std::set<Provenance>> provenance;
  std::uint64_t version = 0;

  // The public triples() view; identical ordering to spo.
  std::set<Triple> canonical;

  // One entry per source; a later fetch replaces the timestamp.
  bool add(const Triple& t, const Provenance& p) {
    auto& entries = provenance[t];
    std::erase_if(entries, [&](const Provenance& e) { return e.source == p.source; });
    entries.insert(p);
    if (!spo.insert(t).second) return false;
    pos.insert(t);
    osp.insert(t);
    canonical.insert(t);
    return true;
  }

  void erase(const Triple& t) {
    spo.erase(t);
    pos.erase(t);
    osp.erase(t);
    canonical.erase(t);
    provenance.erase(t);
  }
};

}  // namespace detail

using detail::Prefix;
using detail::StoreState;

// ---------------------------------------------------------------------------
// Snapshot

std::size_t Snapshot::size() const noexcept { return state_->spo.size(); }

bool Snapshot::contains(const Triple& t) const { return state_->spo.contains(t); }

const std::set<Triple>& Snapshot::triples() const noexcept { return state_->canonical; }

std::uint64_t Snapshot::version() const noexcept { return state_->version; }

std::vector<Triple> Snapshot::match(const std::optional<Term>& s, const std::optional<Term>& p,
                                    const std::optional<Term>& o) const {
  std::vector<Triple> out;
  auto take = [&](auto range, auto keep) {
    for (auto it = range.first; it != range.second; ++it) {
      if (keep(*it)) out.push_back(*it);
    }
  };
  auto object_ok = [&](const Triple& t) { return !o || t.object() == *o; };
  auto always = [](const Triple&) { return true; };
  const StoreState& st = *state_;
  bool resort = false;

  if (s) {
    if (p) {
      take(st.spo.equal_range(Prefix{&*s, &*p}), object_ok);
    } else if (o) {
      take(st.osp.equal_range(Prefix{&*o, &*s}), always);
      resort = true;
    } else {
      take(st.spo.equal_range(Prefix{&*s}), always);
    }
  } else if (p) {
    if (o) {
      take(st.pos.equal_range(Prefix{&*p, &*o}), always);
    } else {
      take(st.pos.equal_range(Prefix{&*p}), always);
    }
    resort = true;
  } else if (o) {
    take(st.osp.equal_range(Prefix{&*o}), always);
    resort = true;
  } else {
    out.assign(st.spo.begin(), st.spo.end());
  }
  if (resort) std::sort(out.begin(), out.end());
  return out;
}

std::vector<Triple> Snapshot::scan(IndexOrder order) const {
  switch (order) {
    case IndexOrder::kSubjectFirst: return {state_->spo.begin(), state_->spo.end()};
    case IndexOrder::kPredicateFirst: return {state_->pos.begin(), state_->pos.end()};
    case IndexOrder::kObjectFirst: return {state_->osp.begin(), state_->osp.end()};
  }
  return {};
}

std::vector<Provenance> Snapshot::provenance(const Triple& t) const {
  auto it = state_->provenance.find(t);
  if (it == state_->provenance.end()) return {};
  return {it->second.begin(), it->second.end()};
}

StoreStats Snapshot::stats() const {
  StoreStats out;
  const StoreState& st = *state_;
  out.triples = st.spo.size();
  const Term* last = nullptr;
  for (const auto& t : st.spo) {
    if (last == nullptr || !(*last == t.subject())) ++out.subjects;
    last = &t.subject();
  }
  last = nullptr;
  for (const auto& t : st.pos) {
    if (last == nullptr || !(*last == t.predicate())) ++out.predicates;
    last = &t.predicate();
  }
  std::map<SourceId, SourceStats> per_source;
  for (const auto& [triple, entries] : st.provenance) {
    std::map<SourceId, Timestamp> latest;
    for (const auto& e : entries) {
      auto [it, fresh] = latest.emplace(e.source, e.fetched_at);
      if (!fresh) it->second = std::max(it->second, e.fetched_at);
    }
    for (const auto& [source, at] : latest) {
      auto [it, fresh] = per_source.emplace(source, SourceStats{source, 0, at});
      ++it->second.triples;
      it->second.latest_fetch = std::max(it->second.latest_fetch, at);
    }
  }
  for (auto& [source, row] : per_source) out.sources.push_back(row);
  return out;
}

// ---------------------------------------------------------------------------
// Store

Store::Store() : state_(std::make_shared<StoreState>()) {}
Store::~Store() = default;

template <typename Fn>
auto Store::write(Fn&& fn) {
  std::lock_guard writer(write_mutex_);
  std::shared_ptr<const StoreState> current;
  {
    std::lock_guard guard(state_mutex_);
    current = state_;
  }
  auto next = std::make_shared<StoreState>(*current);
  auto result = fn(*next);
  ++next->version;
  {
    std::lock_guard guard(state_mutex_);
    state_ = next;
  }
  if (persist_dir_) write_snapshot(Snapshot(std::move(next)), *persist_dir_);
  return result;
}

bool Store::insert(const Triple& t, const SourceId& source, Timestamp at) {
  return write([&](StoreState& st) { return st.add(t, Provenance{source, at}); });
}

std::string scoped_blank_label(std::string_view label, std::string_view scope) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : scope) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return std::string(label) + "x" + hex;
}

namespace {

Term scope_term(const Term& term, std::string_view scope) {
  if (!term.is_blank()) return term;
  return Term(BlankNode(scoped_blank_label(term.value(), scope)));
}

}  // namespace

MergeResult Store::merge(const ParseOutcome& parsed, const SourceId& source, Timestamp at, MergeMode mode) {
  return write([&](StoreState& st) {
    MergeResult result;
    std::set<Triple> before;
    if (mode == MergeMode::kReplaceSource) {
      std::vector<Triple> orphaned;
      for (auto& [triple, entries] : st.provenance) {
        std::erase_if(entries, [&](const Provenance& p) { return p.source == source; });
        if (entries.empty()) orphaned.push_back(triple);
      }
      // Dropped triples still count as present for added/duplicate purposes.
      before.insert(orphaned.begin(), orphaned.end());
      for (const auto& t : orphaned) st.erase(t);
    }
    for (const auto& raw : parsed.triples) {
      Triple t(scope_term(raw.subject(), parsed.blank_scope), raw.predicate(),
               scope_term(raw.object(), parsed.blank_scope));
      bool fresh = st.add(t, Provenance{source, at});
      bool was_dropped = before.erase(t) > 0;
      if (fresh && !was_dropped) {
        ++result.added;
      } else {
        ++result.duplicate;
      }
    }
    result.removed = before.size();
    return result;
  });
}

Snapshot Store::snapshot() const {
  std::lock_guard guard(state_mutex_);
  return Snapshot(state_);
}

void write_snapshot(const Snapshot& snap, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write_file = [&](std::string_view name, const std::string& body) {
    auto target = dir / name;
    auto tmp = target;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write " + tmp.string());
      out << body;
      if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
  };

  write_file(kStoreFile, serialize(snap.triples()));
  std::string prov;
  for (const auto& t : snap.triples()) {
    for (const auto& p : snap.provenance(t)) {
      prov += p.source.str();
      prov += '\t';
      prov += format_utc(p.fetched_at);
      prov += '\t';
      prov += t.str();
      prov += '\n';
    }
  }
  write_file(kProvenanceFile, prov);
}

void Store::save(const std::filesystem::path& dir) const { write_snapshot(snapshot(), dir); }

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

void Store::load(const std::filesystem::path& dir) {
  ParseOutcome parsed = parse_triples(read_file(dir / kStoreFile), (dir / kStoreFile).string());
  if (!parsed.errors.empty()) {
    const auto& e = parsed.errors.front();
    throw Error((dir / kStoreFile).string() + ":" + std::to_string(e.line) + ": " + e.message);
  }
  std::string prov_text = read_file(dir / kProvenanceFile);

  auto next = std::make_shared<StoreState>();
  std::set<Triple> triples(parsed.triples.begin(), parsed.triples.end());
  std::istringstream lines(prov_text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab1 = line.find('\t');
    auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw Error((dir / kProvenanceFile).string() + ":" + std::to_string(line_no) + ": expected 3 fields");
    }
    Triple t = parse_triple_line(std::string_view(line).substr(tab2 + 1));
    if (!triples.contains(t)) continue;  // removed from store.nt by hand
    next->add(t, Provenance{SourceId::parse(line.substr(0, tab1)),
                            parse_utc(std::string_view(line).substr(tab1 + 1, tab2 - tab1 - 1))});
  }
  for (const auto& t : triples) {
    if (!next->spo.contains(t)) next->add(t, Provenance{SourceId::local(), 0});
  }

  std::lock_guard writer(write_mutex_);
  std::lock_guard guard(state_mutex_);
  next->version = state_->version + 1;
  state_ = std::move(next);
}

void Store::persist_to(std::filesystem::path dir) {
  std::lock_guard writer(write_mutex_);
  persist_dir_ = std::move(dir);
}

bool insert(Store& store, const Triple& t, const SourceId& source, Timestamp at) {
  return store.insert(t, source, at);
}

std::vector<Triple> match(const Snapshot& snap, const std::optional<Term>& subject,
                          const std::optional<Term>& predicate, const std::optional<Term>& object) {
  return snap.match(subject, predicate, object);
}

MergeResult merge(Store& store, const ParseOutcome& parsed, const SourceId& source, Timestamp at,
                  MergeMode mode) {
  return store.merge(parsed, source, at, mode);
}

StoreStats stats(const Snapshot& snap) { return snap.stats(); }

}  // namespace cris
