#include "cris/repository.hpp"

namespace cris {

Repository::Repository(std::vector<Triple> base_schema, PrefixMap prefixes)
    : base_schema_(std::move(base_schema)), prefixes_(std::move(prefixes)) {
  // The base schema must be well formed; harvested additions are not.
  load_schema(base_schema_);
}

std::shared_ptr<const SchemaView> Repository::schema_for(const Snapshot& snap) const {
  {
    std::lock_guard guard(cache_mutex_);
    if (cache_ && cache_->version == snap.version()) return cache_;
  }
  auto view = std::make_shared<SchemaView>();
  view->version = snap.version();
  std::vector<Triple> all = base_schema_;
  all.insert(all.end(), snap.triples().begin(), snap.triples().end());
  view->schema = load_schema(all, SchemaLoadMode::kSkipInvalid, &view->rejected);
  view->closure = closure(view->schema);

  std::lock_guard guard(cache_mutex_);
  if (!cache_ || cache_->version < view->version) cache_ = view;
  return view;
}

BindingTable Repository::query(std::string_view text) const {
  QueryAst ast = parse_query(text, prefixes_);
  Snapshot snap = store_.snapshot();
  auto view = schema_for(snap);
  return evaluate(ast, snap, view->schema, view->closure);
}

}  // namespace cris
