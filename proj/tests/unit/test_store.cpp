#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include <unistd.h>

#include "../support/oracles.hpp"
#include "../support/random_data.hpp"
#include "cris/serde.hpp"
#include "cris/store.hpp"

namespace cris {
namespace {

Iri ex(const std::string& name) { return make_iri("http://ex.org/" + name); }

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cris-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

TEST(Store, InsertDeduplicatesAndRecordsProvenance) {
  Store store;
  Triple t(ex("s"), ex("p"), Literal("o"));
  auto a = SourceId::parse("http://site.org/a");
  EXPECT_TRUE(store.insert(t, a, 100));
  EXPECT_FALSE(store.insert(t, a, 200));
  EXPECT_FALSE(store.insert(t, SourceId::local(), 300));
  auto snap = store.snapshot();
  EXPECT_EQ(snap.size(), 1u);
  auto prov = snap.provenance(t);
  ASSERT_EQ(prov.size(), 2u);
  EXPECT_EQ(prov[0].source, a);
  EXPECT_EQ(prov[0].fetched_at, 200);
  EXPECT_TRUE(prov[1].source.is_local());
}

TEST(Store, MatchAgreesWithLinearScan) {
  testing::Rng rng(3);
  Store store;
  std::vector<Triple> all;
  std::vector<Term> subjects, objects;
  std::vector<Iri> preds{ex("p0"), ex("p1"), ex("p2")};
  for (int i = 0; i < 12; ++i) subjects.push_back(ex("s" + std::to_string(i)));
  for (int i = 0; i < 6; ++i) objects.push_back(Literal(std::to_string(i)));
  objects.push_back(BlankNode("b"));
  objects.insert(objects.end(), subjects.begin(), subjects.begin() + 4);
  for (int i = 0; i < 150; ++i) {
    Triple t(subjects[testing::uniform(rng, 0, subjects.size() - 1)], preds[testing::uniform(rng, 0, 2)],
             objects[testing::uniform(rng, 0, objects.size() - 1)]);
    all.push_back(t);
    store.insert(t, SourceId::local(), 0);
  }
  auto snap = store.snapshot();
  for (int round = 0; round < 300; ++round) {
    std::optional<Term> s, p, o;
    if (testing::uniform(rng, 0, 1)) s = subjects[testing::uniform(rng, 0, subjects.size() - 1)];
    if (testing::uniform(rng, 0, 1)) p = Term(preds[testing::uniform(rng, 0, 2)]);
    if (testing::uniform(rng, 0, 1)) o = objects[testing::uniform(rng, 0, objects.size() - 1)];
    ASSERT_EQ(snap.match(s, p, o), oracle::scan_match(all, s, p, o));
  }
  for (auto order : {IndexOrder::kSubjectFirst, IndexOrder::kPredicateFirst, IndexOrder::kObjectFirst}) {
    auto scanned = snap.scan(order);
    EXPECT_EQ(std::set<Triple>(scanned.begin(), scanned.end()), snap.triples());
  }
}

TEST(Store, ReplaceSourceMergeDropsOrphans) {
  Store store;
  auto src = SourceId::parse("http://site.org/page");
  auto v1 = parse_triples("<http://ex.org/a> <http://ex.org/p> \"1\" .\n<http://ex.org/b> <http://ex.org/p> \"2\" .\n", "x");
  auto r1 = store.merge(v1, src, 10);
  EXPECT_EQ(r1.added, 2u);
  store.insert(Triple(ex("b"), ex("p"), Literal("2")), SourceId::local(), 11);

  auto v2 = parse_triples("<http://ex.org/a> <http://ex.org/p> \"1\" .\n<http://ex.org/c> <http://ex.org/p> \"3\" .\n", "x");
  auto r2 = store.merge(v2, src, 20, MergeMode::kReplaceSource);
  EXPECT_EQ(r2.added, 1u);
  EXPECT_EQ(r2.duplicate, 1u);
  EXPECT_EQ(r2.removed, 0u);  // b is still asserted locally
  auto snap = store.snapshot();
  EXPECT_EQ(snap.size(), 3u);
  EXPECT_EQ(snap.provenance(Triple(ex("b"), ex("p"), Literal("2"))).size(), 1u);

  auto r3 = store.merge(parse_triples("", "x"), src, 30, MergeMode::kReplaceSource);
  EXPECT_EQ(r3.removed, 2u);
  EXPECT_EQ(store.snapshot().size(), 1u);
}

TEST(Store, AccumulateKeepsEarlierTriples) {
  Store store;
  auto src = SourceId::parse("http://site.org/page");
  store.merge(parse_triples("<http://ex.org/a> <http://ex.org/p> \"1\" .", "x"), src, 1, MergeMode::kAccumulate);
  auto r = store.merge(parse_triples("<http://ex.org/b> <http://ex.org/p> \"1\" .", "x"), src, 2, MergeMode::kAccumulate);
  EXPECT_EQ(r.added, 1u);
  EXPECT_EQ(store.snapshot().size(), 2u);
}

TEST(Store, BlankNodesAreScopedPerDocument) {
  Store store;
  std::string text = "_:x <http://ex.org/p> \"v\" .\n";
  store.merge(parse_triples(text, "http://site.org/1"), SourceId::parse("http://site.org/1"), 0);
  store.merge(parse_triples(text, "http://site.org/2"), SourceId::parse("http://site.org/2"), 0);
  auto snap = store.snapshot();
  EXPECT_EQ(snap.size(), 2u);
  std::set<std::string> labels;
  for (const auto& t : snap.triples()) labels.insert(t.subject().value());
  EXPECT_TRUE(labels.contains(scoped_blank_label("x", "http://site.org/1")));
  EXPECT_EQ(scoped_blank_label("x", "s").size(), 1 + 1 + 16u);
}

TEST(Store, SaveLoadRoundTrip) {
  auto dir = temp_dir("store");
  Store a;
  a.merge(parse_triples("<http://ex.org/a> <http://ex.org/p> \"x\\ny\"@en .\n_:q <http://ex.org/p> <http://ex.org/a> .", "http://s.org/"),
          SourceId::parse("http://s.org/"), 1700000000);
  a.insert(Triple(ex("a"), ex("p"), Literal("x\ny", "en")), SourceId::local(), 1700000100);
  a.save(dir);
  Store b;
  b.load(dir);
  auto sa = a.snapshot(), sb = b.snapshot();
  EXPECT_EQ(sa.triples(), sb.triples());
  for (const auto& t : sa.triples()) EXPECT_EQ(sa.provenance(t), sb.provenance(t));

  Store c;
  c.load(dir / "missing");
  EXPECT_TRUE(c.snapshot().empty());
  std::filesystem::remove_all(dir);
}

TEST(Store, PersistToWritesAfterEveryCommit) {
  auto dir = temp_dir("persist");
  Store a;
  a.persist_to(dir);
  a.insert(Triple(ex("a"), ex("p"), Literal("1")), SourceId::local(), 5);
  Store b;
  b.load(dir);
  EXPECT_EQ(b.snapshot().size(), 1u);
  std::filesystem::remove_all(dir);
}

TEST(Store, ReadersNeverSeePartialMerges) {
  Store store;
  std::atomic<bool> done{false};
  std::atomic<int> bad{0};
  std::thread reader([&] {
    while (!done) {
      auto n = store.snapshot().size();
      if (n % 10 != 0) ++bad;
    }
  });
  for (int batch = 0; batch < 50; ++batch) {
    std::string text;
    for (int i = 0; i < 10; ++i) {
      text += "<http://ex.org/s" + std::to_string(batch) + "> <http://ex.org/p> \"" + std::to_string(i) + "\" .\n";
    }
    store.merge(parse_triples(text, "x"), SourceId::local(), 0, MergeMode::kAccumulate);
  }
  done = true;
  reader.join();
  EXPECT_EQ(bad, 0);
  EXPECT_EQ(store.snapshot().size(), 500u);
}

TEST(Store, StatsAndTimestamps) {
  Store store;
  store.insert(Triple(ex("a"), ex("p"), Literal("1")), SourceId::parse("http://s.org/"), parse_utc("2024-05-01T12:00:00Z"));
  store.insert(Triple(ex("b"), ex("q"), Literal("1")), SourceId::local(), 0);
  auto st = store.snapshot().stats();
  EXPECT_EQ(st.triples, 2u);
  EXPECT_EQ(st.subjects, 2u);
  EXPECT_EQ(st.predicates, 2u);
  ASSERT_EQ(st.sources.size(), 2u);
  EXPECT_EQ(format_utc(parse_utc("2024-05-01T12:00:00Z")), "2024-05-01T12:00:00Z");
}

}  // namespace
}  // namespace cris
