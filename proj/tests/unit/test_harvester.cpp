#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "../support/fixture_server.hpp"
#include "cris/error.hpp"
#include "cris/harvester.hpp"
#include "cris/serde.hpp"

namespace cris {
namespace {

using testing::FixtureServer;
using namespace std::chrono_literals;

std::set<Triple> expected_site_triples() {
  std::ifstream in(CRIS_FIXTURE_DIR "/site/expected.nt");
  std::ostringstream ss;
  ss << in.rdbuf();
  auto parsed = parse_triples(ss.str(), "expected");
  EXPECT_TRUE(parsed.errors.empty());
  return {parsed.triples.begin(), parsed.triples.end()};
}

CrawlConfig config_for(const FixtureServer& server, const std::string& seed) {
  CrawlConfig c;
  c.seeds = {make_iri(server.url(seed))};
  c.per_host_delay = 0ms;
  c.timeout = 2000ms;
  return c;
}

std::set<std::string> urls_with(const CrawlReport& report, FetchOutcome outcome) {
  std::set<std::string> out;
  for (const auto& r : report.records) {
    if (r.outcome == outcome) out.insert(r.url);
  }
  return out;
}

class SiteCrawl : public ::testing::Test {
 protected:
  SiteCrawl() { server_.add_directory(CRIS_FIXTURE_DIR "/site"); }
  std::string u(const std::string& path) const { return server_.url(path); }
  FixtureServer server_;
};

TEST_F(SiteCrawl, HarvestsReachablePagesAndLinkedAnnotations) {
  Store store;
  auto report = crawl(config_for(server_, "/a.html"), store);
  EXPECT_EQ(urls_with(report, FetchOutcome::kFetched),
            (std::set<std::string>{u("/a.html"), u("/b.html"), u("/c.html"), u("/d.html"), u("/d-meta.nt")}));
  EXPECT_EQ(urls_with(report, FetchOutcome::kSkipped),
            (std::set<std::string>{u("/private/notes.html"), "http://offsite.example/partners.html"}));
  EXPECT_TRUE(urls_with(report, FetchOutcome::kFailed).empty());
  EXPECT_EQ(store.snapshot().triples(), expected_site_triples());
  EXPECT_EQ(report.triples_added, expected_site_triples().size());

  for (const auto& r : report.records) {
    EXPECT_LE(r.depth, 2u);
    if (r.url == u("/d-meta.nt")) {
      EXPECT_EQ(r.kind, "annotation");
      EXPECT_EQ(r.depth, 2u);
    }
    if (r.url == u("/a.html")) EXPECT_EQ(r.depth, 0u);
  }
  auto prov = store.snapshot().provenance(parse_triple_line(
      "<http://cris.example.org/topics/semantic-web> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> "
      "<http://derpi.tuwien.ac.at/~andrei/cerif.rdfs#ResearchTopic> ."));
  ASSERT_EQ(prov.size(), 1u);
  EXPECT_EQ(prov[0].source.str(), u("/d-meta.nt"));

  auto lines = report_to_json_lines(report);
  std::istringstream in(lines);
  std::size_t count = 0;
  for (std::string line; std::getline(in, line); ++count) {
    auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("url") && j.contains("outcome") && j.contains("depth"));
  }
  EXPECT_EQ(count, report.records.size());
}

TEST_F(SiteCrawl, SecondReplaceCrawlLeavesStoreUnchanged) {
  Store store;
  crawl(config_for(server_, "/a.html"), store);
  auto before = store.snapshot();
  auto report = crawl(config_for(server_, "/a.html"), store);
  EXPECT_EQ(report.triples_added, 0u);
  auto after = store.snapshot();
  EXPECT_EQ(before.triples(), after.triples());
  for (const auto& t : before.triples()) {
    ASSERT_EQ(before.provenance(t).size(), after.provenance(t).size());
  }
}

TEST_F(SiteCrawl, DepthLimitRecordsUnfollowedLinks) {
  Store store;
  auto config = config_for(server_, "/a.html");
  config.max_depth = 1;
  auto report = crawl(config, store);
  EXPECT_EQ(urls_with(report, FetchOutcome::kFetched), (std::set<std::string>{u("/a.html"), u("/b.html"), u("/c.html")}));
  bool found = false;
  for (const auto& r : report.records) {
    if (r.url == u("/b.html")) {
      EXPECT_EQ(r.unfollowed_links, std::vector<std::string>{u("/d.html")});
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST_F(SiteCrawl, MaxPagesCapsFetches) {
  Store store;
  auto config = config_for(server_, "/a.html");
  config.max_pages = 2;
  auto report = crawl(config, store);
  EXPECT_EQ(report.fetched, 2u);
}

TEST_F(SiteCrawl, RobotsCanBeIgnored) {
  Store store;
  auto config = config_for(server_, "/a.html");
  config.respect_robots = false;
  auto report = crawl(config, store);
  EXPECT_TRUE(urls_with(report, FetchOutcome::kFetched).contains(u("/private/notes.html")));
}

TEST(Harvester, PolitenessDelayBetweenRequestsToOneHost) {
  FixtureServer server;
  server.add("/1.html", "<a href=\"2.html\">x</a><a href=\"3.html\">y</a>");
  server.add("/2.html", "<p>2</p>");
  server.add("/3.html", "<p>3</p>");
  auto config = config_for(server, "/1.html");
  config.per_host_delay = 150ms;
  config.fetch_parallelism = 4;
  Store store;
  auto report = crawl(config, store);
  EXPECT_EQ(report.fetched, 3u);
  auto log = server.log();
  ASSERT_EQ(log.size(), 4u);  // robots.txt + 3 pages
  for (std::size_t i = 1; i < log.size(); ++i) {
    EXPECT_GE(log[i].received - log[i - 1].completed, 150ms) << log[i].path;
  }
}

TEST(Harvester, ParallelFetchesAcrossHosts) {
  FixtureServer server;
  FixtureServer::Document slow;
  slow.body = "<p>slow</p>";
  slow.delay = 300ms;
  server.add("/s1.html", slow);
  server.add("/s2.html", slow);
  std::string seed = "<a href=\"" + server.url("/s1.html", "127.0.0.1") + "\">a</a><a href=\"" +
                     server.url("/s2.html", "localhost") + "\">b</a>";
  server.add("/seed.html", seed);
  server.add("/robots.txt", "", "text/plain");
  auto config = config_for(server, "/seed.html");
  config.host_allowlist = {"127.0.0.1", "localhost"};
  config.fetch_parallelism = 2;
  config.respect_robots = false;
  Store store;
  auto started = std::chrono::steady_clock::now();
  auto report = crawl(config, store);
  auto elapsed = std::chrono::steady_clock::now() - started;
  EXPECT_EQ(report.fetched, 3u) << report_to_json_lines(report);
  EXPECT_LT(elapsed, 550ms);
}

TEST(Harvester, RedirectsAndFailures) {
  FixtureServer server;
  server.add("/start.html",
             "<a href=\"moved.html\">1</a><a href=\"loop.html\">2</a><a href=\"missing.html\">3</a>"
             "<a href=\"away.html\">4</a><a href=\"big.html\">5</a><a href=\"image.png\">6</a>");
  server.add_redirect("/moved.html", "/final.html");
  server.add("/final.html",
             "<script type=\"text/x-cris-triples\">_:n <http://ex.org/p> \"v\" .</script>");
  server.add_redirect("/loop.html", "/loop.html");
  server.add_redirect("/away.html", "http://elsewhere.example/");
  server.add("/big.html", std::string(4096, 'x'));
  server.add("/image.png", "PNG", "image/png");
  auto config = config_for(server, "/start.html");
  config.max_body_bytes = 1024;
  config.respect_robots = false;
  Store store;
  auto report = crawl(config, store);
  std::map<std::string, CrawlRecord> by_url;
  for (const auto& r : report.records) by_url[r.url] = r;
  EXPECT_EQ(by_url[server.url("/moved.html")].outcome, FetchOutcome::kFetched);
  EXPECT_EQ(by_url[server.url("/loop.html")].reason, "too many redirects");
  EXPECT_EQ(by_url[server.url("/missing.html")].http_status, 404);
  EXPECT_EQ(by_url[server.url("/missing.html")].outcome, FetchOutcome::kFailed);
  EXPECT_EQ(by_url[server.url("/away.html")].outcome, FetchOutcome::kFailed);
  EXPECT_EQ(by_url[server.url("/big.html")].outcome, FetchOutcome::kFailed);
  EXPECT_EQ(by_url[server.url("/image.png")].outcome, FetchOutcome::kSkipped);

  auto snap = store.snapshot();
  ASSERT_EQ(snap.size(), 1u);
  const Triple& t = *snap.triples().begin();
  EXPECT_EQ(snap.provenance(t)[0].source.str(), server.url("/final.html"));
  EXPECT_EQ(t.subject().value(), scoped_blank_label("n", server.url("/final.html")));
}

TEST(Harvester, ReplaceSourceForgetsRemovedAnnotations) {
  FixtureServer server;
  auto page = [](const std::string& triples) {
    return "<html><head><script type=\"text/x-cris-triples\">" + triples + "</script></head></html>";
  };
  const std::string t1 = "<http://ex.org/a> <http://ex.org/p> \"1\" .\n";
  const std::string t2 = "<http://ex.org/b> <http://ex.org/p> \"2\" .\n";
  server.add("/p.html", page(t1 + t2));
  auto config = config_for(server, "/p.html");
  config.respect_robots = false;
  Store replace, accumulate;
  crawl(config, replace);
  auto acc = config;
  acc.merge_mode = MergeMode::kAccumulate;
  crawl(acc, accumulate);

  server.add("/p.html", page(t1));
  crawl(config, replace);
  crawl(acc, accumulate);
  EXPECT_EQ(replace.snapshot().size(), 1u);
  EXPECT_EQ(accumulate.snapshot().size(), 2u);

  server.add("/p.html", "<html><head></head></html>");
  crawl(config, replace);
  EXPECT_EQ(replace.snapshot().size(), 0u);
}

TEST(Harvester, ConfigErrors) {
  CrawlConfig c;
  EXPECT_THROW(check_config(c), ConfigError);
  c.seeds = {make_iri("ftp://ex.org/")};
  EXPECT_THROW(check_config(c), ConfigError);
  c.seeds = {make_iri("http://ex.org/")};
  c.host_allowlist = {"other.org"};
  EXPECT_THROW(check_config(c), ConfigError);
  c.host_allowlist = {"EX.org"};
  EXPECT_NO_THROW(check_config(c));
  c.max_pages = 0;
  EXPECT_THROW(check_config(c), ConfigError);
}

TEST(Robots, LongestMatchWinsAndAgentGroupsApply) {
  auto rules = RobotsRules::parse(
      "User-agent: *\nDisallow: /\n\nUser-agent: cris-harvester\nDisallow: /private/\nAllow: /private/public/\n",
      "cris-harvester/1.0");
  EXPECT_TRUE(rules.allowed("/index.html"));
  EXPECT_FALSE(rules.allowed("/private/x.html"));
  EXPECT_TRUE(rules.allowed("/private/public/y.html"));
  auto other = RobotsRules::parse("User-agent: *\nDisallow: /\n", "cris-harvester/1.0");
  EXPECT_FALSE(other.allowed("/a"));
  EXPECT_TRUE(RobotsRules::parse("", "x").allowed("/a"));
  EXPECT_TRUE(RobotsRules::parse("User-agent: *\nDisallow:\n", "x").allowed("/a"));
}

}  // namespace
}  // namespace cris
