#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cris/model.hpp"
#include "cris/store.hpp"

namespace cris {

struct CrawlConfig {
  std::vector<Iri> seeds;
  /// Hostnames (without port). Empty means the seeds' hosts.
  std::vector<std::string> host_allowlist;
  std::size_t max_depth = 2;
  std::size_t max_pages = 100;
  std::chrono::milliseconds per_host_delay{1000};
  std::size_t fetch_parallelism = 1;
  std::chrono::milliseconds timeout{10000};
  std::size_t max_body_bytes = 2 * 1024 * 1024;
  std::size_t max_redirects = 5;
  bool respect_robots = true;
  MergeMode merge_mode = MergeMode::kReplaceSource;
  std::string user_agent = "cris-harvester/1.0";
  /// Fetch timestamps recorded as provenance.
  std::function<Timestamp()> clock = now_utc;
};

/// Throws ConfigError.
void check_config(const CrawlConfig& config);

enum class FetchOutcome { kFetched, kSkipped, kFailed };

std::string_view to_string(FetchOutcome outcome);

struct CrawlRecord {
  std::string url;
  std::size_t depth = 0;
  FetchOutcome outcome = FetchOutcome::kSkipped;
  /// "page" for link-graph documents, "annotation" for cris-meta references.
  std::string kind = "page";
  int http_status = 0;
  std::size_t triples_added = 0;
  std::size_t parse_errors = 0;
  std::chrono::milliseconds duration{0};
  std::string reason;
  /// Links found on the page but beyond max_depth.
  std::vector<std::string> unfollowed_links;
  /// Links that could not be resolved to absolute IRIs.
  std::size_t dropped_links = 0;
};

struct CrawlReport {
  std::vector<CrawlRecord> records;  // ordered by depth, then discovery
  std::size_t fetched = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  std::size_t triples_added = 0;
  Timestamp started_at = 0;
  Timestamp finished_at = 0;
};

/// Breadth-first harvest from the seeds: embedded blocks and linked
/// annotation files are merged into the store with the document URL as
/// source. Fetch failures are recorded, never thrown.
CrawlReport crawl(const CrawlConfig& config, Store& store);

/// One JSON object per line per record.
std::string report_to_json_lines(const CrawlReport& report);

/// Writes the store's canonical triple file and provenance sidecar into dir.
void export_store(const Store& store, const std::filesystem::path& dir);

/// Disallow/Allow rules that apply to one user agent.
class RobotsRules {
 public:
  static RobotsRules parse(std::string_view robots_txt, std::string_view user_agent);
  bool allowed(std::string_view path) const;

 private:
  std::vector<std::pair<std::string, bool>> rules_;  // (prefix, allow)
};

}  // namespace cris
