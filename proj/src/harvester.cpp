#include "cris/harvester.hpp"

#include <algorithm>
#include <condition_variable>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "cris/serde.hpp"

namespace cris {

namespace {

using SteadyTime = std::chrono::steady_clock::time_point;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct Url {
  std::string scheme;
  std::string host;  // lowercase, without brackets
  int port = 0;
  std::string target;  // path + query, never empty

  std::string host_key() const { return host + ":" + std::to_string(port); }
  std::string origin() const {
    std::string h = host.find(':') != std::string::npos ? "[" + host + "]" : host;
    return scheme + "://" + h + ":" + std::to_string(port);
  }
};

std::optional<Url> parse_url(std::string_view text) {
  Url url;
  auto sep = text.find("://");
  if (sep == std::string_view::npos) return std::nullopt;
  url.scheme = lower(text.substr(0, sep));
  if (url.scheme != "http" && url.scheme != "https") return std::nullopt;
  std::string_view rest = text.substr(sep + 3);
  auto end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, end);
  rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);

  std::string_view port;
  if (!authority.empty() && authority.front() == '[') {
    auto close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    url.host = lower(authority.substr(1, close - 1));
    if (close + 1 < authority.size() && authority[close + 1] == ':') port = authority.substr(close + 2);
  } else {
    auto colon = authority.rfind(':');
    url.host = lower(authority.substr(0, colon));
    if (colon != std::string_view::npos) port = authority.substr(colon + 1);
  }
  if (url.host.empty()) return std::nullopt;
  if (port.empty()) {
    url.port = url.scheme == "https" ? 443 : 80;
  } else {
    try {
      url.port = std::stoi(std::string(port));
    } catch (const std::exception&) {
      return std::nullopt;
    }
    if (url.port <= 0 || url.port > 65535) return std::nullopt;
  }
  rest = rest.substr(0, rest.find('#'));
  url.target = rest.empty() || rest.front() != '/' ? "/" + std::string(rest) : std::string(rest);
  return url;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

struct FetchResult {
  int status = 0;
  std::string content_type;
  std::string body;
  std::string final_url;
  std::string error;  // non-empty on transport failure
};

struct HostState {
  bool busy = false;
  SteadyTime next_allowed{};
  std::optional<RobotsRules> robots;
};

struct WorkItem {
  std::string url;
  std::size_t depth;
  std::string kind;
};

struct NumberedRecord {
  std::size_t seq;
  CrawlRecord record;
};

class Crawler {
 public:
  Crawler(const CrawlConfig& config, Store& store) : config_(config), store_(store) {
    for (const auto& h : config_.host_allowlist) allowed_hosts_.insert(lower(h));
    if (allowed_hosts_.empty()) {
      for (const auto& seed : config_.seeds) allowed_hosts_.insert(parse_url(seed.str())->host);
    }
  }

  CrawlReport run() {
    CrawlReport report;
    report.started_at = config_.clock();
    for (const auto& seed : config_.seeds) {
      std::string url = strip_fragment(seed.str());
      if (seen_.insert(url).second) pending_.push_back({url, 0, "page"});
    }
    for (std::size_t depth = 0; !pending_.empty(); ++depth) {
      taken_.assign(pending_.size(), false);
      run_level();
      pending_ = std::move(next_level_);
      next_level_.clear();
    }

    std::sort(records_.begin(), records_.end(), [](const NumberedRecord& a, const NumberedRecord& b) {
      if (a.record.depth != b.record.depth) return a.record.depth < b.record.depth;
      return a.seq < b.seq;
    });
    for (auto& r : records_) {
      switch (r.record.outcome) {
        case FetchOutcome::kFetched: ++report.fetched; break;
        case FetchOutcome::kSkipped: ++report.skipped; break;
        case FetchOutcome::kFailed: ++report.failed; break;
      }
      report.triples_added += r.record.triples_added;
      report.records.push_back(std::move(r.record));
    }
    report.finished_at = config_.clock();
    return report;
  }

 private:
  void run_level() {
    std::size_t workers = std::max<std::size_t>(1, std::min(config_.fetch_parallelism, pending_.size()));
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i + 1 < workers; ++i) threads.emplace_back([this] { work(); });
    work();
    for (auto& t : threads) t.join();
  }

  void work() {
    std::unique_lock lock(mutex_);
    for (;;) {
      auto now = std::chrono::steady_clock::now();
      std::optional<std::size_t> pick;
      std::optional<SteadyTime> wake;
      bool remaining = false;
      for (std::size_t i = 0; i < pending_.size(); ++i) {
        if (taken_[i]) continue;
        remaining = true;
        HostState& host = hosts_[parse_url(pending_[i].url)->host_key()];
        if (host.busy) continue;
        if (host.next_allowed > now) {
          if (!wake || host.next_allowed < *wake) wake = host.next_allowed;
          continue;
        }
        pick = i;
        break;
      }
      if (!remaining && in_flight_ == 0) {
        cv_.notify_all();
        return;
      }
      if (!pick) {
        if (wake) {
          cv_.wait_until(lock, *wake);
        } else {
          cv_.wait(lock);
        }
        continue;
      }
      taken_[*pick] = true;
      WorkItem item = pending_[*pick];
      Url url = *parse_url(item.url);
      hosts_[url.host_key()].busy = true;
      ++in_flight_;
      lock.unlock();

      process(item, url);

      lock.lock();
      hosts_[url.host_key()].busy = false;
      --in_flight_;
      cv_.notify_all();
    }
  }

  void add_record(CrawlRecord record) {
    std::lock_guard guard(mutex_);
    records_.push_back({seq_++, std::move(record)});
  }

  // Waits out the politeness delay; the caller holds the host.
  void wait_for_host(const std::string& key) {
    SteadyTime at;
    {
      std::lock_guard guard(mutex_);
      at = hosts_[key].next_allowed;
    }
    std::this_thread::sleep_until(at);
  }

  void finished_request(const std::string& key) {
    std::lock_guard guard(mutex_);
    hosts_[key].next_allowed = std::chrono::steady_clock::now() + config_.per_host_delay;
  }

  FetchResult request(const Url& url) {
    wait_for_host(url.host_key());
    FetchResult out;
    httplib::Client client(url.origin());
    auto secs = [](std::chrono::milliseconds ms) { return std::make_pair(ms.count() / 1000, (ms.count() % 1000) * 1000); };
    auto [s, us] = secs(config_.timeout);
    client.set_connection_timeout(s, us);
    client.set_read_timeout(s, us);
    client.set_write_timeout(s, us);
    client.set_follow_location(false);
    httplib::Headers headers{{"User-Agent", config_.user_agent}};

    bool oversize = false;
    auto result = client.Get(
        url.target, headers,
        [&](const httplib::Response& response) {
          if (response.has_header("Content-Length")) {
            auto length = std::strtoull(response.get_header_value("Content-Length").c_str(), nullptr, 10);
            if (length > config_.max_body_bytes) {
              oversize = true;
              return false;
            }
          }
          return true;
        },
        [&](const char* data, std::size_t len) {
          if (out.body.size() + len > config_.max_body_bytes) {
            oversize = true;
            return false;
          }
          out.body.append(data, len);
          return true;
        });
    finished_request(url.host_key());

    if (oversize) {
      out.error = "response exceeds " + std::to_string(config_.max_body_bytes) + " bytes";
    } else if (!result) {
      out.error = "transport error: " + httplib::to_string(result.error());
    } else {
      out.status = result->status;
      out.content_type = lower(result->get_header_value("Content-Type"));
      if (result->has_header("Location")) out.final_url = result->get_header_value("Location");
    }
    return out;
  }

  bool robots_allow(const Url& url) {
    if (!config_.respect_robots) return true;
    {
      std::lock_guard guard(mutex_);
      if (auto& r = hosts_[url.host_key()].robots) return r->allowed(url.target);
    }
    Url robots_url = url;
    robots_url.target = "/robots.txt";
    FetchResult res = request(robots_url);
    RobotsRules rules = res.error.empty() && res.status == 200 ? RobotsRules::parse(res.body, config_.user_agent)
                                                               : RobotsRules::parse("", config_.user_agent);
    std::lock_guard guard(mutex_);
    auto& slot = hosts_[url.host_key()].robots;
    slot = std::move(rules);
    return slot->allowed(url.target);
  }

  // Follows same-host redirects up to the configured limit.
  FetchResult fetch(const Url& start, const std::string& start_text) {
    Url url = start;
    std::string current = start_text;
    for (std::size_t hop = 0;; ++hop) {
      FetchResult res = request(url);
      if (!res.error.empty() || res.status < 300 || res.status >= 400 || res.final_url.empty()) {
        res.final_url = current;
        return res;
      }
      if (hop == config_.max_redirects) {
        res.error = "too many redirects";
        return res;
      }
      auto resolved = resolve_reference(current, res.final_url);
      auto next = resolved ? parse_url(*resolved) : std::nullopt;
      if (!next || next->host_key() != url.host_key()) {
        res.error = "redirect to another host or unsupported URL: " + res.final_url;
        return res;
      }
      url = *next;
      current = strip_fragment(*resolved);
    }
  }

  void process(const WorkItem& item, const Url& url) {
    CrawlRecord rec;
    rec.url = item.url;
    rec.depth = item.depth;
    rec.kind = item.kind;

    if (!robots_allow(url)) {
      rec.reason = "disallowed by robots.txt";
      add_record(std::move(rec));
      return;
    }
    {
      std::lock_guard guard(mutex_);
      if (attempts_ >= config_.max_pages) {
        rec.reason = "max_pages reached";
        records_.push_back({seq_++, std::move(rec)});
        return;
      }
      ++attempts_;
    }

    auto started = std::chrono::steady_clock::now();
    FetchResult res = fetch(url, item.url);
    rec.http_status = res.status;
    auto elapsed = [&] {
      return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    };
    if (!res.error.empty() || res.status < 200 || res.status >= 300) {
      rec.outcome = FetchOutcome::kFailed;
      rec.reason = res.error.empty() ? "HTTP status " + std::to_string(res.status) : res.error;
      rec.duration = elapsed();
      add_record(std::move(rec));
      return;
    }

    std::string media = res.content_type.substr(0, res.content_type.find(';'));
    while (!media.empty() && media.back() == ' ') media.pop_back();
    const bool html = media == "text/html" || media == "application/xhtml+xml";
    const bool triples = media == kTriplesMediaType || media == "application/n-triples" ||
                         ends_with(url.target.substr(0, url.target.find('?')), ".nt");
    SourceId source = SourceId::from(make_iri(res.final_url));

    if (triples && !html) {
      ParseOutcome parsed = parse_triples(res.body, res.final_url);
      rec.parse_errors = parsed.errors.size();
      rec.triples_added = store_.merge(parsed, source, config_.clock(), config_.merge_mode).added;
      rec.outcome = FetchOutcome::kFetched;
      rec.duration = elapsed();
      add_record(std::move(rec));
      return;
    }
    if (!html) {
      rec.outcome = FetchOutcome::kSkipped;
      rec.reason = "unsupported content type '" + media + "'";
      rec.duration = elapsed();
      add_record(std::move(rec));
      return;
    }

    AnnotationExtract extract = extract_annotations(res.body, make_iri(res.final_url));
    rec.dropped_links = extract.dropped;
    ParseOutcome combined;
    combined.blank_scope = res.final_url;
    for (const auto& block : extract.inline_blocks) {
      ParseOutcome part = parse_triples(block.text, res.final_url);
      combined.triples.insert(combined.triples.end(), part.triples.begin(), part.triples.end());
      combined.errors.insert(combined.errors.end(), part.errors.begin(), part.errors.end());
    }
    rec.parse_errors = combined.errors.size();
    // Merged even when empty so that replace-source clears annotations removed from the page.
    rec.triples_added = store_.merge(combined, source, config_.clock(), config_.merge_mode).added;
    rec.outcome = FetchOutcome::kFetched;
    rec.duration = elapsed();

    std::lock_guard guard(mutex_);
    seen_.insert(res.final_url);
    for (const auto& ref : extract.linked_refs) {
      discover(ref.str(), item.depth, "annotation", pending_, rec);
    }
    for (const auto& link : extract.outbound_links) {
      discover(link.str(), item.depth + 1, "page", next_level_, rec);
    }
    records_.push_back({seq_++, std::move(rec)});
    taken_.resize(pending_.size(), false);
    cv_.notify_all();
  }

  // Called with mutex_ held.
  void discover(const std::string& raw, std::size_t depth, const std::string& kind, std::vector<WorkItem>& queue,
                CrawlRecord& parent) {
    std::string url = strip_fragment(raw);
    auto parsed = parse_url(url);
    if (!parsed) return;  // non-web link (mailto:, ftp:, ...)
    if (seen_.contains(url)) return;
    if (depth > config_.max_depth) {
      parent.unfollowed_links.push_back(url);
      return;
    }
    seen_.insert(url);
    if (!allowed_hosts_.contains(parsed->host)) {
      CrawlRecord skipped;
      skipped.url = url;
      skipped.depth = depth;
      skipped.kind = kind;
      skipped.reason = "host not in allowlist";
      records_.push_back({seq_++, std::move(skipped)});
      return;
    }
    queue.push_back({url, depth, kind});
  }

  const CrawlConfig& config_;
  Store& store_;
  std::set<std::string> allowed_hosts_;

  std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<WorkItem> pending_;
  std::vector<bool> taken_;
  std::vector<WorkItem> next_level_;
  std::set<std::string> seen_;
  std::map<std::string, HostState> hosts_;
  std::vector<NumberedRecord> records_;
  std::size_t seq_ = 0;
  std::size_t attempts_ = 0;
  std::size_t in_flight_ = 0;
};

}  // namespace

void check_config(const CrawlConfig& config) {
  if (config.seeds.empty()) throw ConfigError("at least one seed is required");
  if (config.max_pages == 0) throw ConfigError("max_pages must be positive");
  if (config.fetch_parallelism == 0) throw ConfigError("fetch_parallelism must be positive");
  if (config.timeout.count() <= 0) throw ConfigError("timeout must be positive");
  if (config.per_host_delay.count() < 0) throw ConfigError("per_host_delay must not be negative");
  std::set<std::string> allowed;
  for (const auto& h : config.host_allowlist) allowed.insert(lower(h));
  for (const auto& seed : config.seeds) {
    auto url = parse_url(seed.str());
    if (!url) throw ConfigError("seed " + seed.str() + " is not an http(s) URL");
    if (!allowed.empty() && !allowed.contains(url->host)) {
      throw ConfigError("seed host " + url->host + " is not in the allowlist");
    }
  }
}

std::string_view to_string(FetchOutcome outcome) {
  switch (outcome) {
    case FetchOutcome::kFetched: return "fetched";
    case FetchOutcome::kSkipped: return "skipped";
    case FetchOutcome::kFailed: return "failed";
  }
  return "unknown";
}

CrawlReport crawl(const CrawlConfig& config, Store& store) {
  check_config(config);
  return Crawler(config, store).run();
}

std::string report_to_json_lines(const CrawlReport& report) {
  std::string out;
  for (const auto& r : report.records) {
    nlohmann::json j{{"url", r.url},
                     {"depth", r.depth},
                     {"kind", r.kind},
                     {"outcome", to_string(r.outcome)},
                     {"status", r.http_status},
                     {"triples_added", r.triples_added},
                     {"parse_errors", r.parse_errors},
                     {"duration_ms", r.duration.count()}};
    if (!r.reason.empty()) j["reason"] = r.reason;
    if (!r.unfollowed_links.empty()) j["unfollowed_links"] = r.unfollowed_links;
    if (r.dropped_links > 0) j["dropped_links"] = r.dropped_links;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void export_store(const Store& store, const std::filesystem::path& dir) { store.save(dir); }

RobotsRules RobotsRules::parse(std::string_view text, std::string_view user_agent) {
  // Groups: consecutive User-agent lines followed by rules.
  std::string agent = lower(user_agent.substr(0, user_agent.find('/')));
  std::vector<std::pair<std::string, bool>> star, specific;
  std::vector<std::string> group_agents;
  bool in_rules = false;
  bool seen_specific = false;

  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    start = end + 1;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = lower(line.substr(0, colon));
    std::string value = line.substr(colon + 1);
    auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
    };
    trim(key);
    trim(value);
    if (key == "user-agent") {
      if (in_rules) group_agents.clear();
      in_rules = false;
      group_agents.push_back(lower(value));
      continue;
    }
    if (key != "disallow" && key != "allow") continue;
    in_rules = true;
    if (key == "disallow" && value.empty()) continue;
    bool allow = key == "allow";
    for (const auto& a : group_agents) {
      if (a == "*") star.emplace_back(value, allow);
      if (!agent.empty() && a == agent) {
        specific.emplace_back(value, allow);
        seen_specific = true;
      }
    }
  }
  RobotsRules rules;
  rules.rules_ = seen_specific ? specific : star;
  return rules;
}

bool RobotsRules::allowed(std::string_view path) const {
  std::size_t best = 0;
  bool allow = true;
  for (const auto& [prefix, is_allow] : rules_) {
    if (path.substr(0, prefix.size()) != prefix) continue;
    if (prefix.size() > best || (prefix.size() == best && is_allow)) {
      best = prefix.size();
      allow = is_allow;
    }
  }
  return allow;
}

}  // namespace cris
