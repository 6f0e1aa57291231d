#pragma once

#include <optional>
#include <string>

namespace citytypo {

struct FetchedPage {
    std::string content;
    std::string url;
    std::string fetched_at;  // informational; excluded from content hashes
    bool from_cache = false;
};

// One cache file per city_id: a small key/value header, a "---" separator,
// then the raw page bytes verbatim.
class PageCache {
public:
    explicit PageCache(std::string dir) : dir_(std::move(dir)) {}

    std::string path_for(const std::string& city_id) const;
    std::optional<FetchedPage> get(const std::string& city_id) const;
    void put(const std::string& city_id, const std::string& url, const std::string& content,
             const std::string& fetched_at) const;

private:
    std::string dir_;
};

// Fetch through the cache. Cache hits are served without touching the
// network; misses go to the URL (http(s)://, or file:// for recorded
// fixtures) and populate the cache on success only. Network trouble raises a
// retriable FetchError; HTTP 404 and missing files are permanent errors.
// offline=true forbids any fetch, so a cache miss is a retriable error.
FetchedPage fetch_page(const std::string& url, const PageCache& cache,
                       const std::string& city_id, bool offline = false);

}  // namespace citytypo
