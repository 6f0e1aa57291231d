#include "citytypo/page_cache.hpp"

#include <chrono>
#include <ctime>

#include <httplib.h>

#include "citytypo/errors.hpp"
#include "citytypo/util.hpp"

namespace citytypo {

namespace {

constexpr const char* kHeaderMagic = "# citytypo page cache v1";

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
}

struct UrlParts {
    std::string scheme;
    std::string host_port;  // scheme://host[:port] for httplib
    std::string path;
};

UrlParts parse_url(const std::string& url) {
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw FetchError("malformed URL (no scheme): " + url, /*retriable=*/false);
    }
    UrlParts parts;
    parts.scheme = to_lower(url.substr(0, scheme_end));
    std::size_t host_start = scheme_end + 3;
    std::size_t path_start = url.find('/', host_start);
    if (path_start == std::string::npos) {
        parts.host_port = url;
        parts.path = "/";
    } else {
        parts.host_port = url.substr(0, path_start);
        parts.path = url.substr(path_start);
    }
    return parts;
}

std::string fetch_over_http(const std::string& url) {
    UrlParts parts = parse_url(url);
    httplib::Client client(parts.host_port);
    client.set_follow_location(true);
    client.set_connection_timeout(15, 0);
    client.set_read_timeout(60, 0);
    auto res = client.Get(parts.path);
    if (!res) {
        throw FetchError("network failure fetching " + url, /*retriable=*/true);
    }
    if (res->status == 404) {
        throw FetchError("page missing (HTTP 404): " + url, /*retriable=*/false);
    }
    if (res->status >= 500) {
        throw FetchError("server error (HTTP " + std::to_string(res->status) + "): " + url,
                         /*retriable=*/true);
    }
    if (res->status != 200) {
        throw FetchError("unexpected HTTP " + std::to_string(res->status) + ": " + url,
                         /*retriable=*/false);
    }
    return res->body;
}

std::string fetch_local_file(const std::string& url) {
    std::string path = url.substr(7);  // strip file://
    if (!file_exists(path)) {
        throw FetchError("page missing (no such file): " + path, /*retriable=*/false);
    }
    return read_file(path);
}

}  // namespace

std::string PageCache::path_for(const std::string& city_id) const {
    return dir_ + "/" + sanitize_key(city_id) + ".page";
}

std::optional<FetchedPage> PageCache::get(const std::string& city_id) const {
    std::string path = path_for(city_id);
    if (!file_exists(path)) return std::nullopt;
    std::string data = read_file(path);

    FetchedPage page;
    page.from_cache = true;
    std::size_t pos = 0;
    bool in_header = true;
    while (in_header && pos < data.size()) {
        std::size_t eol = data.find('\n', pos);
        if (eol == std::string::npos) break;
        std::string line = data.substr(pos, eol - pos);
        pos = eol + 1;
        if (line == "---") {
            in_header = false;
        } else if (line.rfind("url: ", 0) == 0) {
            page.url = line.substr(5);
        } else if (line.rfind("fetched_at: ", 0) == 0) {
            page.fetched_at = line.substr(12);
        } else if (line != kHeaderMagic && !line.empty()) {
            throw DataError("unrecognized page cache header line in " + path);
        }
    }
    if (in_header) throw DataError("page cache file missing separator: " + path);
    page.content = data.substr(pos);
    return page;
}

void PageCache::put(const std::string& city_id, const std::string& url,
                    const std::string& content, const std::string& fetched_at) const {
    std::string out;
    out.reserve(content.size() + 128);
    out += kHeaderMagic;
    out += "\nurl: " + url;
    out += "\nfetched_at: " + fetched_at;
    out += "\n---\n";
    out += content;
    write_file(path_for(city_id), out);
}

FetchedPage fetch_page(const std::string& url, const PageCache& cache,
                       const std::string& city_id, bool offline) {
    if (auto cached = cache.get(city_id)) {
        return *cached;
    }
    if (offline) {
        throw FetchError("cache miss for '" + city_id + "' and fetching is disabled",
                         /*retriable=*/true);
    }
    FetchedPage page;
    page.url = url;
    page.from_cache = false;
    page.fetched_at = now_iso8601();
    if (url.rfind("file://", 0) == 0) {
        page.content = fetch_local_file(url);
    } else {
        page.content = fetch_over_http(url);
    }
    cache.put(city_id, url, page.content, page.fetched_at);
    return page;
}

}  // namespace citytypo
