#pragma once

#include "domscreen/feature_model.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace domscreen {

/// Feature name -> raw value. Absent means the provider does not know it.
using FieldMap = std::map<std::string, std::int64_t>;

struct EnrichmentResult {
    std::string domain;
    FieldMap fields;
    std::string provider;
    std::chrono::system_clock::time_point fetched_at;
};

/// Name plus extension, letters/digits/hyphens per label, no leading or trailing hyphen.
bool is_valid_domain(std::string_view domain);

/// Throws ParseError when a field is unknown or outside its DomainRecord range.
void check_fields(const FieldMap& fields, int current_year);

/// Upper bound on concurrent fetches per provider instance.
inline constexpr std::ptrdiff_t kMaxInFlight = 4;

class Provider {
public:
    virtual ~Provider() = default;

    virtual std::string name() const = 0;

    /// Validates the domain, bounds concurrency, then delegates to do_fetch.
    /// Throws ValidationError for a malformed domain, RetryableError for transient upstream failures and
    /// ParseError for malformed payloads. An unknown domain yields an empty field map.
    EnrichmentResult fetch(std::string_view domain);

    /// Number of fetches currently running; never exceeds kMaxInFlight.
    int in_flight() const { return in_flight_.load(); }
    int peak_in_flight() const { return peak_in_flight_.load(); }

protected:
    virtual EnrichmentResult do_fetch(const std::string& domain) = 0;

private:
    std::counting_semaphore<kMaxInFlight> slots_{kMaxInFlight};
    std::atomic<int> in_flight_{0};
    std::atomic<int> peak_in_flight_{0};
};

/// Reads `<root>/<provider>/<domain>.json`, a flat JSON object of feature name -> integer.
class FixtureProvider : public Provider {
public:
    FixtureProvider(std::filesystem::path root, std::string provider_name);

    std::string name() const override { return name_; }

protected:
    EnrichmentResult do_fetch(const std::string& domain) override;

private:
    std::filesystem::path root_;
    std::string name_;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Minimal GET transport. Implementations throw RetryableError on connection failures and timeouts.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse get(const std::string& url) = 0;
};

/// Live transport over cpp-httplib (HTTPS via OpenSSL).
class HttplibTransport : public HttpTransport {
public:
    explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds(20));
    HttpResponse get(const std::string& url) override;

private:
    std::chrono::seconds timeout_;
};

struct CdxSummary {
    std::int64_t rows = 0;
    /// Earliest YYYYMMDDhhmmss timestamp among the rows.
    std::optional<std::string> earliest;
};

/// Parses a CDX `output=json` payload: an array of arrays whose first row holds the column names.
/// Throws ParseError (with byte offset for JSON syntax errors) on anything else.
CdxSummary parse_cdx_payload(std::string_view body);

struct WaybackStats {
    std::int64_t acr = 0;
    std::optional<int> dob;
};

struct WaybackOptions {
    std::string endpoint = "https://web.archive.org/cdx/search/cdx";
    int max_attempts = 3;
    std::chrono::milliseconds backoff{500};
    std::chrono::milliseconds min_spacing{250};
    /// Replaced in tests so retries and spacing do not block.
    std::function<void(std::chrono::milliseconds)> sleep;
};

/// Wayback Machine CDX client supplying acr (snapshot count) and dob (first capture year).
class WaybackCdxProvider : public Provider {
public:
    explicit WaybackCdxProvider(std::shared_ptr<HttpTransport> transport, WaybackOptions options = {});

    std::string name() const override { return "wayback"; }

    WaybackStats query(const std::string& domain);

    /// Request URLs, in the order query() issues them.
    std::string first_capture_url(const std::string& domain) const;
    std::string page_count_url(const std::string& domain) const;
    std::string page_url(const std::string& domain, std::int64_t page) const;

protected:
    EnrichmentResult do_fetch(const std::string& domain) override;

private:
    std::string get_with_retry(const std::string& url);
    void sleep_for(std::chrono::milliseconds d);

    std::shared_ptr<HttpTransport> transport_;
    WaybackOptions options_;
    std::mutex spacing_mutex_;
    std::optional<std::chrono::steady_clock::time_point> last_request_;
};

/// On-disk cache keyed by provider and domain: `<dir>/<provider>/<domain>.json`.
class CachingProvider : public Provider {
public:
    CachingProvider(std::shared_ptr<Provider> inner, std::filesystem::path dir,
                    std::chrono::hours max_age = std::chrono::hours(24 * 30));

    std::string name() const override { return inner_->name(); }

protected:
    EnrichmentResult do_fetch(const std::string& domain) override;

private:
    std::shared_ptr<Provider> inner_;
    std::filesystem::path dir_;
    std::chrono::hours max_age_;
};

/// Fields merged in the given order; later providers overwrite earlier ones.
FieldMap merge_results(std::span<const EnrichmentResult> results);

/// Fetches from every provider in order and merges.
FieldMap enrich(std::span<const std::shared_ptr<Provider>> providers, std::string_view domain);

void apply_fields(DomainRecord& record, const FieldMap& fields);

std::string format_utc(std::chrono::system_clock::time_point t);
std::chrono::system_clock::time_point parse_utc(std::string_view text);

/// Builds providers by name: "wayback" is the live CDX client, any other name a fixture provider
/// rooted at fixture_root.
std::vector<std::shared_ptr<Provider>> make_providers(std::span<const std::string> names,
                                                      const std::filesystem::path& fixture_root,
                                                      std::shared_ptr<HttpTransport> transport = nullptr);

}  // namespace domscreen
