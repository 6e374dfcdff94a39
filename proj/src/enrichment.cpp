#include "domscreen/enrichment.hpp"

#include "domscreen/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace domscreen {

using nlohmann::json;

bool is_valid_domain(std::string_view domain) {
    if (domain.empty() || domain.size() > 253) return false;
    if (domain.find('.') == std::string_view::npos) return false;
    std::size_t start = 0;
    while (start <= domain.size()) {
        const auto dot = domain.find('.', start);
        const auto label = domain.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
        if (label.empty() || label.size() > 63 || label.front() == '-' || label.back() == '-') return false;
        for (const char c : label) {
            const auto u = static_cast<unsigned char>(c);
            if (!(std::isalnum(u) || c == '-' || u >= 0x80)) return false;
        }
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return true;
}

void check_fields(const FieldMap& fields, int current_year) {
    DomainRecord probe;
    probe.name = "x.com";
    probe.le = 1;
    for (const auto& [name, value] : fields) {
        FeatureKind kind{};
        try {
            kind = parse_feature_kind(name);
        } catch (const ConfigError&) {
            throw ParseError("unknown field '" + name + "'");
        }
        DomainRecord r = probe;
        if (kind == FeatureKind::le) continue;  // checked against the name when applied
        r.set(kind, value);
        const auto errors = validation_errors(r, current_year);
        if (!errors.empty()) throw ParseError("field " + errors.front());
    }
}

EnrichmentResult Provider::fetch(std::string_view domain) {
    if (!is_valid_domain(domain)) throw ValidationError("'" + std::string(domain) + "' is not a valid domain");
    slots_.acquire();
    const int now = ++in_flight_;
    int peak = peak_in_flight_.load();
    while (now > peak && !peak_in_flight_.compare_exchange_weak(peak, now)) {
    }
    struct Release {
        Provider* self;
        ~Release() {
            --self->in_flight_;
            self->slots_.release();
        }
    } release{this};
    return do_fetch(std::string(domain));
}

// ---- fixtures ----

FixtureProvider::FixtureProvider(std::filesystem::path root, std::string provider_name)
    : root_(std::move(root)), name_(std::move(provider_name)) {}

EnrichmentResult FixtureProvider::do_fetch(const std::string& domain) {
    EnrichmentResult out{domain, {}, name_, std::chrono::system_clock::now()};
    const auto path = root_ / name_ / (domain + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) return out;
    const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what(), std::nullopt, e.byte);
    }
    if (!doc.is_object()) throw ParseError(path.string() + ": fixture must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (!value.is_number_integer()) {
            throw ParseError(path.string() + ": field '" + key + "' must be an integer");
        }
        out.fields[key] = value.get<std::int64_t>();
    }
    check_fields(out.fields, current_utc_year());
    return out;
}

// ---- CDX ----

CdxSummary parse_cdx_payload(std::string_view body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw ParseError("malformed CDX payload at byte " + std::to_string(e.byte) + ": " + e.what(), std::nullopt,
                         e.byte);
    }
    if (!doc.is_array()) throw ParseError("CDX payload is not a JSON array");
    CdxSummary out;
    if (doc.empty()) return out;
    const auto& header = doc.front();
    if (!header.is_array()) throw ParseError("CDX header row is not an array");
    std::size_t ts_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i].is_string() && header[i].get<std::string>() == "timestamp") ts_col = i;
    }
    if (ts_col == header.size()) throw ParseError("CDX header has no timestamp column");
    for (std::size_t r = 1; r < doc.size(); ++r) {
        const auto& row = doc[r];
        if (!row.is_array() || row.size() <= ts_col || !row[ts_col].is_string()) {
            throw ParseError("CDX row " + std::to_string(r) + " is malformed");
        }
        const auto ts = row[ts_col].get<std::string>();
        if (ts.size() < 4 || !std::all_of(ts.begin(), ts.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            throw ParseError("CDX row " + std::to_string(r) + " has a malformed timestamp '" + ts + "'");
        }
        ++out.rows;
        if (!out.earliest || ts < *out.earliest) out.earliest = ts;
    }
    return out;
}

WaybackCdxProvider::WaybackCdxProvider(std::shared_ptr<HttpTransport> transport, WaybackOptions options)
    : transport_(std::move(transport)), options_(std::move(options)) {
    if (!transport_) throw ConfigError("wayback provider needs an HTTP transport");
    if (options_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
}

std::string WaybackCdxProvider::first_capture_url(const std::string& domain) const {
    return options_.endpoint + "?url=" + domain + "&output=json&fl=timestamp&limit=1";
}

std::string WaybackCdxProvider::page_count_url(const std::string& domain) const {
    return options_.endpoint + "?url=" + domain + "&output=json&fl=timestamp&showNumPages=true";
}

std::string WaybackCdxProvider::page_url(const std::string& domain, std::int64_t page) const {
    return options_.endpoint + "?url=" + domain + "&output=json&fl=timestamp&page=" + std::to_string(page);
}

void WaybackCdxProvider::sleep_for(std::chrono::milliseconds d) {
    if (d <= std::chrono::milliseconds::zero()) return;
    if (options_.sleep) {
        options_.sleep(d);
    } else {
        std::this_thread::sleep_for(d);
    }
}

std::string WaybackCdxProvider::get_with_retry(const std::string& url) {
    std::string last_error;
    for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
        if (attempt > 0) sleep_for(options_.backoff * (1 << (attempt - 1)));
        {
            std::lock_guard lock(spacing_mutex_);
            const auto now = std::chrono::steady_clock::now();
            if (last_request_) {
                const auto since = std::chrono::duration_cast<std::chrono::milliseconds>(now - *last_request_);
                if (since < options_.min_spacing) sleep_for(options_.min_spacing - since);
            }
            last_request_ = std::chrono::steady_clock::now();
        }
        try {
            const auto response = transport_->get(url);
            if (response.status == 200) return response.body;
            last_error = "HTTP " + std::to_string(response.status);
        } catch (const RetryableError& e) {
            last_error = e.what();
        }
    }
    throw RetryableError(name(), last_error + " after " + std::to_string(options_.max_attempts) + " attempts: " + url);
}

WaybackStats WaybackCdxProvider::query(const std::string& domain) {
    WaybackStats stats;
    const auto first = parse_cdx_payload(get_with_retry(first_capture_url(domain)));
    if (first.rows == 0) return stats;

    const auto pages_body = get_with_retry(page_count_url(domain));
    std::int64_t pages = 0;
    try {
        const auto doc = json::parse(pages_body);
        if (!doc.is_number_integer() || doc.get<std::int64_t>() < 0) throw ParseError("CDX page count is not a count");
        pages = doc.get<std::int64_t>();
    } catch (const json::parse_error& e) {
        throw ParseError("malformed CDX page count at byte " + std::to_string(e.byte), std::nullopt, e.byte);
    }
    for (std::int64_t p = 0; p < pages; ++p) {
        const auto page = parse_cdx_payload(get_with_retry(page_url(domain, p)));
        stats.acr += page.rows;
    }
    const int year = std::stoi(first.earliest->substr(0, 4));
    if (year < 1996 || year > current_utc_year()) {
        throw ParseError("first capture year " + std::to_string(year) + " is outside the archive's lifetime");
    }
    stats.dob = year;
    return stats;
}

EnrichmentResult WaybackCdxProvider::do_fetch(const std::string& domain) {
    const auto stats = query(domain);
    EnrichmentResult out{domain, {}, name(), std::chrono::system_clock::now()};
    out.fields["acr"] = stats.acr;
    if (stats.dob) out.fields["dob"] = *stats.dob;
    return out;
}

// ---- cache ----

std::string format_utc(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::chrono::system_clock::time_point parse_utc(std::string_view text) {
    std::tm tm{};
    std::istringstream in{std::string(text)};
    in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    if (in.fail()) throw ParseError("bad UTC timestamp '" + std::string(text) + "'");
    return std::chrono::system_clock::from_time_t(timegm(&tm));
}

CachingProvider::CachingProvider(std::shared_ptr<Provider> inner, std::filesystem::path dir, std::chrono::hours max_age)
    : inner_(std::move(inner)), dir_(std::move(dir)), max_age_(max_age) {}

EnrichmentResult CachingProvider::do_fetch(const std::string& domain) {
    const auto path = dir_ / inner_->name() / (domain + ".json");
    if (std::ifstream in(path, std::ios::binary); in) {
        try {
            const auto doc = json::parse(in);
            EnrichmentResult cached{domain, {}, inner_->name(), parse_utc(doc.at("fetched_at").get<std::string>())};
            if (std::chrono::system_clock::now() - cached.fetched_at <= max_age_) {
                for (const auto& [k, v] : doc.at("fields").items()) cached.fields[k] = v.get<std::int64_t>();
                return cached;
            }
        } catch (const std::exception&) {
            // unreadable entries are refetched and overwritten
        }
    }
    auto fresh = inner_->fetch(domain);
    std::filesystem::create_directories(path.parent_path());
    json doc = {{"domain", domain}, {"provider", fresh.provider}, {"fetched_at", format_utc(fresh.fetched_at)},
                {"fields", fresh.fields}};
    std::ofstream(path, std::ios::binary | std::ios::trunc) << doc.dump(2) << '\n';
    return fresh;
}

FieldMap merge_results(std::span<const EnrichmentResult> results) {
    FieldMap out;
    for (const auto& r : results) {
        for (const auto& [k, v] : r.fields) out[k] = v;
    }
    return out;
}

FieldMap enrich(std::span<const std::shared_ptr<Provider>> providers, std::string_view domain) {
    std::vector<EnrichmentResult> results;
    results.reserve(providers.size());
    for (const auto& p : providers) results.push_back(p->fetch(domain));
    return merge_results(results);
}

void apply_fields(DomainRecord& record, const FieldMap& fields) {
    for (const auto& [k, v] : fields) record.set(parse_feature_kind(k), v);
}

std::vector<std::shared_ptr<Provider>> make_providers(std::span<const std::string> names,
                                                      const std::filesystem::path& fixture_root,
                                                      std::shared_ptr<HttpTransport> transport) {
    std::vector<std::shared_ptr<Provider>> out;
    for (const auto& n : names) {
        if (n == "wayback") {
            if (!transport) transport = std::make_shared<HttplibTransport>();
            out.push_back(std::make_shared<WaybackCdxProvider>(transport));
        } else {
            if (fixture_root.empty()) throw ConfigError("provider '" + n + "' needs a fixture root (DOMSCREEN_FIXTURES)");
            out.push_back(std::make_shared<FixtureProvider>(fixture_root, n));
        }
    }
    return out;
}

}  // namespace domscreen
