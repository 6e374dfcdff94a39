#include "domscreen/enrichment.hpp"
#include "domscreen/errors.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

using namespace domscreen;
using namespace std::chrono_literals;

namespace {

const std::filesystem::path kFixtures = DOMSCREEN_FIXTURE_DIR;

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Scripted transport: each URL substring maps to a queue of outcomes, the last one repeating.
class FakeTransport : public HttpTransport {
public:
    struct Outcome {
        int status = 200;
        std::string body;
        bool fail = false;
    };

    void on(const std::string& needle, std::vector<Outcome> outcomes) { script_[needle] = {outcomes.begin(), outcomes.end()}; }

    HttpResponse get(const std::string& url) override {
        requests.push_back(url);
        for (auto& [needle, queue] : script_) {
            if (url.find(needle) == std::string::npos) continue;
            const Outcome o = queue.front();
            if (queue.size() > 1) queue.pop_front();
            if (o.fail) throw RetryableError("transport", "connection reset");
            return {o.status, o.body};
        }
        return {404, ""};
    }

    std::vector<std::string> requests;

private:
    std::map<std::string, std::deque<Outcome>> script_;
};

struct SleepLog {
    std::vector<std::chrono::milliseconds> calls;
    WaybackOptions options() {
        WaybackOptions o;
        o.sleep = [this](std::chrono::milliseconds d) { calls.push_back(d); };
        return o;
    }
};

class CountingProvider : public Provider {
public:
    std::string name() const override { return "counting"; }
    int calls = 0;

protected:
    EnrichmentResult do_fetch(const std::string& domain) override {
        ++calls;
        return {domain, {{"acr", 42}}, name(), std::chrono::system_clock::now()};
    }
};

class SlowProvider : public Provider {
public:
    std::string name() const override { return "slow"; }

protected:
    EnrichmentResult do_fetch(const std::string& domain) override {
        std::this_thread::sleep_for(15ms);
        return {domain, {}, name(), std::chrono::system_clock::now()};
    }
};

}  // namespace

TEST_CASE("CDX payload parsing") {
    const auto three = parse_cdx_payload(slurp(kFixtures / "cdx/three_rows.json"));
    CHECK(three.rows == 3);
    REQUIRE(three.earliest.has_value());
    CHECK(three.earliest->substr(0, 8) == "19961105");

    const auto empty = parse_cdx_payload(slurp(kFixtures / "cdx/headers_only.json"));
    CHECK(empty.rows == 0);
    CHECK_FALSE(empty.earliest.has_value());
    CHECK(parse_cdx_payload("[]").rows == 0);

    const auto malformed = slurp(kFixtures / "cdx/malformed.json");
    try {
        parse_cdx_payload(malformed);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        REQUIRE(e.byte_offset().has_value());
        CHECK(*e.byte_offset() == malformed.size() + 1);
        CHECK(std::string(e.what()).find("byte " + std::to_string(*e.byte_offset())) != std::string::npos);
    }
    CHECK_THROWS_AS(parse_cdx_payload("{\"a\": 1}"), ParseError);
    CHECK_THROWS_AS(parse_cdx_payload("[[\"urlkey\"],[\"x\"]]"), ParseError);
}

TEST_CASE("wayback query on recorded payloads") {
    auto transport = std::make_shared<FakeTransport>();
    const auto three = slurp(kFixtures / "cdx/three_rows.json");
    transport->on("limit=1", {{200, three}});
    transport->on("showNumPages", {{200, "1"}});
    transport->on("page=0", {{200, three}});
    SleepLog log;
    WaybackCdxProvider wb(transport, log.options());
    const auto stats = wb.query("example.com");
    CHECK(stats.acr == 3);
    REQUIRE(stats.dob.has_value());
    CHECK(*stats.dob == 1996);
    REQUIRE(transport->requests.size() == 3);
    CHECK(transport->requests[0] == wb.first_capture_url("example.com"));
    CHECK(transport->requests[0].find("https://web.archive.org/cdx/search/cdx?url=example.com&output=json") == 0);
    CHECK(transport->requests[1] == wb.page_count_url("example.com"));
    CHECK(transport->requests[2] == wb.page_url("example.com", 0));

    const auto result = wb.fetch("example.com");
    CHECK(result.provider == "wayback");
    CHECK(result.fields == FieldMap{{"acr", 3}, {"dob", 1996}});
}

TEST_CASE("wayback empty result") {
    auto transport = std::make_shared<FakeTransport>();
    transport->on("limit=1", {{200, slurp(kFixtures / "cdx/headers_only.json")}});
    SleepLog log;
    WaybackCdxProvider wb(transport, log.options());
    const auto stats = wb.query("nothing-here.com");
    CHECK(stats.acr == 0);
    CHECK_FALSE(stats.dob.has_value());
    CHECK(transport->requests.size() == 1);
    CHECK(wb.fetch("nothing-here.com").fields == FieldMap{{"acr", 0}});
}

TEST_CASE("wayback sums rows across pages") {
    auto transport = std::make_shared<FakeTransport>();
    const auto three = slurp(kFixtures / "cdx/three_rows.json");
    transport->on("limit=1", {{200, three}});
    transport->on("showNumPages", {{200, "3"}});
    transport->on("page=", {{200, three}});
    SleepLog log;
    WaybackCdxProvider wb(transport, log.options());
    CHECK(wb.query("example.com").acr == 9);
}

TEST_CASE("wayback malformed payload is not retried") {
    auto transport = std::make_shared<FakeTransport>();
    transport->on("limit=1", {{200, slurp(kFixtures / "cdx/malformed.json")}});
    SleepLog log;
    WaybackCdxProvider wb(transport, log.options());
    CHECK_THROWS_AS(wb.query("example.com"), ParseError);
    CHECK(transport->requests.size() == 1);
}

TEST_CASE("wayback retries with exponential backoff") {
    auto transport = std::make_shared<FakeTransport>();
    transport->on("limit=1", {{0, "", true}, {503, ""}, {200, slurp(kFixtures / "cdx/headers_only.json")}});
    SleepLog log;
    auto options = log.options();
    options.min_spacing = 0ms;
    WaybackCdxProvider wb(transport, options);
    CHECK(wb.query("example.com").acr == 0);
    CHECK(transport->requests.size() == 3);
    CHECK(log.calls == std::vector<std::chrono::milliseconds>{500ms, 1000ms});
}

TEST_CASE("wayback gives up after three attempts with the provider name") {
    auto transport = std::make_shared<FakeTransport>();
    transport->on("limit=1", {{500, ""}});
    SleepLog log;
    WaybackCdxProvider wb(transport, log.options());
    try {
        wb.query("example.com");
        FAIL("expected a retryable error");
    } catch (const RetryableError& e) {
        CHECK(e.provider() == "wayback");
        CHECK(std::string(e.what()).find("HTTP 500") != std::string::npos);
    }
    CHECK(transport->requests.size() == 3);
}

TEST_CASE("wayback keeps requests at least 250 ms apart") {
    auto transport = std::make_shared<FakeTransport>();
    const auto three = slurp(kFixtures / "cdx/three_rows.json");
    transport->on("limit=1", {{200, three}});
    transport->on("showNumPages", {{200, "2"}});
    transport->on("page=", {{200, three}});
    SleepLog log;
    WaybackCdxProvider wb(transport, log.options());
    wb.query("example.com");
    // Four back-to-back requests: every one after the first waits out the remaining spacing.
    REQUIRE(log.calls.size() == 3);
    for (const auto d : log.calls) {
        CHECK(d > 200ms);
        CHECK(d <= 250ms);
    }
}

TEST_CASE("wayback rejects a first capture outside the archive lifetime") {
    auto transport = std::make_shared<FakeTransport>();
    transport->on("limit=1", {{200, "[[\"timestamp\"],[\"19900101000000\"]]"}});
    transport->on("showNumPages", {{200, "1"}});
    transport->on("page=", {{200, "[[\"timestamp\"],[\"19900101000000\"]]"}});
    SleepLog log;
    WaybackCdxProvider wb(transport, log.options());
    CHECK_THROWS_AS(wb.query("example.com"), ParseError);
}

TEST_CASE("fixture provider") {
    FixtureProvider moz(kFixtures / "providers", "moz");
    const auto hit = moz.fetch("example.com");
    CHECK(hit.provider == "moz");
    CHECK(hit.fields == FieldMap{{"pr", 3}, {"da", 41}, {"pa", 47}, {"bl", 1200}, {"acr", 150}});
    CHECK(moz.fetch("unknown-domain.com").fields.empty());
    CHECK(moz.fetch("example.com").fields == hit.fields);
    CHECK_THROWS_AS(moz.fetch("not a domain"), ValidationError);
    CHECK_THROWS_AS(moz.fetch("-bad.com"), ValidationError);
    CHECK_THROWS_AS(moz.fetch("nodot"), ValidationError);
}

TEST_CASE("fixture provider rejects out-of-range and malformed fixtures") {
    const auto root = oracle::temp_dir("fixtures");
    std::filesystem::create_directories(root / "bad");
    std::ofstream(root / "bad" / "range.com.json") << "{\"pr\": 11}";
    std::ofstream(root / "bad" / "syntax.com.json") << "{\"pr\": ";
    std::ofstream(root / "bad" / "unknown.com.json") << "{\"karma\": 1}";
    FixtureProvider bad(root, "bad");
    CHECK_THROWS_AS(bad.fetch("range.com"), ParseError);
    CHECK_THROWS_AS(bad.fetch("syntax.com"), ParseError);
    CHECK_THROWS_AS(bad.fetch("unknown.com"), ParseError);
}

TEST_CASE("merging is last-writer-wins in provider order") {
    const std::vector<std::string> order{"moz", "archive"};
    const auto providers = make_providers(order, kFixtures / "providers");
    const auto merged = enrich(providers, "example.com");
    CHECK(merged.at("acr") == 870);
    CHECK(merged.at("dob") == 1997);
    CHECK(merged.at("da") == 41);

    const std::vector<std::string> reversed{"archive", "moz"};
    CHECK(enrich(make_providers(reversed, kFixtures / "providers"), "example.com").at("acr") == 150);

    DomainRecord r;
    r.name = "example.com";
    r.le = 7;
    apply_fields(r, merged);
    CHECK(r.acr == 870);
    CHECK(r.dob == 1997);
    CHECK(r.pr == 3);
}

TEST_CASE("at most four fetches in flight per provider") {
    SlowProvider slow;
    std::vector<std::jthread> threads;
    for (int i = 0; i < 12; ++i) {
        threads.emplace_back([&slow, i] { slow.fetch("host" + std::to_string(i) + ".com"); });
    }
    threads.clear();
    CHECK(slow.peak_in_flight() <= kMaxInFlight);
    CHECK(slow.peak_in_flight() >= 1);
    CHECK(slow.in_flight() == 0);
}

TEST_CASE("disk cache serves fresh entries and refetches stale ones") {
    const auto dir = oracle::temp_dir("cache");
    auto inner = std::make_shared<CountingProvider>();
    CachingProvider cache(inner, dir);
    CHECK(cache.fetch("example.com").fields.at("acr") == 42);
    CHECK(cache.fetch("example.com").fields.at("acr") == 42);
    CHECK(inner->calls == 1);
    CHECK(std::filesystem::exists(dir / "counting" / "example.com.json"));

    std::ofstream(dir / "counting" / "example.com.json", std::ios::trunc)
        << "{\"domain\":\"example.com\",\"provider\":\"counting\",\"fetched_at\":\"2000-01-01T00:00:00Z\","
           "\"fields\":{\"acr\":1}}";
    CHECK(cache.fetch("example.com").fields.at("acr") == 42);
    CHECK(inner->calls == 2);
}

TEST_CASE("UTC timestamps round trip") {
    const auto t = parse_utc("2016-03-04T05:06:07Z");
    CHECK(format_utc(t) == "2016-03-04T05:06:07Z");
    CHECK(std::chrono::system_clock::to_time_t(t) == 1457067967);
    CHECK_THROWS_AS(parse_utc("yesterday"), ParseError);
}

TEST_CASE("domain syntax") {
    CHECK(is_valid_domain("example.com"));
    CHECK(is_valid_domain("my-site1.co.uk"));
    CHECK_FALSE(is_valid_domain("example"));
    CHECK_FALSE(is_valid_domain("ex ample.com"));
    CHECK_FALSE(is_valid_domain("example-.com"));
    CHECK_FALSE(is_valid_domain("example..com"));
    CHECK_FALSE(is_valid_domain(""));
}

TEST_CASE("unknown fixture provider root") {
    const std::vector<std::string> names{"moz"};
    CHECK_THROWS_AS(make_providers(names, {}), ConfigError);
}
