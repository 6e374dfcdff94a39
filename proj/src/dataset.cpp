#include "domscreen/dataset.hpp"

#include "domscreen/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace domscreen {

bool passes_auction_filter(const AuctionInfo& info) {
    if (info.reserve_price_flag && *info.reserve_price_flag != 0) return false;
    if (info.bidder_count && *info.bidder_count < 2) return false;
    return true;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

const std::vector<std::string> kRequired = {"domain", "pr", "da", "pa", "bl", "dp", "acr", "alexa",
                                            "similarweb", "dob", "sv", "te", "sb", "pb", "ab"};

std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<std::int64_t> parse_integral(const std::string& s) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size()) return v;
    // Accept integral decimals such as "4.0".
    const auto d = parse_double(s);
    if (d && std::floor(*d) == *d && std::abs(*d) < 9e15) return static_cast<std::int64_t>(*d);
    return std::nullopt;
}

std::string format_price(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

DomainCsvReader::DomainCsvReader(const std::filesystem::path& path, int current_year)
    : current_year_(current_year) {
    auto file = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*file) throw Error("cannot open " + path.string());
    in_ = std::move(file);
    read_header();
}

DomainCsvReader::DomainCsvReader(std::unique_ptr<std::istream> in, int current_year)
    : in_(std::move(in)), current_year_(current_year) {
    read_header();
}

void DomainCsvReader::read_header() {
    std::string text;
    while (std::getline(*in_, text)) {
        ++line_;
        if (line_ == 1 && text.starts_with("\xEF\xBB\xBF")) text.erase(0, 3);
        if (!trim(text).empty()) break;
        text.clear();
    }
    if (trim(text).empty()) throw ParseError("CSV has no header row", line_);
    for (auto& name : split_csv_line(text)) header_.push_back(lower(trim(name)));
    for (std::size_t i = 0; i < header_.size(); ++i) column_.emplace(header_[i], i);
    std::vector<std::string> missing;
    for (const auto& name : kRequired) {
        if (!column_.contains(name)) missing.push_back(name);
    }
    if (!missing.empty()) {
        std::string msg = "missing required column(s):";
        for (const auto& m : missing) msg += " " + m;
        throw ParseError(msg, line_);
    }
}

bool DomainCsvReader::next(ParsedRow& row) {
    std::string text;
    while (std::getline(*in_, text)) {
        ++line_;
        if (trim(text).empty()) continue;
        row = ParsedRow{};
        row.line = line_;
        const auto fields = split_csv_line(text);
        if (fields.size() > header_.size()) {
            row.errors.push_back("row has " + std::to_string(fields.size()) + " fields, header has " +
                                 std::to_string(header_.size()));
            return true;
        }
        auto cell = [&](const std::string& name) -> std::optional<std::string> {
            const auto it = column_.find(name);
            if (it == column_.end()) return std::nullopt;
            if (it->second >= fields.size()) return std::string{};
            return trim(fields[it->second]);
        };

        DomainRecord r;
        r.name = lower(cell("domain").value_or(""));
        if (r.name.empty()) row.errors.push_back("domain is empty");

        if (const auto p = cell("price_usd"); p && !p->empty()) {
            const auto v = parse_double(*p);
            if (!v) {
                row.errors.push_back("price_usd '" + *p + "' is not a number");
            } else {
                r.price_usd = *v;
            }
        }

        for (std::size_t k = 0; k < kFeatureKindCount; ++k) {
            const auto kind = static_cast<FeatureKind>(k);
            const std::string name(feature_name(kind));
            const auto c = cell(name);
            const bool empty = !c || c->empty();
            if (empty) {
                if (kind == FeatureKind::alexa || kind == FeatureKind::similarweb) {
                    r.set(kind, kRankCap);
                } else if (kind == FeatureKind::le) {
                    r.le = name_length(r.name);
                    if (c) row.warnings.push_back("le missing, derived from name");
                } else if (!c && (kind == FeatureKind::hy || kind == FeatureKind::nu)) {
                    const auto label = std::string_view(r.name).substr(0, r.name.find('.'));
                    const bool has = kind == FeatureKind::hy
                                         ? label.find('-') != std::string_view::npos
                                         : std::any_of(label.begin(), label.end(),
                                                       [](char ch) { return ch >= '0' && ch <= '9'; });
                    r.set(kind, has ? 1 : 0);
                } else {
                    r.set(kind, 0);
                    row.warnings.push_back(name + " missing, set to 0");
                }
                continue;
            }
            const auto v = parse_integral(*c);
            if (!v) {
                row.errors.push_back(name + " '" + *c + "' is not an integer");
            } else {
                r.set(kind, *v);
            }
        }

        for (const auto& [name, slot] : {std::pair{"reserve_price_flag", &row.auction.reserve_price_flag},
                                         std::pair{"bidder_count", &row.auction.bidder_count}}) {
            if (const auto c = cell(name); c && !c->empty()) {
                const auto v = parse_integral(*c);
                if (!v) {
                    row.errors.push_back(std::string(name) + " '" + *c + "' is not an integer");
                } else {
                    *slot = *v;
                }
            }
        }

        if (row.errors.empty()) {
            auto violations = validation_errors(r, current_year_);
            row.errors.insert(row.errors.end(), violations.begin(), violations.end());
        }
        if (row.errors.empty()) row.record = std::move(r);
        return true;
    }
    return false;
}

namespace {

CsvParseResult collect(DomainCsvReader& reader) {
    CsvParseResult out;
    ParsedRow row;
    while (reader.next(row)) {
        for (auto& w : row.warnings) out.warnings.push_back({row.line, std::move(w)});
        if (row.record) {
            out.records.push_back(std::move(*row.record));
            out.auction.push_back(row.auction);
            out.lines.push_back(row.line);
        } else {
            for (auto& e : row.errors) out.errors.push_back({row.line, std::move(e)});
        }
    }
    return out;
}

}  // namespace

CsvParseResult parse_csv(const std::filesystem::path& path, int current_year) {
    DomainCsvReader reader(path, current_year);
    return collect(reader);
}

CsvParseResult parse_csv(std::unique_ptr<std::istream> in, int current_year) {
    DomainCsvReader reader(std::move(in), current_year);
    return collect(reader);
}

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> c = {"domain", "price_usd"};
        for (std::size_t k = 0; k < kFeatureKindCount; ++k) c.emplace_back(feature_name(static_cast<FeatureKind>(k)));
        return c;
    }();
    return cols;
}

void write_csv_header(std::ostream& out) {
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
}

void write_csv_row(std::ostream& out, const DomainRecord& r) {
    out << r.name << ',';
    if (r.price_usd) out << format_price(*r.price_usd);
    for (std::size_t k = 0; k < kFeatureKindCount; ++k) out << ',' << r.get(static_cast<FeatureKind>(k));
    out << '\n';
}

void write_csv(std::ostream& out, std::span<const DomainRecord> records) {
    write_csv_header(out);
    for (const auto& r : records) write_csv_row(out, r);
}

void write_csv(const std::filesystem::path& path, std::span<const DomainRecord> records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    write_csv(out, records);
}

void write_error_report(const std::filesystem::path& path, std::span<const RowIssue> issues) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << "line,violation\n";
    for (const auto& issue : issues) {
        std::string msg = issue.message;
        std::string quoted = "\"";
        for (const char c : msg) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
        quoted += '"';
        out << issue.line << ',' << quoted << '\n';
    }
}

Label label(const DomainRecord& record) {
    return record.price_usd && *record.price_usd > kValueThresholdUsd ? Label::valuable : Label::non_valuable;
}

std::vector<int> LabeledSet::signs() const {
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = sign_of(labels[i]);
    return out;
}

LabeledSet make_labeled(std::vector<DomainRecord> records) {
    LabeledSet set;
    set.labels.reserve(records.size());
    for (const auto& r : records) set.labels.push_back(label(r));
    set.records = std::move(records);
    return set;
}

std::vector<ScaledVector> scaled_descriptors(std::span<const DomainRecord> records, int reference_year,
                                             ScalingParams* fitted) {
    std::vector<DescriptorVector> desc;
    desc.reserve(records.size());
    for (const auto& r : records) desc.push_back(compute_descriptors(r, reference_year));
    const auto params = fit_scaling(desc, reference_year);
    std::vector<ScaledVector> out;
    out.reserve(desc.size());
    for (const auto& d : desc) out.push_back(apply_scaling(params, d));
    if (fitted) *fitted = params;
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double sq_dist(const ScaledVector& a, const ScaledVector& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double t = a[d] - b[d];
        s += t * t;
    }
    return s;
}

}  // namespace

std::vector<std::size_t> kennard_stone(std::span<const ScaledVector> points, std::size_t k, std::uint64_t seed) {
    const std::size_t n = points.size();
    k = std::min(k, n);
    std::vector<std::size_t> selected;
    if (k == 0) return selected;
    std::vector<std::uint64_t> priority(n);
    for (std::size_t i = 0; i < n; ++i) priority[i] = splitmix64(seed ^ splitmix64(i));
    if (n == 1) return {0};

    std::size_t a = 0, b = 1;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = sq_dist(points[i], points[j]);
            const auto key = std::min(priority[i], priority[j]);
            if (d > best || (d == best && key < std::min(priority[a], priority[b]))) {
                best = d;
                a = i;
                b = j;
            }
        }
    }
    if (priority[b] < priority[a]) std::swap(a, b);
    std::vector<bool> taken(n, false);
    std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
    auto take = [&](std::size_t idx) {
        selected.push_back(idx);
        taken[idx] = true;
        for (std::size_t i = 0; i < n; ++i) min_d[i] = std::min(min_d[i], sq_dist(points[i], points[idx]));
    };
    take(a);
    if (k >= 2) take(b);
    while (selected.size() < k) {
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            if (pick == n || min_d[i] > min_d[pick] || (min_d[i] == min_d[pick] && priority[i] < priority[pick])) {
                pick = i;
            }
        }
        take(pick);
    }
    return selected;
}

SplitResult diversity_split(const LabeledSet& set, std::uint64_t seed, int reference_year) {
    const std::size_t n = set.size();
    if (set.labels.size() != n) throw ValidationError("labels and records differ in length");
    if (n < 9) throw ValidationError("diversity split needs at least 9 records, got " + std::to_string(n));
    const auto points = scaled_descriptors(set.records, reference_year);

    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < n; ++i) (set.labels[i] == Label::valuable ? pos : neg).push_back(i);
    for (const auto* cls : {&pos, &neg}) {
        if (cls->size() < 3) {
            throw ValidationError(std::string(cls == &pos ? "valuable" : "non_valuable") + " class has " +
                                  std::to_string(cls->size()) + " members; at least 3 are needed");
        }
    }

    const std::size_t train_total = (n + 2) / 3;
    // Per-class quota proportional to class size, rounded half up.
    std::size_t pos_quota = (train_total * pos.size() * 2 + n) / (2 * n);
    pos_quota = std::clamp<std::size_t>(pos_quota, 1, pos.size() - 1);
    std::size_t neg_quota = train_total - pos_quota;
    if (neg_quota > neg.size() - 1) {
        neg_quota = neg.size() - 1;
        pos_quota = train_total - neg_quota;
    }

    std::vector<std::uint64_t> priority(n);
    for (std::size_t i = 0; i < n; ++i) priority[i] = splitmix64(seed ^ splitmix64(i + 0x5eed));

    SplitResult out;
    out.seed = seed;
    bool to_test = true;
    for (const auto& [members, quota] : {std::pair{&pos, pos_quota}, std::pair{&neg, neg_quota}}) {
        std::vector<ScaledVector> sub;
        sub.reserve(members->size());
        for (const auto i : *members) sub.push_back(points[i]);
        const auto chosen = kennard_stone(sub, quota, seed);
        std::vector<bool> in_train(members->size(), false);
        for (const auto c : chosen) {
            in_train[c] = true;
            out.training_index.push_back((*members)[c]);
        }
        std::vector<std::size_t> rest;
        for (std::size_t k = 0; k < members->size(); ++k) {
            if (!in_train[k]) rest.push_back((*members)[k]);
        }
        auto norm = [&](std::size_t i) { return sq_dist(points[i], ScaledVector{}); };
        std::sort(rest.begin(), rest.end(), [&](std::size_t x, std::size_t y) {
            const double nx = norm(x), ny = norm(y);
            if (nx != ny) return nx < ny;
            return priority[x] < priority[y];
        });
        for (const auto i : rest) {
            (to_test ? out.test_index : out.external_index).push_back(i);
            to_test = !to_test;
        }
    }

    auto fill = [&](const std::vector<std::size_t>& idx, LabeledSet& part) {
        for (const auto i : idx) {
            part.records.push_back(set.records[i]);
            part.labels.push_back(set.labels[i]);
        }
    };
    fill(out.training_index, out.training);
    fill(out.test_index, out.test);
    fill(out.external_index, out.external);
    return out;
}

}  // namespace domscreen
