#include "domscreen/dataset.hpp"

#include "domscreen/errors.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace domscreen {

namespace {

// Quantile functions map a goodness probability p in (0, 1) to a raw value; larger p is more valuable.
// Class-conditional parameters follow the published medians and ranges per class.

double inv_norm(double p) {
    static const boost::math::normal standard;
    return boost::math::quantile(standard, p);
}

std::int64_t rounded_normal(double p, double mean, double sd, std::int64_t lo, std::int64_t hi) {
    const double v = std::round(mean + sd * inv_norm(p));
    return std::clamp(static_cast<std::int64_t>(v), lo, hi);
}

// Zero-inflated log-normal count: zero below p0, otherwise a log-normal with the given median of the
// whole distribution (or of the non-zero tail when the overall median is zero).
std::int64_t zero_inflated_count(double p, double p0, double median, double tail_median, double sigma,
                                 std::int64_t hi) {
    if (p < p0) return 0;
    const double mu = median > 0.0 ? std::log(median) - sigma * inv_norm((0.5 - p0) / (1.0 - p0))
                                   : std::log(tail_median);
    const double q = std::clamp((p - p0) / (1.0 - p0), 1e-12, 1.0 - 1e-12);
    const double v = std::round(std::exp(mu + sigma * inv_norm(q)));
    return std::clamp(static_cast<std::int64_t>(v), std::int64_t{0}, hi);
}

// Traffic rank: a log-normal clipped at the cap, so the bottom cap_fraction of goodness is untracked.
std::int64_t traffic_rank(double p, double cap_fraction, double median, std::int64_t lo) {
    const double cap = static_cast<double>(kRankCap);
    double mu = 0.0, sigma = 0.0;
    if (median < cap) {
        mu = std::log(median);
        sigma = (std::log(cap) - mu) / inv_norm(1.0 - cap_fraction);
    } else {
        sigma = 4.0;
        mu = std::log(cap) + sigma * inv_norm(cap_fraction);
    }
    const double v = std::round(std::exp(mu - sigma * inv_norm(p)));
    return std::clamp(static_cast<std::int64_t>(std::min(v, cap)), lo, kRankCap);
}

std::int64_t draw(FeatureKind kind, bool valuable, double p) {
    using enum FeatureKind;
    switch (kind) {
        case pr: return valuable ? rounded_normal(p, 4, 2, 0, 7) : rounded_normal(p, 0, 2, 0, 7);
        case da: return valuable ? rounded_normal(p, 37, 12, 1, 70) : rounded_normal(p, 13, 9, 1, 59);
        case pa: return valuable ? rounded_normal(p, 46, 13, 1, 72) : rounded_normal(p, 18.5, 11, 1, 56);
        case bl:
            return valuable ? zero_inflated_count(p, 0.05, 331, 0, 2.2, 322600)
                            : zero_inflated_count(p, 0.55, 0, 30, 2.2, 33808);
        case dp:
            return valuable ? zero_inflated_count(p, 0.03, 156, 0, 1.3, 2741)
                            : zero_inflated_count(p, 0.30, 6, 0, 1.6, 2126);
        case acr:
            return valuable ? zero_inflated_count(p, 0.01, 201, 0, 1.2, 47256)
                            : zero_inflated_count(p, 0.10, 15, 0, 1.5, 19035);
        case alexa:
            return valuable ? traffic_rank(p, 0.15, 10249830, 24476) : traffic_rank(p, 0.80, kRankCap, 51330);
        case similarweb:
            return valuable ? traffic_rank(p, 0.20, 18731855, 28459) : traffic_rank(p, 0.85, kRankCap, 617889);
        case dob:
            // Older is better, so the year falls as p rises.
            return valuable ? rounded_normal(1.0 - p, 2002, 4, 1995, kSynthReferenceYear)
                            : rounded_normal(1.0 - p, 2011, 3.5, 1996, kSynthReferenceYear);
        case sb: return p < (valuable ? 0.12 : 0.25) ? 1 : 0;
        case pb: return p < (valuable ? 0.10 : 0.12) ? 1 : 0;
        case ab: return p < (valuable ? 0.07 : 0.09) ? 1 : 0;
        case te: return valuable ? rounded_normal(p, 2.4, 1.0, 0, 6) : rounded_normal(p, 1.0, 0.8, 1, 6);
        case sv:
            return valuable ? zero_inflated_count(p, 0.05, 10, 0, 1.5, 450000)
                            : zero_inflated_count(p, 0.55, 0, 3, 1.5, 1000000);
        case le:
        case hy:
        case nu: break;
    }
    return 0;
}

struct PlantedGroup {
    std::vector<FeatureKind> members;
    /// Share of each member's latent variance that comes from the group factor.
    double loading;
};

const std::vector<PlantedGroup>& planted_groups() {
    using enum FeatureKind;
    static const std::vector<PlantedGroup> groups = {
        {{pr, da, pa, bl, dp}, 0.90},
        {{alexa, similarweb}, 0.90},
        {{dob, acr}, 0.90},
        {{sb, pb, ab}, 0.98},
        {{sv, te}, 0.90},
    };
    return groups;
}

class Source {
public:
    explicit Source(std::uint64_t seed) : rng_(seed) {}

    // Uniform on (0, 1) from the raw 64-bit engine output; portable across standard libraries.
    double uniform() { return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1p-53; }
    double normal() { return inv_norm(uniform()); }
    std::uint64_t bits() { return rng_(); }

private:
    std::mt19937_64 rng_;
};

std::string make_name(Source& src, std::int64_t length, bool hyphen, bool digit) {
    static constexpr std::string_view letters = "abcdefghijklmnopqrstuvwxyz";
    std::string label;
    for (std::int64_t i = 0; i < length; ++i) label.push_back(letters[src.bits() % letters.size()]);
    if (digit) label[static_cast<std::size_t>(length - 1)] = static_cast<char>('0' + src.bits() % 10);
    if (hyphen && length >= 3) label[static_cast<std::size_t>(length / 2)] = '-';
    return label + ".com";
}

}  // namespace

LabeledSet synth_generate(std::size_t n, std::uint64_t seed) {
    if (n < 10) throw ValidationError("synth_generate needs n >= 10");
    Source src(seed);

    // Exactly ceil(n/2) valuable records, in shuffled order.
    std::vector<bool> valuable(n, false);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) valuable[i] = true;
    for (std::size_t k = n; k > 1; --k) {
        const std::size_t r = static_cast<std::size_t>(src.bits() % k);
        std::swap(valuable[k - 1], valuable[r]);
    }

    std::set<std::string> names;
    std::vector<DomainRecord> records;
    records.reserve(n);
    // Latent goodness per record and feature, converted to values once class ranks are known.
    std::vector<std::vector<std::pair<FeatureKind, double>>> latent(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool v = valuable[i];
        DomainRecord r;
        for (const auto& group : planted_groups()) {
            const double factor = src.normal();
            for (const auto kind : group.members) {
                const double z = std::sqrt(group.loading) * factor + std::sqrt(1.0 - group.loading) * src.normal();
                latent[i].emplace_back(kind, z);
            }
        }

        r.le = v ? rounded_normal(src.uniform(), 13, 4, 6, 32) : rounded_normal(src.uniform(), 15, 5, 6, 33);
        const bool hyphen = src.uniform() < (v ? 0.05 : 0.20);
        const bool digit = src.uniform() < (v ? 0.05 : 0.15);
        do {
            r.name = make_name(src, r.le, hyphen, digit);
        } while (!names.insert(r.name).second);
        const auto label_part = std::string_view(r.name).substr(0, r.name.find('.'));
        r.hy = label_part.find('-') != std::string_view::npos ? 1 : 0;
        r.nu = std::any_of(label_part.begin(), label_part.end(), [](char c) { return c >= '0' && c <= '9'; }) ? 1 : 0;

        if (v) {
            // Sale prices above the threshold, median around 300 USD.
            r.price_usd = std::round(100.0 + std::exp(std::log(200.0) + 1.2 * src.normal())) + 1.0;
        } else if (src.uniform() < 0.3) {
            r.price_usd.reset();  // closeout, never sold
        } else {
            r.price_usd = std::round(5.0 + 95.0 * src.uniform());
        }
        records.push_back(std::move(r));
    }

    // Empirical copula: within each class, a feature's p is its plotting position (rank + 0.5) / m, so
    // sample quantiles land on the class quantile functions while rank correlations are kept.
    for (const bool cls : {true, false}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i) {
            if (valuable[i] == cls) members.push_back(i);
        }
        const double m = static_cast<double>(members.size());
        const std::size_t width = latent.empty() ? 0 : latent.front().size();
        for (std::size_t f = 0; f < width; ++f) {
            std::vector<std::size_t> order = members;
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          const double za = latent[a][f].second, zb = latent[b][f].second;
                          return za != zb ? za < zb : a < b;
                      });
            for (std::size_t k = 0; k < order.size(); ++k) {
                const FeatureKind kind = latent[order[k]][f].first;
                records[order[k]].set(kind, draw(kind, cls, (static_cast<double>(k) + 0.5) / m));
            }
        }
    }
    return make_labeled(std::move(records));
}

}  // namespace domscreen
