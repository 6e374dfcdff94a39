#include "domscreen/feature_model.hpp"

#include "domscreen/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace domscreen {

namespace {

constexpr std::array<std::string_view, kFeatureKindCount> kFeatureNames = {
    "pr", "da", "pa", "bl", "dp", "acr", "alexa", "similarweb", "dob",
    "sv", "te", "le", "hy", "nu", "sb", "pb", "ab"};

struct Range {
    std::int64_t lo;
    std::int64_t hi;
};

constexpr std::int64_t kUnbounded = INT64_MAX;

// dob is bounded separately because its upper limit depends on the current year.
Range static_range(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::pr: return {0, 10};
        case FeatureKind::da:
        case FeatureKind::pa: return {0, 100};
        case FeatureKind::bl:
        case FeatureKind::dp:
        case FeatureKind::acr:
        case FeatureKind::sv: return {0, kUnbounded};
        case FeatureKind::alexa:
        case FeatureKind::similarweb: return {1, kRankCap};
        case FeatureKind::dob: return {kMinDob, kUnbounded};
        case FeatureKind::te: return {0, 6};
        case FeatureKind::le: return {1, kUnbounded};
        case FeatureKind::hy:
        case FeatureKind::nu:
        case FeatureKind::sb:
        case FeatureKind::pb:
        case FeatureKind::ab: return {0, 1};
    }
    return {0, kUnbounded};
}

std::string range_message(FeatureKind kind, std::int64_t value, Range r) {
    std::string msg = std::string(feature_name(kind)) + " = " + std::to_string(value) + " outside [" +
                      std::to_string(r.lo) + ", ";
    msg += r.hi == kUnbounded ? std::string("inf") : std::to_string(r.hi);
    return msg + "]";
}

}  // namespace

std::string_view feature_name(FeatureKind kind) { return kFeatureNames[static_cast<std::size_t>(kind)]; }

FeatureKind parse_feature_kind(std::string_view name) {
    if (name == "aby") return FeatureKind::dob;
    for (std::size_t i = 0; i < kFeatureNames.size(); ++i) {
        if (kFeatureNames[i] == name) return static_cast<FeatureKind>(i);
    }
    throw ConfigError("unknown feature kind '" + std::string(name) + "'");
}

std::int64_t DomainRecord::get(FeatureKind kind) const {
    switch (kind) {
        case FeatureKind::pr: return pr;
        case FeatureKind::da: return da;
        case FeatureKind::pa: return pa;
        case FeatureKind::bl: return bl;
        case FeatureKind::dp: return dp;
        case FeatureKind::acr: return acr;
        case FeatureKind::alexa: return alexa;
        case FeatureKind::similarweb: return similarweb;
        case FeatureKind::dob: return dob;
        case FeatureKind::sv: return sv;
        case FeatureKind::te: return te;
        case FeatureKind::le: return le;
        case FeatureKind::hy: return hy;
        case FeatureKind::nu: return nu;
        case FeatureKind::sb: return sb;
        case FeatureKind::pb: return pb;
        case FeatureKind::ab: return ab;
    }
    return 0;
}

void DomainRecord::set(FeatureKind kind, std::int64_t value) {
    switch (kind) {
        case FeatureKind::pr: pr = value; break;
        case FeatureKind::da: da = value; break;
        case FeatureKind::pa: pa = value; break;
        case FeatureKind::bl: bl = value; break;
        case FeatureKind::dp: dp = value; break;
        case FeatureKind::acr: acr = value; break;
        case FeatureKind::alexa: alexa = value; break;
        case FeatureKind::similarweb: similarweb = value; break;
        case FeatureKind::dob: dob = value; break;
        case FeatureKind::sv: sv = value; break;
        case FeatureKind::te: te = value; break;
        case FeatureKind::le: le = value; break;
        case FeatureKind::hy: hy = value; break;
        case FeatureKind::nu: nu = value; break;
        case FeatureKind::sb: sb = value; break;
        case FeatureKind::pb: pb = value; break;
        case FeatureKind::ab: ab = value; break;
    }
}

std::int64_t name_length(std::string_view domain) {
    const auto label = domain.substr(0, domain.find('.'));
    // Count UTF-8 code points, not bytes.
    return std::count_if(label.begin(), label.end(),
                         [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; });
}

int current_utc_year() {
    using namespace std::chrono;
    const year_month_day ymd{floor<days>(system_clock::now())};
    return static_cast<int>(ymd.year());
}

std::vector<std::string> validation_errors(const DomainRecord& record, int current_year) {
    std::vector<std::string> errors;
    const auto dot = record.name.find('.');
    if (record.name.empty() || dot == 0 || dot == std::string::npos || dot + 1 == record.name.size()) {
        errors.push_back("domain '" + record.name + "' is not a name plus extension");
    }
    if (record.price_usd && (!std::isfinite(*record.price_usd) || *record.price_usd < 0.0)) {
        errors.push_back("price_usd must be a non-negative number");
    }
    for (std::size_t i = 0; i < kFeatureKindCount; ++i) {
        const auto kind = static_cast<FeatureKind>(i);
        auto r = static_range(kind);
        if (kind == FeatureKind::dob) r.hi = current_year;
        const auto v = record.get(kind);
        if (v < r.lo || v > r.hi) errors.push_back(range_message(kind, v, r));
    }
    if (errors.empty() && record.le != name_length(record.name)) {
        errors.push_back("le = " + std::to_string(record.le) + " does not match name length " +
                         std::to_string(name_length(record.name)));
    }
    return errors;
}

void validate(const DomainRecord& record, int current_year) {
    const auto errors = validation_errors(record, current_year);
    if (!errors.empty()) throw ValidationError(record.name + ": " + errors.front());
}

double transform_feature(std::int64_t value, FeatureKind kind, int reference_year) {
    const auto r = static_range(kind);
    double out = 0.0;
    switch (kind) {
        case FeatureKind::pr:
        case FeatureKind::da:
        case FeatureKind::pa:
        case FeatureKind::bl:
        case FeatureKind::dp:
        case FeatureKind::acr:
        case FeatureKind::sv:
        case FeatureKind::te:
            if (value < r.lo || value > r.hi) throw ValidationError(range_message(kind, value, r));
            out = std::log1p(static_cast<double>(value));
            break;
        case FeatureKind::alexa:
        case FeatureKind::similarweb:
            if (value <= 0) throw ValidationError(std::string(feature_name(kind)) + " rank must be positive");
            if (value > r.hi) throw ValidationError(range_message(kind, value, r));
            out = std::log1p(static_cast<double>(kRankCap) / static_cast<double>(value));
            break;
        case FeatureKind::dob:
            if (value < kMinDob || value > reference_year) {
                throw ValidationError("dob = " + std::to_string(value) + " outside [" + std::to_string(kMinDob) +
                                      ", " + std::to_string(reference_year) + "]");
            }
            out = std::log1p(static_cast<double>(reference_year - value + 1));
            break;
        case FeatureKind::sb:
        case FeatureKind::pb:
        case FeatureKind::ab:
            if (value != 0 && value != 1) throw ValidationError(range_message(kind, value, r));
            out = value == 0 ? 1.0 : kBlockedHealth;
            break;
        case FeatureKind::le:
        case FeatureKind::hy:
        case FeatureKind::nu:
            throw ConfigError(std::string(feature_name(kind)) + " does not feed any descriptor");
    }
    return std::max(out, kFeatureFloor);
}

double transform_feature(std::int64_t value, std::string_view kind, int reference_year) {
    return transform_feature(value, parse_feature_kind(kind), reference_year);
}

double geometric_mean(std::span<const double> values) {
    if (values.empty()) throw ValidationError("geometric mean of an empty list");
    double log_sum = 0.0;
    for (const double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("geometric mean needs finite positive values");
        log_sum += std::log(v);
    }
    return std::exp(log_sum / static_cast<double>(values.size()));
}

const std::array<std::vector<FeatureKind>, kDescriptorCount>& descriptor_members() {
    using enum FeatureKind;
    static const std::array<std::vector<FeatureKind>, kDescriptorCount> members = {{
        {pr, da, pa, bl, dp, acr},
        {alexa, similarweb, acr},
        {dob, acr},
        {sb, ab, pb},
        {sv, te, dob},
    }};
    return members;
}

DescriptorVector compute_descriptors(const DomainRecord& record, int reference_year) {
    std::array<double, kDescriptorCount> out{};
    std::array<double, 6> buf{};
    const auto& members = descriptor_members();
    for (std::size_t d = 0; d < kDescriptorCount; ++d) {
        const auto& kinds = members[d];
        for (std::size_t i = 0; i < kinds.size(); ++i) {
            buf[i] = transform_feature(record.get(kinds[i]), kinds[i], reference_year);
        }
        out[d] = geometric_mean(std::span<const double>(buf.data(), kinds.size()));
    }
    return DescriptorVector::from_array(out);
}

ScalingParams fit_scaling(std::span<const DescriptorVector> descriptors, int reference_year) {
    if (descriptors.empty()) throw ValidationError("cannot fit scaling on an empty set");
    ScalingParams params;
    params.reference_year = reference_year;
    params.min = descriptors.front().as_array();
    params.max = params.min;
    for (const auto& v : descriptors) {
        const auto a = v.as_array();
        for (std::size_t d = 0; d < kDescriptorCount; ++d) {
            params.min[d] = std::min(params.min[d], a[d]);
            params.max[d] = std::max(params.max[d], a[d]);
        }
    }
    for (std::size_t d = 0; d < kDescriptorCount; ++d) {
        if (params.max[d] == params.min[d]) params.max[d] = params.min[d] + 1.0;
    }
    return params;
}

ScaledVector apply_scaling(const ScalingParams& params, const DescriptorVector& v) {
    const auto a = v.as_array();
    ScaledVector out{};
    for (std::size_t d = 0; d < kDescriptorCount; ++d) {
        const double scaled = (a[d] - params.min[d]) / (params.max[d] - params.min[d]);
        out[d] = std::clamp(scaled, kScaledClampLow, kScaledClampHigh);
    }
    return out;
}

}  // namespace domscreen
