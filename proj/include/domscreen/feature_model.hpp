#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace domscreen {

/// Missing Alexa / SimilarWeb ranks are encoded as this cap.
inline constexpr std::int64_t kRankCap = 40'000'000;
/// Earliest accepted first-capture year.
inline constexpr int kMinDob = 1995;
/// Positivity floor applied to every transformed feature.
inline constexpr double kFeatureFloor = 1e-6;
/// Transformed value of a set block flag.
inline constexpr double kBlockedHealth = 0.1;

/// The raw per-domain properties, in the order used by FeatureMatrix and the CSV schema.
enum class FeatureKind {
    pr,
    da,
    pa,
    bl,
    dp,
    acr,
    alexa,
    similarweb,
    dob,
    sv,
    te,
    le,
    hy,
    nu,
    sb,
    pb,
    ab,
};

inline constexpr std::size_t kFeatureKindCount = 17;

std::string_view feature_name(FeatureKind kind);

/// Parses a lower-case feature name ("pr", "similarweb", ...). "aby" is accepted as an alias of "dob".
/// Throws ConfigError for anything else.
FeatureKind parse_feature_kind(std::string_view name);

struct DomainRecord {
    std::string name;
    std::optional<double> price_usd;
    std::int64_t pr = 0;
    std::int64_t da = 0;
    std::int64_t pa = 0;
    std::int64_t bl = 0;
    std::int64_t dp = 0;
    std::int64_t acr = 0;
    std::int64_t alexa = kRankCap;
    std::int64_t similarweb = kRankCap;
    std::int64_t dob = 2000;
    std::int64_t sv = 0;
    std::int64_t te = 0;
    std::int64_t le = 1;
    std::int64_t hy = 0;
    std::int64_t nu = 0;
    std::int64_t sb = 0;
    std::int64_t pb = 0;
    std::int64_t ab = 0;

    std::int64_t get(FeatureKind kind) const;
    void set(FeatureKind kind, std::int64_t value);

    bool operator==(const DomainRecord&) const = default;
};

/// Length of the name label, i.e. everything before the first '.'.
std::int64_t name_length(std::string_view domain);

/// Current calendar year in UTC.
int current_utc_year();

/// Lists every invariant violation of `record`; empty when the record is valid.
/// `current_year` bounds dob from above.
std::vector<std::string> validation_errors(const DomainRecord& record, int current_year);

/// Throws ValidationError carrying the first violation.
void validate(const DomainRecord& record, int current_year);

/// Goodness score of one raw value: strictly positive, larger means more valuable.
/// Counts and scores map through log1p; ranks through log1p(cap / rank); dob through
/// log1p(reference_year - dob + 1); block flags to 1.0 (clear) or 0.1 (set).
/// le, hy and nu have no transform and raise ConfigError.
double transform_feature(std::int64_t value, FeatureKind kind, int reference_year);
double transform_feature(std::int64_t value, std::string_view kind, int reference_year);

/// exp(mean(log(values))). Throws ValidationError on an empty list or a non-positive element.
double geometric_mean(std::span<const double> values);

inline constexpr std::size_t kDescriptorCount = 5;

struct DescriptorVector {
    double authority = 0.0;
    double traffic = 0.0;
    double age = 0.0;
    double health = 0.0;
    double name_quality = 0.0;

    std::array<double, kDescriptorCount> as_array() const {
        return {authority, traffic, age, health, name_quality};
    }
    static DescriptorVector from_array(const std::array<double, kDescriptorCount>& a) {
        return {a[0], a[1], a[2], a[3], a[4]};
    }

    bool operator==(const DescriptorVector&) const = default;
};

inline constexpr std::array<std::string_view, kDescriptorCount> kDescriptorNames = {
    "authority", "traffic", "age", "health", "name_quality"};

/// Raw features feeding each descriptor, in DescriptorVector order.
/// ACR is shared by authority, traffic and age; DOB by age and name quality.
const std::array<std::vector<FeatureKind>, kDescriptorCount>& descriptor_members();

DescriptorVector compute_descriptors(const DomainRecord& record, int reference_year);

using ScaledVector = std::array<double, kDescriptorCount>;

struct ScalingParams {
    std::array<double, kDescriptorCount> min{};
    std::array<double, kDescriptorCount> max{};
    int reference_year = 0;

    bool operator==(const ScalingParams&) const = default;
};

/// Per-descriptor min/max. A degenerate dimension is stored with max = min + 1.
ScalingParams fit_scaling(std::span<const DescriptorVector> descriptors, int reference_year);

inline constexpr double kScaledClampLow = -0.5;
inline constexpr double kScaledClampHigh = 1.5;

/// (x - min) / (max - min) per component, clamped to [-0.5, 1.5].
ScaledVector apply_scaling(const ScalingParams& params, const DescriptorVector& v);

}  // namespace domscreen
