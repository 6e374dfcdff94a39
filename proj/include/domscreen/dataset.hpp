#pragma once

#include "domscreen/feature_model.hpp"
#include "domscreen/svm.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace domscreen {

/// Optional auction-source columns. Absent values pass the filter.
struct AuctionInfo {
    std::optional<std::int64_t> reserve_price_flag;
    std::optional<std::int64_t> bidder_count;
};

/// Auctions without reserve price and with at least 2 bidders.
bool passes_auction_filter(const AuctionInfo& info);

struct RowIssue {
    /// 1-based line number in the source file (the header is line 1).
    std::size_t line = 0;
    std::string message;
};

struct ParsedRow {
    std::size_t line = 0;
    /// Set when the row passed validation.
    std::optional<DomainRecord> record;
    AuctionInfo auction;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
};

/// Splits one CSV line into fields. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

/// Header-driven streaming reader over the domain CSV schema.
///
/// Required columns: domain, pr, da, pa, bl, dp, acr, alexa, similarweb, dob, sv, te, sb, pb, ab.
/// Optional: price_usd, le, hy, nu, reserve_price_flag, bidder_count. Unknown columns are ignored.
/// Empty alexa/similarweb cells become the 40,000,000 cap, an empty price means unsold, an empty le is
/// derived from the name, and any other empty numeric becomes 0 with a warning.
class DomainCsvReader {
public:
    /// Throws Error when the file cannot be opened and ParseError on a missing header or required column.
    explicit DomainCsvReader(const std::filesystem::path& path, int current_year = current_utc_year());
    explicit DomainCsvReader(std::unique_ptr<std::istream> in, int current_year = current_utc_year());

    /// Reads the next non-blank row; false at end of input.
    bool next(ParsedRow& row);

    const std::vector<std::string>& header() const { return header_; }

private:
    void read_header();

    std::unique_ptr<std::istream> in_;
    int current_year_;
    std::vector<std::string> header_;
    std::map<std::string, std::size_t> column_;
    std::size_t line_ = 0;
};

struct CsvParseResult {
    std::vector<DomainRecord> records;
    std::vector<AuctionInfo> auction;
    /// Source line of each record.
    std::vector<std::size_t> lines;
    std::vector<RowIssue> errors;
    std::vector<RowIssue> warnings;
};

CsvParseResult parse_csv(const std::filesystem::path& path, int current_year = current_utc_year());
CsvParseResult parse_csv(std::unique_ptr<std::istream> in, int current_year = current_utc_year());

/// Canonical column order written by write_csv.
const std::vector<std::string>& csv_columns();

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const DomainRecord& record);
void write_csv(std::ostream& out, std::span<const DomainRecord> records);
void write_csv(const std::filesystem::path& path, std::span<const DomainRecord> records);

/// Sidecar report: "line,violation".
void write_error_report(const std::filesystem::path& path, std::span<const RowIssue> issues);

/// Valuable iff a price is present and strictly above 100 USD. Unsold records are non_valuable.
Label label(const DomainRecord& record);

inline constexpr double kValueThresholdUsd = 100.0;

struct LabeledSet {
    std::vector<DomainRecord> records;
    std::vector<Label> labels;

    std::size_t size() const { return records.size(); }
    std::vector<int> signs() const;
};

LabeledSet make_labeled(std::vector<DomainRecord> records);

/// Scaled descriptors for every record, with scaling fitted on the same records.
std::vector<ScaledVector> scaled_descriptors(std::span<const DomainRecord> records, int reference_year,
                                             ScalingParams* fitted = nullptr);

/// Maximin selection of k points: starts from the mutually farthest pair, then repeatedly adds the point
/// farthest from everything selected. Exact distance ties are broken by a seed-derived priority.
/// Returns indices in selection order.
std::vector<std::size_t> kennard_stone(std::span<const ScaledVector> points, std::size_t k, std::uint64_t seed);

struct SplitResult {
    LabeledSet training;
    LabeledSet test;
    LabeledSet external;
    std::uint64_t seed = 0;
    /// Input indices of each part.
    std::vector<std::size_t> training_index;
    std::vector<std::size_t> test_index;
    std::vector<std::size_t> external_index;
};

/// Three-way split: ceil(n/3) training records chosen per class by maximin in scaled descriptor space,
/// the rest dealt alternately to test and external in descriptor-norm order within each class.
SplitResult diversity_split(const LabeledSet& set, std::uint64_t seed, int reference_year);

/// Reference year used for generated data; the generated first-capture years never exceed it.
inline constexpr int kSynthReferenceYear = 2016;

/// Synthetic records calibrated to the published class-conditional medians and ranges, with the five
/// feature groups planted as within-class correlated blocks.
LabeledSet synth_generate(std::size_t n, std::uint64_t seed);

}  // namespace domscreen
