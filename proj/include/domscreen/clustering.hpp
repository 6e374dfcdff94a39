#pragma once

#include "domscreen/feature_model.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace domscreen {

/// Columns used for feature clustering, in FeatureMatrix order.
inline constexpr std::array<FeatureKind, 14> kClusterFeatures = {
    FeatureKind::pr,  FeatureKind::da,  FeatureKind::pa,         FeatureKind::bl,  FeatureKind::dp,
    FeatureKind::acr, FeatureKind::alexa, FeatureKind::similarweb, FeatureKind::dob, FeatureKind::sv,
    FeatureKind::te,  FeatureKind::sb,  FeatureKind::pb,         FeatureKind::ab};

/// Row-major numeric matrix: rows are domains, columns are named features.
class FeatureMatrix {
public:
    FeatureMatrix(std::vector<std::string> columns, std::size_t rows);
    FeatureMatrix(std::vector<std::string> columns, std::vector<std::vector<double>> column_values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return columns_.size(); }
    const std::vector<std::string>& column_names() const { return columns_; }

    double& at(std::size_t row, std::size_t col) { return data_[row * cols() + col]; }
    double at(std::size_t row, std::size_t col) const { return data_[row * cols() + col]; }
    std::vector<double> column(std::size_t col) const;

    /// Throws ValidationError unless rows >= 2, cols >= 2 and every cell is finite.
    void check() const;

private:
    std::vector<std::string> columns_;
    std::size_t rows_ = 0;
    std::vector<double> data_;
};

enum class MatrixOrientation {
    /// Raw values as ingested.
    raw,
    /// transform_feature goodness scores: every column increases with value.
    goodness,
};

FeatureMatrix make_feature_matrix(std::span<const DomainRecord> records, int reference_year,
                                  MatrixOrientation orientation = MatrixOrientation::goodness);

/// Average ranks (1-based); tied values share the mean of their rank span.
std::vector<double> average_ranks(std::span<const double> x);

struct SpearmanResult {
    double rho = 0.0;
    /// Set when either input has zero rank variance; rho is then defined as 0.
    bool degenerate = false;
};

SpearmanResult spearman_rho(std::span<const double> x, std::span<const double> y);

struct CorrelationMatrix {
    std::vector<std::string> names;
    std::vector<double> values;
    /// Columns whose values are all tied.
    std::vector<std::size_t> constant_columns;

    std::size_t size() const { return names.size(); }
    double at(std::size_t i, std::size_t j) const { return values[i * names.size() + j]; }
};

CorrelationMatrix correlation_matrix(const FeatureMatrix& m);

/// One agglomeration step. Leaves are 0..n-1; the k-th merge creates node n + k.
struct Merge {
    std::size_t left = 0;
    std::size_t right = 0;
    double distance = 0.0;
    std::size_t size = 0;
};

struct Dendrogram {
    std::vector<std::string> labels;
    std::vector<Merge> merges;

    std::size_t leaves() const { return labels.size(); }
};

/// Average-linkage agglomeration over a symmetric n x n distance matrix (row-major).
/// Equal-distance candidates are ordered by (smaller min-leaf id, larger min-leaf id).
Dendrogram average_linkage(std::span<const double> distances, std::vector<std::string> labels);

/// Clusters columns with d(i, j) = 1 - spearman_rho(col_i, col_j).
Dendrogram hcluster(const FeatureMatrix& m);

using Partition = std::vector<std::vector<std::size_t>>;

/// Undo the last k - 1 merges. Groups are sorted internally and ordered by smallest leaf id.
Partition cut(const Dendrogram& d, std::size_t k);

/// Group index per leaf.
std::vector<std::size_t> partition_labels(const Partition& p, std::size_t n);

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b);

struct NamedGroup {
    std::string name;
    std::vector<FeatureKind> members;
};

/// The five reference feature groups (authority, traffic, active age, health, name quality).
const std::vector<NamedGroup>& reference_groups();

/// Reference group index of each kClusterFeatures column.
std::vector<std::size_t> reference_labels();

/// Attaches a reference-group name to each group of `p` by greedy best overlap on column names.
/// Groups with no overlap left get "unassigned".
std::vector<std::string> name_groups(const Partition& p, const std::vector<std::string>& column_names);

/// Indented text rendering, one node per line.
std::string render_dendrogram(const Dendrogram& d);

}  // namespace domscreen
