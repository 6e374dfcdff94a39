#include "domscreen/clustering.hpp"

#include "domscreen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

namespace domscreen {

FeatureMatrix::FeatureMatrix(std::vector<std::string> columns, std::size_t rows)
    : columns_(std::move(columns)), rows_(rows), data_(rows * columns_.size(), 0.0) {}

FeatureMatrix::FeatureMatrix(std::vector<std::string> columns, std::vector<std::vector<double>> column_values)
    : columns_(std::move(columns)) {
    if (column_values.size() != columns_.size()) throw ValidationError("column count does not match names");
    rows_ = column_values.empty() ? 0 : column_values.front().size();
    data_.resize(rows_ * columns_.size());
    for (std::size_t c = 0; c < column_values.size(); ++c) {
        if (column_values[c].size() != rows_) throw ValidationError("feature matrix is not rectangular");
        for (std::size_t r = 0; r < rows_; ++r) at(r, c) = column_values[c][r];
    }
}

std::vector<double> FeatureMatrix::column(std::size_t col) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, col);
    return out;
}

void FeatureMatrix::check() const {
    if (rows_ < 2) throw ValidationError("feature matrix needs at least 2 rows");
    if (cols() < 2) throw ValidationError("feature matrix needs at least 2 columns");
    for (const double v : data_) {
        if (!std::isfinite(v)) throw ValidationError("feature matrix has a missing or non-finite cell");
    }
}

FeatureMatrix make_feature_matrix(std::span<const DomainRecord> records, int reference_year,
                                  MatrixOrientation orientation) {
    std::vector<std::string> names;
    for (const auto kind : kClusterFeatures) names.emplace_back(feature_name(kind));
    FeatureMatrix m(std::move(names), records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        for (std::size_t c = 0; c < kClusterFeatures.size(); ++c) {
            const auto raw = records[r].get(kClusterFeatures[c]);
            m.at(r, c) = orientation == MatrixOrientation::raw
                             ? static_cast<double>(raw)
                             : transform_feature(raw, kClusterFeatures[c], reference_year);
        }
    }
    return m;
}

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        // positions i..j (0-based) share the mean of ranks i+1..j+1
        const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

SpearmanResult spearman_rho(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("spearman_rho: length mismatch");
    if (x.size() < 2) throw ValidationError("spearman_rho: need at least 2 observations");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);

    // Accumulate over rank pairs in sorted order so the result does not depend on row order.
    std::vector<std::pair<double, double>> pairs(rx.size());
    for (std::size_t i = 0; i < rx.size(); ++i) pairs[i] = {rx[i], ry[i]};
    std::sort(pairs.begin(), pairs.end());

    const double n = static_cast<double>(pairs.size());
    const double mean = (n + 1.0) / 2.0;  // mean of average ranks is always (n+1)/2
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const auto& [a, b] : pairs) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean) * (a - mean);
        syy += (b - mean) * (b - mean);
    }
    if (sxx == 0.0 || syy == 0.0) return {0.0, true};
    const double rho = sxy / std::sqrt(sxx * syy);
    return {std::clamp(rho, -1.0, 1.0), false};
}

CorrelationMatrix correlation_matrix(const FeatureMatrix& m) {
    m.check();
    const std::size_t n = m.cols();
    CorrelationMatrix out;
    out.names = m.column_names();
    out.values.assign(n * n, 0.0);
    std::vector<std::vector<double>> cols(n);
    for (std::size_t c = 0; c < n; ++c) cols[c] = m.column(c);
    std::vector<bool> constant(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto r = spearman_rho(cols[i], cols[j]);
            out.values[i * n + j] = r.rho;
            out.values[j * n + i] = r.rho;
        }
        const auto& c = cols[i];
        constant[i] = std::all_of(c.begin(), c.end(), [&](double v) { return v == c.front(); });
        if (constant[i]) out.constant_columns.push_back(i);
    }
    return out;
}

Dendrogram average_linkage(std::span<const double> distances, std::vector<std::string> labels) {
    const std::size_t n = labels.size();
    if (n < 2) throw ValidationError("clustering needs at least 2 columns");
    if (distances.size() != n * n) throw ValidationError("distance matrix size does not match labels");

    // Active clusters: node id, smallest leaf id, size. dist holds the current linkage distances.
    struct Cluster {
        std::size_t node;
        std::size_t min_leaf;
        std::size_t size;
    };
    std::vector<Cluster> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = {i, i, 1};
    std::vector<std::vector<double>> dist(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) dist[i][j] = distances[i * n + j];
    }

    Dendrogram d;
    d.labels = std::move(labels);
    d.merges.reserve(n - 1);
    std::size_t next_node = n;
    while (active.size() > 1) {
        std::size_t best_a = 0, best_b = 1;
        double best = std::numeric_limits<double>::infinity();
        std::pair<std::size_t, std::size_t> best_key{SIZE_MAX, SIZE_MAX};
        for (std::size_t a = 0; a < active.size(); ++a) {
            for (std::size_t b = a + 1; b < active.size(); ++b) {
                const double v = dist[a][b];
                const std::pair key{std::min(active[a].min_leaf, active[b].min_leaf),
                                    std::max(active[a].min_leaf, active[b].min_leaf)};
                if (v < best || (v == best && key < best_key)) {
                    best = v;
                    best_key = key;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        const Cluster& ca = active[best_a];
        const Cluster& cb = active[best_b];
        const bool a_first = ca.min_leaf < cb.min_leaf;
        Merge merge;
        merge.left = a_first ? ca.node : cb.node;
        merge.right = a_first ? cb.node : ca.node;
        merge.distance = best;
        merge.size = ca.size + cb.size;
        d.merges.push_back(merge);

        // Lance-Williams update for average linkage, stored in slot best_a.
        const double wa = static_cast<double>(ca.size);
        const double wb = static_cast<double>(cb.size);
        for (std::size_t k = 0; k < active.size(); ++k) {
            if (k == best_a || k == best_b) continue;
            const double v = (wa * dist[best_a][k] + wb * dist[best_b][k]) / (wa + wb);
            dist[best_a][k] = v;
            dist[k][best_a] = v;
        }
        active[best_a] = {next_node++, std::min(ca.min_leaf, cb.min_leaf), merge.size};
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
        dist.erase(dist.begin() + static_cast<std::ptrdiff_t>(best_b));
        for (auto& row : dist) row.erase(row.begin() + static_cast<std::ptrdiff_t>(best_b));
    }
    return d;
}

Dendrogram hcluster(const FeatureMatrix& m) {
    if (m.cols() < 2) throw ValidationError("clustering needs at least 2 columns");
    const auto corr = correlation_matrix(m);
    const std::size_t n = corr.size();
    std::vector<double> distances(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) distances[i * n + j] = i == j ? 0.0 : 1.0 - corr.at(i, j);
    }
    return average_linkage(distances, corr.names);
}

namespace {

void collect_leaves(const Dendrogram& d, std::size_t node, std::vector<std::size_t>& out) {
    const std::size_t n = d.leaves();
    if (node < n) {
        out.push_back(node);
        return;
    }
    const auto& m = d.merges[node - n];
    collect_leaves(d, m.left, out);
    collect_leaves(d, m.right, out);
}

}  // namespace

Partition cut(const Dendrogram& d, std::size_t k) {
    const std::size_t n = d.leaves();
    if (k < 1 || k > n) {
        throw ValidationError("cut: k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    }
    // Roots after applying the first n - k merges.
    std::vector<bool> absorbed(n + d.merges.size(), false);
    const std::size_t applied = n - k;
    for (std::size_t i = 0; i < applied; ++i) {
        absorbed[d.merges[i].left] = true;
        absorbed[d.merges[i].right] = true;
    }
    Partition groups;
    for (std::size_t node = 0; node < n + applied; ++node) {
        if (absorbed[node]) continue;
        std::vector<std::size_t> leaves;
        collect_leaves(d, node, leaves);
        std::sort(leaves.begin(), leaves.end());
        groups.push_back(std::move(leaves));
    }
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return groups;
}

std::vector<std::size_t> partition_labels(const Partition& p, std::size_t n) {
    std::vector<std::size_t> labels(n, SIZE_MAX);
    for (std::size_t g = 0; g < p.size(); ++g) {
        for (const auto leaf : p[g]) {
            if (leaf >= n) throw ValidationError("partition leaf id out of range");
            labels[leaf] = g;
        }
    }
    if (std::find(labels.begin(), labels.end(), SIZE_MAX) != labels.end()) {
        throw ValidationError("partition does not cover every leaf");
    }
    return labels;
}

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.size() != b.size()) throw ValidationError("adjusted_rand_index: length mismatch");
    const std::size_t n = a.size();
    if (n < 2) return 1.0;
    const std::size_t ka = *std::max_element(a.begin(), a.end()) + 1;
    const std::size_t kb = *std::max_element(b.begin(), b.end()) + 1;
    std::vector<double> table(ka * kb, 0.0), rows(ka, 0.0), cols(kb, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        table[a[i] * kb + b[i]] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const double v : table) sum_cells += choose2(v);
    for (const double v : rows) sum_rows += choose2(v);
    for (const double v : cols) sum_cols += choose2(v);
    const double total = choose2(static_cast<double>(n));
    const double expected = sum_rows * sum_cols / total;
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 1.0;  // both partitions trivial and identical in structure
    return (sum_cells - expected) / (max_index - expected);
}

const std::vector<NamedGroup>& reference_groups() {
    using enum FeatureKind;
    static const std::vector<NamedGroup> groups = {
        {"Domain Authority", {pr, da, pa, bl, dp}},
        {"Domain Traffic", {alexa, similarweb}},
        {"Active Domain Age", {dob, acr}},
        {"Domain Health", {sb, pb, ab}},
        {"Name Quality", {sv, te}},
    };
    return groups;
}

std::vector<std::size_t> reference_labels() {
    std::vector<std::size_t> labels(kClusterFeatures.size(), 0);
    const auto& groups = reference_groups();
    for (std::size_t c = 0; c < kClusterFeatures.size(); ++c) {
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const auto& m = groups[g].members;
            if (std::find(m.begin(), m.end(), kClusterFeatures[c]) != m.end()) labels[c] = g;
        }
    }
    return labels;
}

std::vector<std::string> name_groups(const Partition& p, const std::vector<std::string>& column_names) {
    const auto& refs = reference_groups();
    std::vector<std::vector<std::size_t>> overlap(p.size(), std::vector<std::size_t>(refs.size(), 0));
    for (std::size_t g = 0; g < p.size(); ++g) {
        for (const auto leaf : p[g]) {
            for (std::size_t r = 0; r < refs.size(); ++r) {
                for (const auto kind : refs[r].members) {
                    if (leaf < column_names.size() && column_names[leaf] == feature_name(kind)) ++overlap[g][r];
                }
            }
        }
    }
    std::vector<std::string> names(p.size(), "unassigned");
    std::vector<bool> group_done(p.size(), false), ref_done(refs.size(), false);
    // Greedy: repeatedly take the largest remaining overlap; ties go to the lower group, then lower reference.
    for (;;) {
        std::size_t best = 0, bg = 0, br = 0;
        for (std::size_t g = 0; g < p.size(); ++g) {
            if (group_done[g]) continue;
            for (std::size_t r = 0; r < refs.size(); ++r) {
                if (!ref_done[r] && overlap[g][r] > best) {
                    best = overlap[g][r];
                    bg = g;
                    br = r;
                }
            }
        }
        if (best == 0) break;
        names[bg] = refs[br].name;
        group_done[bg] = true;
        ref_done[br] = true;
    }
    return names;
}

std::string render_dendrogram(const Dendrogram& d) {
    std::ostringstream out;
    const std::size_t n = d.leaves();
    std::function<void(std::size_t, int)> walk = [&](std::size_t node, int depth) {
        out << std::string(static_cast<std::size_t>(depth) * 2, ' ');
        if (node < n) {
            out << d.labels[node] << '\n';
            return;
        }
        const auto& m = d.merges[node - n];
        char buf[64];
        std::snprintf(buf, sizeof buf, "+ d=%.4f n=%zu\n", m.distance, m.size);
        out << buf;
        walk(m.left, depth + 1);
        walk(m.right, depth + 1);
    };
    if (n == 1) {
        walk(0, 0);
    } else if (!d.merges.empty()) {
        walk(n + d.merges.size() - 1, 0);
    }
    return out.str();
}

}  // namespace domscreen
