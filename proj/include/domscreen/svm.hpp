#pragma once

#include "domscreen/feature_model.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace domscreen {

enum class KernelKind { linear, polynomial, rbf };

struct KernelSpec {
    KernelKind kind = KernelKind::rbf;
    double gamma = 1.0;
    int degree = 3;
    double coef0 = 0.0;

    static KernelSpec linear() { return {KernelKind::linear, 1.0, 1, 0.0}; }
    static KernelSpec rbf(double gamma) { return {KernelKind::rbf, gamma, 3, 0.0}; }
    static KernelSpec polynomial(double gamma, int degree, double coef0) {
        return {KernelKind::polynomial, gamma, degree, coef0};
    }

    /// Throws ConfigError when gamma <= 0 (rbf, polynomial) or degree < 1.
    void check() const;

    bool operator==(const KernelSpec&) const = default;
};

std::string_view kernel_name(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view name);

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

/// Positive class (+1) is "valuable".
enum class Label : int { non_valuable = -1, valuable = 1 };

inline int sign_of(Label l) { return static_cast<int>(l); }

struct TrainConfig {
    double C = 1.0;
    KernelSpec kernel;
    double tolerance = 1e-3;
    /// Iteration budget is max_passes * n pair updates.
    std::int64_t max_passes = 10'000;
    double alpha_epsilon = 1e-12;
};

inline constexpr int kModelFormatVersion = 1;

struct SvmModel {
    KernelSpec kernel;
    double C = 1.0;
    std::vector<ScaledVector> support_vectors;
    /// alpha_i * y_i for each support vector.
    std::vector<double> dual_coeffs;
    double bias = 0.0;
    ScalingParams scaling;
    int format_version = kModelFormatVersion;
    /// Set by smo_train when the iteration budget ran out before the KKT tolerance was met.
    bool converged = true;
    std::int64_t iterations = 0;
};

/// Full dual solution, before tiny alphas are dropped. Kept for diagnostics and tests.
struct DualSolution {
    std::vector<double> alpha;
    double bias = 0.0;
    double objective = 0.0;
    bool converged = true;
    std::int64_t iterations = 0;
};

/// Two-variable SMO on the C-SVC dual. labels are +1 / -1.
DualSolution smo_solve(std::span<const ScaledVector> points, std::span<const int> labels, const TrainConfig& cfg);

/// smo_solve, then packs the support vectors (alpha >= alpha_epsilon) into a model.
/// The returned model carries default ScalingParams; callers attach theirs.
SvmModel smo_train(std::span<const ScaledVector> points, std::span<const int> labels, const TrainConfig& cfg);

/// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double dual_objective(std::span<const ScaledVector> points, std::span<const int> labels,
                      std::span<const double> alpha, const KernelSpec& kernel);

double decision_value(const SvmModel& model, std::span<const double> x);

struct Prediction {
    Label label = Label::non_valuable;
    double decision = 0.0;
    ScaledVector scaled{};
};

/// Exactly zero is non_valuable.
Label label_from_decision(double decision);

Prediction predict(const SvmModel& model, const DomainRecord& record, int reference_year);

struct ExponentRange {
    int start = 0;
    int end = 0;
    int step = 1;

    std::vector<int> values() const;
};

/// Parses "start:end:step" (step defaults to 1 when omitted). Throws ConfigError on bad input or an empty range.
ExponentRange parse_exponent_range(std::string_view text);

inline constexpr ExponentRange kDefaultCGrid{-5, 15, 2};
inline constexpr ExponentRange kDefaultGammaGrid{-15, 3, 2};

struct GridCell {
    int log2_c = 0;
    int log2_gamma = 0;
    double C = 0.0;
    double gamma = 0.0;
    double cv_accuracy = 0.0;
    std::vector<double> fold_accuracy;
};

struct GridSearchResult {
    double best_c = 0.0;
    double best_gamma = 0.0;
    double best_accuracy = 0.0;
    std::vector<GridCell> table;
};

struct GridSearchOptions {
    ExponentRange c_grid = kDefaultCGrid;
    ExponentRange gamma_grid = kDefaultGammaGrid;
    int folds = 5;
    std::uint64_t seed = 0;
    /// Worker threads evaluating cells; results do not depend on it.
    int width = 1;
    double tolerance = 1e-3;
    std::int64_t max_passes = 10'000;
};

/// Stratified fold id per sample, deterministic in seed. Throws ValidationError when a class has fewer
/// members than folds.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

/// RBF grid search over (2^a, 2^b) with stratified k-fold CV accuracy.
/// Best = highest mean accuracy; ties go to smaller C, then smaller gamma.
GridSearchResult grid_search(std::span<const ScaledVector> points, std::span<const int> labels,
                             const GridSearchOptions& options);

void write_model(const SvmModel& model, std::ostream& out);
SvmModel read_model(std::istream& in);
void save_model(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_model(const std::filesystem::path& path);

}  // namespace domscreen
