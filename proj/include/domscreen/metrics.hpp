#pragma once

#include "domscreen/svm.hpp"

#include <cstdint>
#include <span>
#include <string>

namespace domscreen {

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t tn = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + tn + fp + fn; }
    bool operator==(const ConfusionCounts&) const = default;
};

/// 2x2 contingency with valuable as the positive class.
ConfusionCounts confusion(std::span<const Label> predictions, std::span<const Label> truths);

double accuracy(const ConfusionCounts& c);
/// TP / (TP + FN). Throws ValidationError when no positives are present.
double sensitivity(const ConfusionCounts& c);
/// TN / (FP + TN). Throws ValidationError when no negatives are present.
double specificity(const ConfusionCounts& c);
/// Matthews correlation; 0 when any factor under the square root is zero.
double mcc(const ConfusionCounts& c);

/// One evaluation row: TP TN FP FN ACC SE SP MCC. Undefined SE/SP print as "nan".
struct EvaluationRow {
    std::string set_name;
    ConfusionCounts counts;
    double acc = 0.0;
    double se = 0.0;
    double sp = 0.0;
    double mcc = 0.0;
};

EvaluationRow evaluation_row(std::string set_name, const ConfusionCounts& c);

/// Aligned text table with a header line, metrics rounded to 3 decimals.
std::string format_table(std::span<const EvaluationRow> rows);
/// CSV with header set,TP,TN,FP,FN,ACC,SE,SP,MCC; metrics at full precision.
std::string format_csv(std::span<const EvaluationRow> rows);

}  // namespace domscreen
