#include "domscreen/metrics.hpp"

#include "domscreen/errors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace domscreen {

namespace {

void require_counts(const ConfusionCounts& c) {
    if (c.tp < 0 || c.tn < 0 || c.fp < 0 || c.fn < 0) throw ValidationError("confusion counts must be non-negative");
    if (c.total() < 1) throw ValidationError("confusion matrix is empty");
}

double ratio(std::int64_t num, std::int64_t den) { return static_cast<double>(num) / static_cast<double>(den); }

std::string cell(double v, const char* format) {
    if (std::isnan(v)) return "nan";
    char buf[48];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

}  // namespace

ConfusionCounts confusion(std::span<const Label> predictions, std::span<const Label> truths) {
    if (predictions.size() != truths.size()) {
        throw ValidationError("confusion: " + std::to_string(predictions.size()) + " predictions vs " +
                              std::to_string(truths.size()) + " truths");
    }
    if (predictions.empty()) throw ValidationError("confusion: no labels");
    ConfusionCounts c;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool p = predictions[i] == Label::valuable;
        const bool t = truths[i] == Label::valuable;
        if (p && t) {
            ++c.tp;
        } else if (!p && !t) {
            ++c.tn;
        } else if (p) {
            ++c.fp;
        } else {
            ++c.fn;
        }
    }
    return c;
}

double accuracy(const ConfusionCounts& c) {
    require_counts(c);
    return ratio(c.tp + c.tn, c.total());
}

double sensitivity(const ConfusionCounts& c) {
    require_counts(c);
    if (c.tp + c.fn == 0) throw ValidationError("sensitivity undefined: no valuable examples");
    return ratio(c.tp, c.tp + c.fn);
}

double specificity(const ConfusionCounts& c) {
    require_counts(c);
    if (c.fp + c.tn == 0) throw ValidationError("specificity undefined: no non_valuable examples");
    return ratio(c.tn, c.fp + c.tn);
}

double mcc(const ConfusionCounts& c) {
    require_counts(c);
    const double tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
    const double fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
    const double a = tp + fn, b = tp + fp, d = tn + fp, e = tn + fn;
    if (a == 0.0 || b == 0.0 || d == 0.0 || e == 0.0) return 0.0;
    // Two square roots avoid overflowing the product for very large counts.
    return (tp * tn - fp * fn) / (std::sqrt(a * b) * std::sqrt(d * e));
}

EvaluationRow evaluation_row(std::string set_name, const ConfusionCounts& c) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    EvaluationRow row{std::move(set_name), c, accuracy(c), nan, nan, mcc(c)};
    if (c.tp + c.fn > 0) row.se = sensitivity(c);
    if (c.fp + c.tn > 0) row.sp = specificity(c);
    return row;
}

std::string format_table(std::span<const EvaluationRow> rows) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-14s %7s %7s %7s %7s %7s %7s %7s %7s\n", "set", "TP", "TN", "FP", "FN", "ACC",
                  "SE", "SP", "MCC");
    out << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-14s %7lld %7lld %7lld %7lld %7s %7s %7s %7s\n", r.set_name.c_str(),
                      static_cast<long long>(r.counts.tp), static_cast<long long>(r.counts.tn),
                      static_cast<long long>(r.counts.fp), static_cast<long long>(r.counts.fn),
                      cell(r.acc, "%.3f").c_str(), cell(r.se, "%.3f").c_str(), cell(r.sp, "%.3f").c_str(),
                      cell(r.mcc, "%.3f").c_str());
        out << buf;
    }
    return out.str();
}

std::string format_csv(std::span<const EvaluationRow> rows) {
    std::ostringstream out;
    out << "set,TP,TN,FP,FN,ACC,SE,SP,MCC\n";
    for (const auto& r : rows) {
        out << r.set_name << ',' << r.counts.tp << ',' << r.counts.tn << ',' << r.counts.fp << ',' << r.counts.fn
            << ',' << cell(r.acc, "%.17g") << ',' << cell(r.se, "%.17g") << ',' << cell(r.sp, "%.17g") << ','
            << cell(r.mcc, "%.17g") << '\n';
    }
    return out.str();
}

}  // namespace domscreen
