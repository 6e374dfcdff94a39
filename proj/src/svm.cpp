#include "domscreen/svm.hpp"

#include "domscreen/errors.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace domscreen {

void KernelSpec::check() const {
    if (kind != KernelKind::linear && !(gamma > 0.0 && std::isfinite(gamma))) {
        throw ConfigError("kernel gamma must be positive");
    }
    if (kind == KernelKind::polynomial && degree < 1) throw ConfigError("polynomial degree must be >= 1");
    if (!std::isfinite(coef0)) throw ConfigError("kernel coef0 must be finite");
}

std::string_view kernel_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::linear: return "linear";
        case KernelKind::polynomial: return "polynomial";
        case KernelKind::rbf: return "rbf";
    }
    return "rbf";
}

KernelKind parse_kernel_kind(std::string_view name) {
    if (name == "linear") return KernelKind::linear;
    if (name == "polynomial") return KernelKind::polynomial;
    if (name == "rbf") return KernelKind::rbf;
    throw ConfigError("unknown kernel '" + std::string(name) + "'");
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
    const std::size_t n = std::min(x.size(), y.size());
    switch (spec.kind) {
        case KernelKind::linear: {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += x[i] * y[i];
            return dot;
        }
        case KernelKind::polynomial: {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += x[i] * y[i];
            return std::pow(spec.gamma * dot + spec.coef0, spec.degree);
        }
        case KernelKind::rbf: {
            double sq = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = x[i] - y[i];
                sq += d * d;
            }
            return std::exp(-spec.gamma * sq);
        }
    }
    return 0.0;
}

namespace {

constexpr double kTau = 1e-12;

std::vector<double> gram_matrix(std::span<const ScaledVector> points, const KernelSpec& kernel) {
    const std::size_t n = points.size();
    std::vector<double> k(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = kernel_eval(kernel, points[i], points[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    return k;
}

void check_training_input(std::span<const ScaledVector> points, std::span<const int> labels) {
    if (points.size() != labels.size()) throw ValidationError("points and labels differ in length");
    if (points.size() < 2) throw ValidationError("training needs at least 2 points");
    bool pos = false, neg = false;
    for (const int y : labels) {
        if (y == 1) {
            pos = true;
        } else if (y == -1) {
            neg = true;
        } else {
            throw ValidationError("labels must be +1 or -1");
        }
    }
    if (!pos || !neg) {
        throw ValidationError(std::string("training set has no ") + (pos ? "non_valuable" : "valuable") +
                              " examples");
    }
    for (const auto& p : points) {
        for (const double v : p) {
            if (!std::isfinite(v)) throw ValidationError("training point is not finite");
        }
    }
}

// SMO over a precomputed Gram matrix (row-major n x n).
DualSolution solve_gram(std::span<const double> gram, std::span<const int> y, double C, double tol,
                        std::int64_t max_passes) {
    const std::size_t n = y.size();
    DualSolution sol;
    sol.alpha.assign(n, 0.0);
    auto& alpha = sol.alpha;
    // Gradient of 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij.
    std::vector<double> grad(n, -1.0);
    const auto Q = [&](std::size_t i, std::size_t j) { return static_cast<double>(y[i] * y[j]) * gram[i * n + j]; };
    const auto in_up = [&](std::size_t t) { return y[t] == 1 ? alpha[t] < C : alpha[t] > 0.0; };
    const auto in_low = [&](std::size_t t) { return y[t] == 1 ? alpha[t] > 0.0 : alpha[t] < C; };

    const std::int64_t budget = max_passes * static_cast<std::int64_t>(n);
    std::int64_t iter = 0;
    sol.converged = false;
    for (; iter < budget; ++iter) {
        // First index: largest -y G over the up set. Second: smallest -y G over the low set, which
        // maximizes |E_i - E_j| among admissible partners. Scans run in index order; ties keep the first.
        std::size_t i = n, j = n;
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(t) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(t) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        if (i == n || j == n || gmax - gmin < tol) {
            sol.converged = true;
            break;
        }

        const double old_ai = alpha[i];
        const double old_aj = alpha[j];
        const double qii = Q(i, i), qjj = Q(j, j), qij = Q(i, j);
        if (y[i] != y[j]) {
            double quad = qii + qjj + 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = qii + qjj - 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        // C - diff and sum - C can land a few ulps off a bound.
        const double snap = 1e-12 * C;
        for (const std::size_t t : {i, j}) {
            if (alpha[t] < snap) alpha[t] = 0.0;
            else if (alpha[t] > C - snap) alpha[t] = C;
        }

        const double dai = alpha[i] - old_ai;
        const double daj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t) grad[t] += Q(i, t) * dai + Q(j, t) * daj;
    }
    sol.iterations = iter;

    // Bias: mean over free vectors, otherwise the midpoint of the feasible interval.
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double up_max = -std::numeric_limits<double>::infinity();
    double low_min = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
        const double v = -y[t] * grad[t];
        if (alpha[t] > 0.0 && alpha[t] < C) {
            free_sum += v;
            ++free_count;
        }
        if (in_up(t)) up_max = std::max(up_max, v);
        if (in_low(t)) low_min = std::min(low_min, v);
    }
    if (free_count > 0) {
        sol.bias = free_sum / static_cast<double>(free_count);
    } else if (std::isfinite(up_max) && std::isfinite(low_min)) {
        sol.bias = 0.5 * (up_max + low_min);
    } else {
        sol.bias = std::isfinite(up_max) ? up_max : low_min;
    }

    double obj = 0.0;
    for (std::size_t t = 0; t < n; ++t) obj += alpha[t] * (grad[t] - 1.0);
    sol.objective = -0.5 * obj;
    return sol;
}

SvmModel pack_model(std::span<const ScaledVector> points, std::span<const int> labels, const TrainConfig& cfg,
                    const DualSolution& sol) {
    SvmModel model;
    model.kernel = cfg.kernel;
    model.C = cfg.C;
    model.bias = sol.bias;
    model.converged = sol.converged;
    model.iterations = sol.iterations;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (sol.alpha[i] >= cfg.alpha_epsilon) {
            model.support_vectors.push_back(points[i]);
            model.dual_coeffs.push_back(sol.alpha[i] * labels[i]);
        }
    }
    return model;
}

}  // namespace

DualSolution smo_solve(std::span<const ScaledVector> points, std::span<const int> labels, const TrainConfig& cfg) {
    check_training_input(points, labels);
    cfg.kernel.check();
    if (!(cfg.C > 0.0)) throw ConfigError("C must be positive");
    if (!(cfg.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (cfg.max_passes < 1) throw ConfigError("max_passes must be >= 1");
    const auto gram = gram_matrix(points, cfg.kernel);
    return solve_gram(gram, labels, cfg.C, cfg.tolerance, cfg.max_passes);
}

SvmModel smo_train(std::span<const ScaledVector> points, std::span<const int> labels, const TrainConfig& cfg) {
    const auto sol = smo_solve(points, labels, cfg);
    return pack_model(points, labels, cfg, sol);
}

double dual_objective(std::span<const ScaledVector> points, std::span<const int> labels,
                      std::span<const double> alpha, const KernelSpec& kernel) {
    double linear = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        linear += alpha[i];
        for (std::size_t j = 0; j < points.size(); ++j) {
            quad += alpha[i] * alpha[j] * labels[i] * labels[j] * kernel_eval(kernel, points[i], points[j]);
        }
    }
    return linear - 0.5 * quad;
}

double decision_value(const SvmModel& model, std::span<const double> x) {
    double f = model.bias;
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
        f += model.dual_coeffs[i] * kernel_eval(model.kernel, model.support_vectors[i], x);
    }
    return f;
}

Label label_from_decision(double decision) { return decision > 0.0 ? Label::valuable : Label::non_valuable; }

Prediction predict(const SvmModel& model, const DomainRecord& record, int reference_year) {
    validate(record, std::max(reference_year, current_utc_year()));
    Prediction p;
    p.scaled = apply_scaling(model.scaling, compute_descriptors(record, reference_year));
    p.decision = decision_value(model, p.scaled);
    p.label = label_from_decision(p.decision);
    return p;
}

std::vector<int> ExponentRange::values() const {
    std::vector<int> out;
    if (step == 0) return out;
    if (step > 0) {
        for (int v = start; v <= end; v += step) out.push_back(v);
    } else {
        for (int v = start; v >= end; v += step) out.push_back(v);
    }
    return out;
}

ExponentRange parse_exponent_range(std::string_view text) {
    std::vector<int> parts;
    std::size_t pos = 0;
    while (true) {
        const auto colon = text.find(':', pos);
        const auto tok = text.substr(pos, colon == std::string_view::npos ? std::string_view::npos : colon - pos);
        int v = 0;
        const auto* first = tok.data();
        const auto* last = tok.data() + tok.size();
        if (!tok.empty() && *first == '+') ++first;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (tok.empty() || ec != std::errc() || ptr != last) {
            throw ConfigError("bad exponent range '" + std::string(text) + "', expected start:end:step");
        }
        parts.push_back(v);
        if (colon == std::string_view::npos) break;
        pos = colon + 1;
    }
    ExponentRange r;
    if (parts.size() == 1) {
        r = {parts[0], parts[0], 1};
    } else if (parts.size() == 2) {
        r = {parts[0], parts[1], 1};
    } else if (parts.size() == 3) {
        r = {parts[0], parts[1], parts[2]};
    } else {
        throw ConfigError("bad exponent range '" + std::string(text) + "', expected start:end:step");
    }
    if (r.step == 0 || r.values().empty()) throw ConfigError("exponent range '" + std::string(text) + "' is empty");
    return r;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
    if (folds < 2) throw ValidationError("folds must be >= 2");
    std::vector<int> fold(labels.size(), 0);
    std::mt19937_64 rng(seed);
    for (const int cls : {1, -1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == cls) idx.push_back(i);
        }
        if (idx.size() < static_cast<std::size_t>(folds)) {
            throw ValidationError(std::string(cls == 1 ? "valuable" : "non_valuable") + " class has " +
                                  std::to_string(idx.size()) + " members, fewer than " + std::to_string(folds) +
                                  " folds");
        }
        // Fisher-Yates on the raw engine output keeps fold assignment identical across standard libraries.
        for (std::size_t k = idx.size(); k > 1; --k) {
            const std::size_t r = static_cast<std::size_t>(rng() % k);
            std::swap(idx[k - 1], idx[r]);
        }
        for (std::size_t k = 0; k < idx.size(); ++k) fold[idx[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
    }
    return fold;
}

GridSearchResult grid_search(std::span<const ScaledVector> points, std::span<const int> labels,
                             const GridSearchOptions& options) {
    check_training_input(points, labels);
    const auto c_exp = options.c_grid.values();
    const auto g_exp = options.gamma_grid.values();
    if (c_exp.empty() || g_exp.empty()) throw ConfigError("grid search needs non-empty grids");
    const auto fold = stratified_folds(labels, options.folds, options.seed);
    const std::size_t n = points.size();

    std::vector<std::vector<double>> grams(g_exp.size());
    for (std::size_t g = 0; g < g_exp.size(); ++g) grams[g] = gram_matrix(points, KernelSpec::rbf(std::ldexp(1.0, g_exp[g])));

    GridSearchResult result;
    result.table.resize(c_exp.size() * g_exp.size());
    for (std::size_t ci = 0; ci < c_exp.size(); ++ci) {
        for (std::size_t gi = 0; gi < g_exp.size(); ++gi) {
            auto& cell = result.table[ci * g_exp.size() + gi];
            cell.log2_c = c_exp[ci];
            cell.log2_gamma = g_exp[gi];
            cell.C = std::ldexp(1.0, c_exp[ci]);
            cell.gamma = std::ldexp(1.0, g_exp[gi]);
        }
    }

    auto evaluate = [&](GridCell& cell, std::size_t gi) {
        const auto& full = grams[gi];
        cell.fold_accuracy.assign(static_cast<std::size_t>(options.folds), 0.0);
        for (int f = 0; f < options.folds; ++f) {
            std::vector<std::size_t> train, held;
            for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? held : train).push_back(i);
            const std::size_t m = train.size();
            std::vector<double> sub(m * m);
            std::vector<int> ys(m);
            for (std::size_t a = 0; a < m; ++a) {
                ys[a] = labels[train[a]];
                for (std::size_t b = 0; b < m; ++b) sub[a * m + b] = full[train[a] * n + train[b]];
            }
            const auto sol = solve_gram(sub, ys, cell.C, options.tolerance, options.max_passes);
            std::size_t correct = 0;
            for (const auto h : held) {
                double f_val = sol.bias;
                for (std::size_t a = 0; a < m; ++a) {
                    if (sol.alpha[a] > 0.0) f_val += sol.alpha[a] * ys[a] * full[train[a] * n + h];
                }
                if (sign_of(label_from_decision(f_val)) == labels[h]) ++correct;
            }
            cell.fold_accuracy[static_cast<std::size_t>(f)] =
                static_cast<double>(correct) / static_cast<double>(held.size());
        }
        double sum = 0.0;
        for (const double a : cell.fold_accuracy) sum += a;
        cell.cv_accuracy = sum / static_cast<double>(options.folds);
    };

    const std::size_t cells = result.table.size();
    const std::size_t width = static_cast<std::size_t>(std::max(1, options.width));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < cells; k = next++) evaluate(result.table[k], k % g_exp.size());
    };
    if (width == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < std::min(width, cells); ++w) pool.emplace_back(worker);
    }

    // Fixed grid order: C ascending outer, gamma ascending inner, so ">" keeps the smallest C then gamma.
    std::vector<std::size_t> order(cells);
    for (std::size_t k = 0; k < cells; ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = result.table[a];
        const auto& y = result.table[b];
        return std::pair(x.C, x.gamma) < std::pair(y.C, y.gamma);
    });
    result.best_accuracy = -1.0;
    for (const auto k : order) {
        const auto& cell = result.table[k];
        if (cell.cv_accuracy > result.best_accuracy) {
            result.best_accuracy = cell.cv_accuracy;
            result.best_c = cell.C;
            result.best_gamma = cell.gamma;
        }
    }
    return result;
}

// ---- persistence ----

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class ModelReader {
public:
    explicit ModelReader(std::istream& in) : in_(in) {}

    std::vector<std::string> expect(std::string_view key, std::size_t values) {
        std::string text;
        if (!next_line(text)) throw ParseError("model file truncated: missing '" + std::string(key) + "'", line_ + 1);
        auto tokens = split(text);
        if (tokens.empty() || tokens.front() != key) {
            throw ParseError("expected '" + std::string(key) + "' but found '" + text + "'", line_);
        }
        if (tokens.size() != values + 1) {
            throw ParseError("'" + std::string(key) + "' expects " + std::to_string(values) + " value(s)", line_);
        }
        tokens.erase(tokens.begin());
        return tokens;
    }

    std::vector<std::string> sv_line(std::size_t index, std::size_t total) {
        std::string text;
        if (!next_line(text)) {
            throw ParseError("model file truncated: missing support vector " + std::to_string(index + 1) + " of " +
                                 std::to_string(total),
                             line_ + 1);
        }
        auto tokens = split(text);
        if (tokens.size() != kDescriptorCount + 1) {
            throw ParseError("support vector line needs coeff plus " + std::to_string(kDescriptorCount) + " values",
                             line_);
        }
        return tokens;
    }

    void expect_end() {
        std::string text;
        if (next_line(text)) throw ParseError("unexpected trailing content '" + text + "'", line_);
    }

    double number(const std::string& tok) const {
        const char* first = tok.data();
        const char* last = tok.data() + tok.size();
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
            throw ParseError("malformed number '" + tok + "'", line_);
        }
        return v;
    }

    long long integer(const std::string& tok) const {
        long long v = 0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ParseError("malformed integer '" + tok + "'", line_);
        return v;
    }

    std::size_t line() const { return line_; }

private:
    bool next_line(std::string& out) {
        while (std::getline(in_, out)) {
            ++line_;
            if (!out.empty() && out.back() == '\r') out.pop_back();
            if (!out.empty()) return true;
        }
        return false;
    }

    static std::vector<std::string> split(const std::string& s) {
        std::istringstream ss(s);
        std::vector<std::string> out;
        for (std::string tok; ss >> tok;) out.push_back(tok);
        return out;
    }

    std::istream& in_;
    std::size_t line_ = 0;
};

}  // namespace

void write_model(const SvmModel& model, std::ostream& out) {
    out << "version " << model.format_version << '\n';
    out << "kernel " << kernel_name(model.kernel.kind) << '\n';
    out << "gamma " << fmt17(model.kernel.gamma) << '\n';
    out << "degree " << model.kernel.degree << '\n';
    out << "coef0 " << fmt17(model.kernel.coef0) << '\n';
    out << "C " << fmt17(model.C) << '\n';
    out << "bias " << fmt17(model.bias) << '\n';
    out << "n_sv " << model.support_vectors.size() << '\n';
    out << "scale_min";
    for (const double v : model.scaling.min) out << ' ' << fmt17(v);
    out << "\nscale_max";
    for (const double v : model.scaling.max) out << ' ' << fmt17(v);
    out << "\nreference_year " << model.scaling.reference_year << '\n';
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
        out << fmt17(model.dual_coeffs[i]);
        for (const double v : model.support_vectors[i]) out << ' ' << fmt17(v);
        out << '\n';
    }
}

SvmModel read_model(std::istream& in) {
    ModelReader r(in);
    SvmModel m;
    const auto version = r.integer(r.expect("version", 1)[0]);
    if (version != kModelFormatVersion) {
        throw ParseError("unsupported model version " + std::to_string(version) + " (expected " +
                             std::to_string(kModelFormatVersion) + ")",
                         r.line());
    }
    m.format_version = static_cast<int>(version);
    try {
        m.kernel.kind = parse_kernel_kind(r.expect("kernel", 1)[0]);
    } catch (const ConfigError& e) {
        throw ParseError(e.what(), r.line());
    }
    m.kernel.gamma = r.number(r.expect("gamma", 1)[0]);
    m.kernel.degree = static_cast<int>(r.integer(r.expect("degree", 1)[0]));
    m.kernel.coef0 = r.number(r.expect("coef0", 1)[0]);
    try {
        m.kernel.check();
    } catch (const ConfigError& e) {
        throw ParseError(e.what(), r.line());
    }
    m.C = r.number(r.expect("C", 1)[0]);
    if (!(m.C > 0.0)) throw ParseError("C must be positive", r.line());
    m.bias = r.number(r.expect("bias", 1)[0]);
    const auto n_sv = r.integer(r.expect("n_sv", 1)[0]);
    if (n_sv < 1) throw ParseError("n_sv must be >= 1", r.line());
    const auto mins = r.expect("scale_min", kDescriptorCount);
    for (std::size_t d = 0; d < kDescriptorCount; ++d) m.scaling.min[d] = r.number(mins[d]);
    const auto maxs = r.expect("scale_max", kDescriptorCount);
    for (std::size_t d = 0; d < kDescriptorCount; ++d) {
        m.scaling.max[d] = r.number(maxs[d]);
        if (!(m.scaling.max[d] > m.scaling.min[d])) throw ParseError("scale_max must exceed scale_min", r.line());
    }
    m.scaling.reference_year = static_cast<int>(r.integer(r.expect("reference_year", 1)[0]));
    for (long long i = 0; i < n_sv; ++i) {
        const auto tokens = r.sv_line(static_cast<std::size_t>(i), static_cast<std::size_t>(n_sv));
        const double coeff = r.number(tokens[0]);
        if (coeff == 0.0 || std::abs(coeff) > m.C) {
            throw ParseError("support vector coefficient " + tokens[0] + " outside (0, C]", r.line());
        }
        ScaledVector sv{};
        for (std::size_t d = 0; d < kDescriptorCount; ++d) sv[d] = r.number(tokens[d + 1]);
        m.dual_coeffs.push_back(coeff);
        m.support_vectors.push_back(sv);
    }
    r.expect_end();
    return m;
}

void save_model(const SvmModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write model file " + path.string());
    write_model(model, out);
    if (!out) throw Error("failed writing model file " + path.string());
}

SvmModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file " + path.string());
    try {
        return read_model(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ":" + std::to_string(e.line().value_or(0)) + ": " + e.what(), e.line());
    }
}

}  // namespace domscreen
