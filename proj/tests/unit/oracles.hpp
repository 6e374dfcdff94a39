#pragma once

// Independent reference implementations used to check the library. They favour brute force over
// speed and share no code with src/.

#include "domscreen/feature_model.hpp"
#include "domscreen/svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <unistd.h>

namespace oracle {

using domscreen::ScaledVector;

inline double kernel(const domscreen::KernelSpec& k, const ScaledVector& a, const ScaledVector& b) {
    double dot = 0.0, dist = 0.0;
    for (int i = 0; i < 5; ++i) {
        dot += a[i] * b[i];
        dist += (a[i] - b[i]) * (a[i] - b[i]);
    }
    switch (k.kind) {
        case domscreen::KernelKind::linear: return dot;
        case domscreen::KernelKind::polynomial: return std::pow(k.gamma * dot + k.coef0, k.degree);
        case domscreen::KernelKind::rbf: return std::exp(-k.gamma * dist);
    }
    return 0.0;
}

struct QpSolution {
    std::vector<double> alpha;
    double bias = 0.0;
    double objective = 0.0;
};

// Euclidean projection onto {0 <= a <= C, y.a = 0}. The residual sum_i y_i clip(v_i - lambda y_i, 0, C) is
// piecewise linear and non-increasing in lambda, so the root lies between two sorted breakpoints.
inline std::vector<double> project(const std::vector<double>& v, std::span<const int> y, double C) {
    const std::size_t n = v.size();
    auto at = [&](double lambda) {
        std::vector<double> a(n);
        for (std::size_t i = 0; i < n; ++i) a[i] = std::clamp(v[i] - lambda * y[i], 0.0, C);
        return a;
    };
    auto residual = [&](double lambda) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += y[i] * std::clamp(v[i] - lambda * y[i], 0.0, C);
        return s;
    };
    std::vector<double> knots;
    for (std::size_t i = 0; i < n; ++i) {
        knots.push_back(v[i] * y[i]);
        knots.push_back((v[i] - C) * y[i]);
    }
    std::sort(knots.begin(), knots.end());
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double r0 = residual(knots[k]), r1 = residual(knots[k + 1]);
        if (r0 >= 0.0 && r1 <= 0.0) {
            if (r0 == r1) return at(knots[k]);
            return at(knots[k] + (knots[k + 1] - knots[k]) * r0 / (r0 - r1));
        }
    }
    return at(residual(knots.front()) <= 0.0 ? knots.front() : knots.back());
}

inline double objective(const std::vector<std::vector<double>>& Q, const std::vector<double>& a) {
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        lin += a[i];
        for (std::size_t j = 0; j < a.size(); ++j) quad += a[i] * a[j] * Q[i][j];
    }
    return lin - 0.5 * quad;
}

// Dense accelerated projected gradient ascent on the C-SVC dual, with adaptive restart.
inline QpSolution solve_dual(std::span<const ScaledVector> x, std::span<const int> y,
                             const domscreen::KernelSpec& k, double C, int iterations = 60000) {
    const std::size_t n = x.size();
    std::vector<std::vector<double>> K(n, std::vector<double>(n)), Q(n, std::vector<double>(n));
    double frob = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            K[i][j] = kernel(k, x[i], x[j]);
            Q[i][j] = y[i] * y[j] * K[i][j];
            frob += Q[i][j] * Q[i][j];
        }
    }
    const double step = 1.0 / std::max(std::sqrt(frob), 1e-12);
    std::vector<double> a(n, 0.0), z = a, prev = a;
    double t = 1.0;
    for (int it = 0; it < iterations; ++it) {
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = 1.0;
            for (std::size_t j = 0; j < n; ++j) g[i] -= Q[i][j] * z[j];
        }
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = z[i] + step * g[i];
        prev = a;
        a = project(v, y, C);
        double moved = 0.0;
        for (std::size_t i = 0; i < n; ++i) moved = std::max(moved, std::abs(a[i] - prev[i]));
        if (moved < 1e-15 && t == 1.0) break;  // fixed point of the plain projected step
        if (objective(Q, a) < objective(Q, prev)) {
            t = 1.0;  // restart momentum
            z = a;
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        for (std::size_t i = 0; i < n; ++i) z[i] = a[i] + ((t - 1.0) / t_next) * (a[i] - prev[i]);
        t = t_next;
    }

    QpSolution s;
    s.alpha = a;
    s.objective = objective(Q, a);
    // bias: average over free multipliers, else the midpoint of the feasible interval
    const double margin = 1e-6 * C;
    double sum = 0.0;
    int free = 0;
    double lo = -HUGE_VAL, hi = HUGE_VAL;
    for (std::size_t i = 0; i < n; ++i) {
        double u = 0.0;
        for (std::size_t j = 0; j < n; ++j) u += a[j] * y[j] * K[i][j];
        const double b = y[i] - u;
        if (a[i] > margin && a[i] < C - margin) {
            sum += b;
            ++free;
        } else if ((a[i] <= margin) == (y[i] > 0)) {
            lo = std::max(lo, b);  // alpha = 0 with y = +1, or alpha = C with y = -1
        } else {
            hi = std::min(hi, b);
        }
    }
    s.bias = free > 0 ? sum / free : 0.5 * (lo + hi);
    return s;
}

inline double decision(std::span<const ScaledVector> x, std::span<const int> y, const QpSolution& s,
                       const domscreen::KernelSpec& k, const ScaledVector& v) {
    double f = s.bias;
    for (std::size_t i = 0; i < x.size(); ++i) f += s.alpha[i] * y[i] * kernel(k, x[i], v);
    return f;
}

// O(n^2) average ranks: rank = 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> brute_ranks(std::span<const double> x) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double less = 0.0, equal = 0.0;
        for (const double v : x) {
            less += v < x[i];
            equal += v == x[i];
        }
        r[i] = 1.0 + less + (equal - 1.0) / 2.0;
    }
    return r;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i] / n;
        mb += b[i] / n;
    }
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

inline double brute_spearman(std::span<const double> a, std::span<const double> b) {
    const auto ra = brute_ranks(a), rb = brute_ranks(b);
    return pearson(ra, rb);
}

// Direct median of a copy.
inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::uint64_t counter = 0;
    const auto dir = std::filesystem::temp_directory_path() /
                     ("domscreen_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace oracle
