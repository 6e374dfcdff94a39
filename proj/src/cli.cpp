#include "domscreen/cli.hpp"

#include "domscreen/clustering.hpp"
#include "domscreen/dataset.hpp"
#include "domscreen/enrichment.hpp"
#include "domscreen/errors.hpp"
#include "domscreen/metrics.hpp"
#include "domscreen/svm.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace domscreen {

namespace {

namespace fs = std::filesystem;

/// Input validation failure that should surface as exit code 2.
class InputFailure : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    std::string input;
    std::string output;
    std::string model;
    std::string errors;
    std::string cv_report;
    std::string c_grid = "-5:15:2";
    std::string gamma_grid = "-15:3:2";
    std::string set_name = "set";
    std::vector<std::string> providers;
    int folds = 5;
    std::uint64_t seed = 42;
    int reference_year = 0;
    int width = 1;
    int k = 5;
    std::size_t count = 903;
    std::size_t batch_size = 10'000;
    bool all = false;
    bool filter_auctions = false;
    bool split = false;
};

fs::path sibling(const fs::path& base, const std::string& suffix) {
    auto stem = base;
    stem.replace_extension();
    return fs::path(stem.string() + suffix);
}

std::string fmt(double v, const char* f = "%.17g") {
    char buf[40];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

/// Parses a labeled CSV, applying the auction filter. Any invalid row aborts with a sidecar report.
std::vector<DomainRecord> load_valid(const RunConfig& cfg, int current_year, std::ostream& err) {
    auto parsed = parse_csv(cfg.input, current_year);
    for (const auto& w : parsed.warnings) err << "warning: line " << w.line << ": " << w.message << '\n';
    if (!parsed.errors.empty()) {
        const fs::path report = cfg.errors.empty() ? sibling(cfg.input, ".errors.csv") : fs::path(cfg.errors);
        write_error_report(report, parsed.errors);
        throw InputFailure(std::to_string(parsed.errors.size()) + " invalid row(s) in " + cfg.input +
                           "; report written to " + report.string());
    }
    std::vector<DomainRecord> out;
    for (std::size_t i = 0; i < parsed.records.size(); ++i) {
        if (!cfg.filter_auctions || passes_auction_filter(parsed.auction[i])) out.push_back(std::move(parsed.records[i]));
    }
    return out;
}

void write_split(const LabeledSet& set, const fs::path& base, std::uint64_t seed, int reference_year,
                 std::ostream& err) {
    const auto split = diversity_split(set, seed, reference_year);
    const std::pair<const char*, const LabeledSet*> parts[] = {
        {".train.csv", &split.training}, {".test.csv", &split.test}, {".external.csv", &split.external}};
    for (const auto& [suffix, part] : parts) {
        const auto path = sibling(base, suffix);
        write_csv(path, part->records);
        err << "wrote " << part->size() << " records to " << path.string() << '\n';
    }
}

int cmd_ingest(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const int year = cfg.reference_year ? cfg.reference_year : current_utc_year();
    auto parsed = parse_csv(cfg.input, std::max(year, current_utc_year()));
    for (const auto& w : parsed.warnings) err << "warning: line " << w.line << ": " << w.message << '\n';

    std::vector<DomainRecord> kept;
    std::size_t filtered = 0;
    std::vector<RowIssue> issues = parsed.errors;
    std::vector<std::shared_ptr<Provider>> providers;
    if (!cfg.providers.empty()) {
        const char* root = std::getenv("DOMSCREEN_FIXTURES");
        providers = make_providers(cfg.providers, root ? fs::path(root) : fs::path{});
    }
    for (std::size_t i = 0; i < parsed.records.size(); ++i) {
        if (cfg.filter_auctions && !passes_auction_filter(parsed.auction[i])) {
            ++filtered;
            continue;
        }
        auto r = std::move(parsed.records[i]);
        if (!providers.empty()) {
            try {
                apply_fields(r, enrich(providers, r.name));
            } catch (const Error& e) {
                issues.push_back({parsed.lines[i], std::string("enrichment: ") + e.what()});
                continue;
            }
            if (const auto v = validation_errors(r, std::max(year, current_utc_year())); !v.empty()) {
                issues.push_back({parsed.lines[i], "after enrichment: " + v.front()});
                continue;
            }
        }
        kept.push_back(std::move(r));
    }

    if (cfg.output.empty()) {
        write_csv(out, kept);
    } else {
        write_csv(fs::path(cfg.output), kept);
    }
    std::size_t valuable = 0;
    for (const auto& r : kept) valuable += label(r) == Label::valuable;
    err << kept.size() << " valid (" << valuable << " valuable), " << issues.size() << " invalid, " << filtered
        << " filtered by auction rule\n";
    if (cfg.split) {
        if (cfg.output.empty()) throw ConfigError("--split needs --output");
        write_split(make_labeled(kept), cfg.output, cfg.seed, year, err);
    }
    if (!issues.empty()) {
        const fs::path report = cfg.errors.empty() ? sibling(cfg.output.empty() ? cfg.input : cfg.output, ".errors.csv")
                                                   : fs::path(cfg.errors);
        write_error_report(report, issues);
        err << "row-level report: " << report.string() << '\n';
        return kExitInvalidInput;
    }
    return kExitOk;
}

int cmd_synth(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto set = synth_generate(cfg.count, cfg.seed);
    if (cfg.output.empty()) {
        write_csv(out, set.records);
    } else {
        write_csv(fs::path(cfg.output), set.records);
        err << "wrote " << set.size() << " records to " << cfg.output << '\n';
    }
    if (cfg.split) {
        if (cfg.output.empty()) throw ConfigError("--split needs --output");
        write_split(set, cfg.output, cfg.seed, cfg.reference_year ? cfg.reference_year : kSynthReferenceYear, err);
    }
    return kExitOk;
}

int cmd_cluster_report(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const int year = cfg.reference_year ? cfg.reference_year : current_utc_year();
    const auto records = load_valid(cfg, std::max(year, current_utc_year()), err);
    if (records.size() < 2) throw InputFailure("cluster-report needs at least 2 valid rows");
    const auto matrix = make_feature_matrix(records, year);
    const auto corr = correlation_matrix(matrix);
    for (const auto c : corr.constant_columns) {
        err << "warning: column " << corr.names[c] << " is constant; its correlations are set to 0\n";
    }
    const auto dendrogram = hcluster(matrix);
    out << "# dendrogram (average linkage, d = 1 - spearman)\n" << render_dendrogram(dendrogram);

    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg.k), dendrogram.leaves());
    const auto groups = cut(dendrogram, k);
    const auto names = name_groups(groups, dendrogram.labels);
    out << "\n# cut k=" << k << '\n';
    for (std::size_t g = 0; g < groups.size(); ++g) {
        out << names[g] << ':';
        for (const auto leaf : groups[g]) out << ' ' << dendrogram.labels[leaf];
        out << '\n';
    }

    std::ostringstream csv;
    csv << "feature";
    for (const auto& n : corr.names) csv << ',' << n;
    csv << '\n';
    for (std::size_t i = 0; i < corr.size(); ++i) {
        csv << corr.names[i];
        for (std::size_t j = 0; j < corr.size(); ++j) csv << ',' << fmt(corr.at(i, j), "%.6f");
        csv << '\n';
    }
    out << "\n# spearman correlation\n" << csv.str();
    if (!cfg.output.empty()) write_file(cfg.output, csv.str());
    return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const int year = cfg.reference_year ? cfg.reference_year : current_utc_year();
    GridSearchOptions opts;
    opts.c_grid = parse_exponent_range(cfg.c_grid);
    opts.gamma_grid = parse_exponent_range(cfg.gamma_grid);
    opts.folds = cfg.folds;
    opts.seed = cfg.seed;
    opts.width = cfg.width;

    const auto set = make_labeled(load_valid(cfg, std::max(year, current_utc_year()), err));
    const auto ys = set.signs();
    for (const auto& [cls, name] : {std::pair{1, "valuable"}, std::pair{-1, "non_valuable"}}) {
        if (std::find(ys.begin(), ys.end(), cls) == ys.end()) {
            throw InputFailure(std::string("training data has no ") + name + " records");
        }
    }

    ScalingParams scaling;
    const auto points = scaled_descriptors(set.records, year, &scaling);
    const auto gs = grid_search(points, ys, opts);

    std::ostringstream table;
    table << "log2_c,log2_gamma,C,gamma,cv_accuracy\n";
    for (const auto& cell : gs.table) {
        table << cell.log2_c << ',' << cell.log2_gamma << ',' << fmt(cell.C) << ',' << fmt(cell.gamma) << ','
              << fmt(cell.cv_accuracy) << '\n';
    }
    const fs::path report = cfg.cv_report.empty() ? sibling(cfg.model, ".cv.csv") : fs::path(cfg.cv_report);
    write_file(report, table.str());

    TrainConfig tc;
    tc.C = gs.best_c;
    tc.kernel = KernelSpec::rbf(gs.best_gamma);
    auto model = smo_train(points, ys, tc);
    model.scaling = scaling;
    if (!model.converged) err << "warning: SMO stopped at the iteration budget before reaching tolerance\n";
    save_model(model, cfg.model);

    out << "records " << set.size() << "\nbest_C " << fmt(gs.best_c, "%g") << "\nbest_gamma "
        << fmt(gs.best_gamma, "%g") << "\ncv_accuracy " << fmt(gs.best_accuracy, "%.4f") << "\nsupport_vectors "
        << model.support_vectors.size() << "\nmodel " << cfg.model << "\ncv_report " << report.string() << '\n';
    return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto model = load_model(cfg.model);
    const int year = cfg.reference_year ? cfg.reference_year : model.scaling.reference_year;
    const auto set = make_labeled(load_valid(cfg, std::max(year, current_utc_year()), err));
    if (set.size() == 0) throw InputFailure("evaluation CSV has no records");
    std::vector<Label> predicted;
    predicted.reserve(set.size());
    for (const auto& r : set.records) {
        try {
            predicted.push_back(predict(model, r, year).label);
        } catch (const ValidationError& e) {
            throw InputFailure(std::string("record does not fit the model: ") + e.what());
        }
    }
    const auto row = evaluation_row(cfg.set_name, confusion(predicted, set.labels));
    out << format_table(std::span(&row, 1));
    if (!cfg.output.empty()) write_file(cfg.output, format_csv(std::span(&row, 1)));
    return kExitOk;
}

struct ScreenedRow {
    std::size_t order = 0;
    std::string domain;
    Prediction prediction;
};

int cmd_screen(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.width < 1) throw ConfigError("--width must be >= 1");
    if (cfg.batch_size < 1) throw ConfigError("--batch-size must be >= 1");
    const auto model = load_model(cfg.model);
    const int year = cfg.reference_year ? cfg.reference_year : model.scaling.reference_year;
    DomainCsvReader reader(fs::path(cfg.input), std::max(year, current_utc_year()));

    std::vector<ScreenedRow> kept;
    std::size_t screened = 0, skipped = 0, filtered = 0, valuable = 0, order = 0;
    std::vector<DomainRecord> batch;
    std::vector<std::optional<Prediction>> results;
    auto flush = [&] {
        results.assign(batch.size(), std::nullopt);
        const std::size_t width = std::min<std::size_t>(static_cast<std::size_t>(cfg.width), batch.size());
        auto work = [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                try {
                    results[i] = predict(model, batch[i], year);
                } catch (const ValidationError&) {
                    // counted as skipped below
                }
            }
        };
        if (width <= 1) {
            work(0, batch.size());
        } else {
            std::vector<std::jthread> pool;
            const std::size_t chunk = (batch.size() + width - 1) / width;
            for (std::size_t w = 0; w < width; ++w) {
                const std::size_t b = w * chunk, e = std::min(batch.size(), b + chunk);
                if (b < e) pool.emplace_back(work, b, e);
            }
        }
        // Results are collected in input order regardless of scheduling.
        for (std::size_t i = 0; i < batch.size(); ++i) {
            if (!results[i]) {
                ++skipped;
                continue;
            }
            ++screened;
            const bool is_valuable = results[i]->label == Label::valuable;
            valuable += is_valuable;
            if (is_valuable || cfg.all) kept.push_back({order++, std::move(batch[i].name), *results[i]});
        }
        batch.clear();
    };

    ParsedRow row;
    while (reader.next(row)) {
        if (!row.record) {
            ++skipped;
            continue;
        }
        if (cfg.filter_auctions && !passes_auction_filter(row.auction)) {
            ++filtered;
            continue;
        }
        batch.push_back(std::move(*row.record));
        if (batch.size() >= cfg.batch_size) flush();
    }
    flush();

    std::stable_sort(kept.begin(), kept.end(), [](const ScreenedRow& a, const ScreenedRow& b) {
        return a.prediction.decision > b.prediction.decision;
    });

    std::ofstream file;
    std::ostream* sink = &out;
    if (!cfg.output.empty()) {
        file.open(cfg.output, std::ios::binary | std::ios::trunc);
        if (!file) throw Error("cannot write " + cfg.output);
        sink = &file;
    }
    // No rows, no header: an empty result is an empty file.
    if (!kept.empty()) {
        *sink << "domain,decision_value";
        for (const auto n : kDescriptorNames) *sink << ',' << n;
        if (cfg.all) *sink << ",label";
        *sink << '\n';
    }
    for (const auto& r : kept) {
        *sink << r.domain << ',' << fmt(r.prediction.decision, "%.10g");
        for (const double v : r.prediction.scaled) *sink << ',' << fmt(v, "%.6f");
        if (cfg.all) *sink << ',' << (r.prediction.label == Label::valuable ? "valuable" : "non_valuable");
        *sink << '\n';
    }
    err << screened << " screened, " << valuable << " valuable";
    if (skipped) err << ", " << skipped << " skipped (invalid)";
    if (filtered) err << ", " << filtered << " filtered by auction rule";
    err << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Screen domain names for aftermarket value with an RBF support vector machine"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", cfg.seed, "seed for splits, folds and generation");
        sub->add_option("--reference-year", cfg.reference_year, "year used for domain age (default: current UTC year)");
    };

    auto* ingest = app.add_subcommand("ingest", "validate a domain CSV and write the clean rows");
    ingest->add_option("--input", cfg.input, "input CSV")->required()->check(CLI::ExistingFile);
    ingest->add_option("--output", cfg.output, "clean CSV (default: standard output)");
    ingest->add_option("--errors", cfg.errors, "row-level error report path");
    ingest->add_option("--providers", cfg.providers, "enrichment providers, applied in order")->delimiter(',');
    ingest->add_flag("--filter-auctions", cfg.filter_auctions, "keep only no-reserve auctions with >= 2 bidders");
    ingest->add_flag("--split", cfg.split, "also write .train/.test/.external diversity splits next to --output");
    add_common(ingest);

    auto* cluster = app.add_subcommand("cluster-report", "Spearman correlation and hierarchical clustering of features");
    cluster->add_option("--input", cfg.input, "input CSV")->required()->check(CLI::ExistingFile);
    cluster->add_option("--output", cfg.output, "correlation matrix CSV");
    cluster->add_option("--k", cfg.k, "number of clusters to cut")->check(CLI::PositiveNumber);
    add_common(cluster);

    auto* train = app.add_subcommand("train", "grid-search and train an RBF model");
    train->add_option("--input", cfg.input, "labeled training CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--model", cfg.model, "model file to write")->required();
    train->add_option("--c-grid", cfg.c_grid, "log2(C) range start:end:step");
    train->add_option("--gamma-grid", cfg.gamma_grid, "log2(gamma) range start:end:step");
    train->add_option("--folds", cfg.folds, "cross-validation folds")->check(CLI::Range(2, 1000));
    train->add_option("--width", cfg.width, "worker threads")->check(CLI::PositiveNumber);
    train->add_option("--cv-report", cfg.cv_report, "CV accuracy table (default: <model>.cv.csv)");
    train->add_option("--errors", cfg.errors, "row-level error report path");
    train->add_flag("--filter-auctions", cfg.filter_auctions, "keep only no-reserve auctions with >= 2 bidders");
    add_common(train);

    auto* evaluate = app.add_subcommand("evaluate", "confusion matrix and metrics for a labeled CSV");
    evaluate->add_option("--input", cfg.input, "labeled CSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--model", cfg.model, "model file")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--output", cfg.output, "metrics CSV");
    evaluate->add_option("--set-name", cfg.set_name, "row label in the report");
    evaluate->add_option("--errors", cfg.errors, "row-level error report path");
    add_common(evaluate);

    auto* screen = app.add_subcommand("screen", "classify candidates and list the valuable ones");
    screen->add_option("--input", cfg.input, "candidate CSV")->required()->check(CLI::ExistingFile);
    screen->add_option("--model", cfg.model, "model file")->required()->check(CLI::ExistingFile);
    screen->add_option("--output", cfg.output, "ranked CSV (default: standard output)");
    screen->add_option("--width", cfg.width, "classification threads")->check(CLI::PositiveNumber);
    screen->add_option("--batch-size", cfg.batch_size, "rows per streaming batch")->check(CLI::PositiveNumber);
    screen->add_flag("--all", cfg.all, "emit every row with its label");
    screen->add_flag("--filter-auctions", cfg.filter_auctions, "keep only no-reserve auctions with >= 2 bidders");
    add_common(screen);

    auto* synth = app.add_subcommand("synth", "generate a calibrated synthetic labeled set");
    synth->add_option("--output", cfg.output, "CSV path (default: standard output)");
    synth->add_option("-n,--count", cfg.count, "number of records")->check(CLI::Range(10, 100'000'000));
    synth->add_flag("--split", cfg.split, "also write .train/.test/.external diversity splits next to --output");
    add_common(synth);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalidInput;
    }

    try {
        if (*ingest) return cmd_ingest(cfg, out, err);
        if (*cluster) return cmd_cluster_report(cfg, out, err);
        if (*train) return cmd_train(cfg, out, err);
        if (*evaluate) return cmd_evaluate(cfg, out, err);
        if (*screen) return cmd_screen(cfg, out, err);
        if (*synth) return cmd_synth(cfg, out, err);
    } catch (const InputFailure& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}

}  // namespace domscreen
