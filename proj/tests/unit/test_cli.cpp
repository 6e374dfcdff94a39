#include "domscreen/cli.hpp"
#include "domscreen/dataset.hpp"
#include "domscreen/metrics.hpp"
#include "domscreen/svm.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace domscreen;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "domscreen");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// A small trained model shared by several cases.
struct Workspace {
    fs::path dir = oracle::temp_dir("cli");
    fs::path data = dir / "synth.csv";
    fs::path train = dir / "synth.train.csv";
    fs::path test = dir / "synth.test.csv";
    fs::path model = dir / "model.txt";

    Workspace() {
        REQUIRE(run({"synth", "-n", "180", "--seed", "5", "--output", data.string(), "--split"}).code == 0);
        const auto t = run({"train", "--input", train.string(), "--model", model.string(), "--c-grid", "1:7:2",
                            "--gamma-grid", "-3:1:2", "--folds", "3", "--reference-year", "2016"});
        REQUIRE(t.code == 0);
    }
};

Workspace& workspace() {
    static Workspace w;
    return w;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run({}).code == kExitInvalidInput);
    CHECK(run({"frobnicate"}).code == kExitInvalidInput);
    CHECK(run({"train", "--input", "/nonexistent.csv", "--model", "/tmp/x"}).code == kExitInvalidInput);
    CHECK(run({"train", "--input", DOMSCREEN_FIXTURE_DIR "/three_rows.csv", "--model", "/tmp/x", "--c-grid", "5:1:1"})
              .code == kExitInvalidInput);
    CHECK(run({"screen", "--input", DOMSCREEN_FIXTURE_DIR "/three_rows.csv", "--model",
               DOMSCREEN_FIXTURE_DIR "/one_sv.model", "--width", "0"})
              .code == kExitInvalidInput);
    CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("synth writes the three splits") {
    auto& w = workspace();
    const auto full = parse_csv(w.data);
    CHECK(full.records.size() == 180);
    std::size_t parts = 0;
    for (const auto* suffix : {".train.csv", ".test.csv", ".external.csv"}) {
        parts += parse_csv(w.dir / (std::string("synth") + suffix)).records.size();
    }
    CHECK(parts == 180);
}

TEST_CASE("train writes a valid model and a CV table") {
    auto& w = workspace();
    const auto m = load_model(w.model);
    CHECK(m.kernel.kind == KernelKind::rbf);
    CHECK(m.scaling.reference_year == 2016);
    double sum = 0.0;
    for (const double c : m.dual_coeffs) sum += c;
    CHECK(std::abs(sum) <= 1e-6);
    const auto table = slurp(w.dir / "model.cv.csv");
    CHECK(table.rfind("log2_c,log2_gamma,C,gamma,cv_accuracy\n", 0) == 0);
    CHECK(count_lines(table) == 1 + 4 * 3);
}

TEST_CASE("train is deterministic") {
    auto& w = workspace();
    const auto again = w.dir / "again.txt";
    REQUIRE(run({"train", "--input", w.train.string(), "--model", again.string(), "--c-grid", "1:7:2", "--gamma-grid",
                 "-3:1:2", "--folds", "3", "--reference-year", "2016", "--width", "2"})
                .code == 0);
    CHECK(slurp(again) == slurp(w.model));
}

TEST_CASE("train rejects single-class data and invalid rows") {
    auto& w = workspace();
    const auto set = make_labeled(parse_csv(w.data).records);
    std::vector<DomainRecord> only_valuable;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (set.labels[i] == Label::valuable) only_valuable.push_back(set.records[i]);
    }
    const auto path = w.dir / "one_class.csv";
    write_csv(path, only_valuable);
    const auto r = run({"train", "--input", path.string(), "--model", (w.dir / "nope.txt").string()});
    CHECK(r.code == kExitInvalidInput);
    CHECK(r.err.find("non_valuable") != std::string::npos);
    CHECK_FALSE(fs::exists(w.dir / "nope.txt"));

    const auto bad = run({"train", "--input", DOMSCREEN_FIXTURE_DIR "/bad_rows.csv", "--model",
                          (w.dir / "nope.txt").string(), "--errors", (w.dir / "bad.errors.csv").string()});
    CHECK(bad.code == kExitInvalidInput);
    CHECK(bad.err.find("bad.errors.csv") != std::string::npos);
    CHECK(fs::exists(w.dir / "bad.errors.csv"));
}

TEST_CASE("evaluate on the training CSV agrees with the metrics module") {
    auto& w = workspace();
    const auto csv = w.dir / "eval.csv";
    const auto r = run({"evaluate", "--input", w.train.string(), "--model", w.model.string(), "--output",
                        csv.string(), "--set-name", "training"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("training") != std::string::npos);

    const auto model = load_model(w.model);
    const auto set = make_labeled(parse_csv(w.train).records);
    std::vector<Label> pred;
    for (const auto& rec : set.records) pred.push_back(predict(model, rec, 2016).label);
    const auto row = evaluation_row("training", confusion(pred, set.labels));
    CHECK(slurp(csv) == format_csv(std::span(&row, 1)));
}

TEST_CASE("evaluate reproduces the published test row from constructed predictions") {
    // Linear one-SV model: decision = scaled authority - 0.5, with authority scaled against [0, 2 * mid].
    DomainRecord high;
    high.pr = 7, high.da = 80, high.pa = 80, high.bl = 50000, high.dp = 2000, high.acr = 5000, high.dob = 2000;
    DomainRecord low;
    low.pr = 0, low.da = 2, low.pa = 3, low.bl = 0, low.dp = 0, low.acr = 2, low.dob = 2014;
    const double a_high = compute_descriptors(high, 2016).authority;
    const double a_low = compute_descriptors(low, 2016).authority;
    const double mid = 0.5 * (a_high + a_low);

    SvmModel m;
    m.kernel = KernelSpec::linear();
    m.C = 1;
    m.support_vectors = {{1, 0, 0, 0, 0}};
    m.dual_coeffs = {1.0};
    m.bias = -0.5;
    m.scaling.min = {0, 0, 0, 0, 0};
    m.scaling.max = {2 * mid, 10, 10, 10, 10};
    m.scaling.reference_year = 2016;
    const auto dir = oracle::temp_dir("table3");
    save_model(m, dir / "linear.model");

    std::vector<DomainRecord> records;
    auto add = [&](DomainRecord r, double price, int count) {
        for (int i = 0; i < count; ++i) {
            r.name = "d" + std::to_string(records.size()) + "x.com";
            r.le = name_length(r.name);
            r.price_usd = price;
            records.push_back(r);
        }
    };
    add(high, 500, 146);  // TP
    add(low, 50, 154);    // TN
    add(high, 50, 1);     // FP
    add(low, 500, 8);     // FN
    write_csv(dir / "set.csv", records);

    const auto r = run({"evaluate", "--input", (dir / "set.csv").string(), "--model", (dir / "linear.model").string(),
                        "--set-name", "test"});
    REQUIRE(r.code == 0);
    for (const auto* s : {"146", "154", "0.971", "0.948", "0.994", "0.943"}) CHECK(r.out.find(s) != std::string::npos);
}

TEST_CASE("evaluate rejects an empty CSV") {
    const auto dir = oracle::temp_dir("empty");
    write_csv(dir / "empty.csv", std::vector<DomainRecord>{});
    const auto r = run({"evaluate", "--input", (dir / "empty.csv").string(), "--model",
                        DOMSCREEN_FIXTURE_DIR "/one_sv.model"});
    CHECK(r.code == kExitInvalidInput);
}

TEST_CASE("screen with zero candidates") {
    const auto dir = oracle::temp_dir("screen0");
    write_csv(dir / "none.csv", std::vector<DomainRecord>{});
    const auto out = dir / "ranked.csv";
    const auto r = run({"screen", "--input", (dir / "none.csv").string(), "--model",
                        DOMSCREEN_FIXTURE_DIR "/one_sv.model", "--output", out.string()});
    CHECK(r.code == 0);
    CHECK(r.err.find("0 screened, 0 valuable") != std::string::npos);
    REQUIRE(fs::exists(out));
    CHECK(fs::file_size(out) == 0);
}

TEST_CASE("screen ranks valuable rows and re-identifies training positives") {
    auto& w = workspace();
    const auto set = make_labeled(parse_csv(w.train).records);
    const auto model = load_model(w.model);
    std::vector<Label> pred;
    std::vector<DomainRecord> positives;
    for (std::size_t i = 0; i < set.size(); ++i) {
        pred.push_back(predict(model, set.records[i], 2016).label);
        if (set.labels[i] == Label::valuable) positives.push_back(set.records[i]);
    }
    const double se_train = sensitivity(confusion(pred, set.labels));
    write_csv(w.dir / "positives.csv", positives);

    const auto out = w.dir / "ranked.csv";
    const auto r = run({"screen", "--input", (w.dir / "positives.csv").string(), "--model", w.model.string(),
                        "--output", out.string(), "--batch-size", "7", "--width", "3"});
    REQUIRE(r.code == 0);
    const auto text = slurp(out);
    const std::size_t found = count_lines(text) - 1;
    CHECK(static_cast<double>(found) >= se_train * static_cast<double>(positives.size()) - 1e-9);
    CHECK(r.err.find(std::to_string(positives.size()) + " screened, " + std::to_string(found) + " valuable") !=
          std::string::npos);

    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "domain,decision_value,authority,traffic,age,health,name_quality");
    double prev = HUGE_VAL;
    while (std::getline(lines, line)) {
        const auto fields = split_csv_line(line);
        REQUIRE(fields.size() == 7);
        const double d = std::stod(fields[1]);
        CHECK(d > 0.0);
        CHECK(d <= prev);
        prev = d;
    }

    // Same output regardless of batch size and width.
    const auto out2 = w.dir / "ranked2.csv";
    REQUIRE(run({"screen", "--input", (w.dir / "positives.csv").string(), "--model", w.model.string(), "--output",
                 out2.string()})
                .code == 0);
    CHECK(slurp(out2) == text);
}

TEST_CASE("screen --all, skipped rows and the auction filter") {
    const auto dir = oracle::temp_dir("screen_all");
    std::ofstream(dir / "cand.csv")
        << "domain,pr,da,pa,bl,dp,acr,alexa,similarweb,dob,sv,te,sb,pb,ab,reserve_price_flag,bidder_count\n"
           "aaa.com,3,30,30,100,50,100,,,2004,10,2,0,0,0,0,3\n"
           "bbb.com,11,30,30,100,50,100,,,2004,10,2,0,0,0,0,3\n"
           "ccc.com,3,30,30,100,50,100,,,2004,10,2,0,0,0,1,3\n";
    const auto out = dir / "all.csv";
    const auto r = run({"screen", "--input", (dir / "cand.csv").string(), "--model",
                        DOMSCREEN_FIXTURE_DIR "/one_sv.model", "--output", out.string(), "--all",
                        "--filter-auctions"});
    REQUIRE(r.code == 0);
    CHECK(r.err.find("1 screened") != std::string::npos);
    CHECK(r.err.find("1 skipped") != std::string::npos);
    CHECK(r.err.find("1 filtered") != std::string::npos);
    const auto text = slurp(out);
    CHECK(text.find(",label\n") != std::string::npos);
    CHECK(text.find("aaa.com") != std::string::npos);
    CHECK(text.find("ccc.com") == std::string::npos);
}

TEST_CASE("ingest writes clean rows and a sidecar report") {
    const auto dir = oracle::temp_dir("ingest");
    const auto out = dir / "clean.csv";
    const auto r = run({"ingest", "--input", DOMSCREEN_FIXTURE_DIR "/bad_rows.csv", "--output", out.string(),
                        "--reference-year", "2016"});
    CHECK(r.code == kExitInvalidInput);
    const auto clean = parse_csv(out, 2016);
    REQUIRE(clean.records.size() == 1);
    CHECK(clean.records[0].name == "good.com");
    const auto report = slurp(dir / "clean.errors.csv");
    CHECK(report.rfind("line,violation\n", 0) == 0);
    CHECK(count_lines(report) == 3);

    const auto ok = run({"ingest", "--input", DOMSCREEN_FIXTURE_DIR "/three_rows.csv"});
    CHECK(ok.code == 0);
    CHECK(count_lines(ok.out) == 4);
}

TEST_CASE("ingest enriches from fixture providers") {
    const auto dir = oracle::temp_dir("enrich");
    ::setenv("DOMSCREEN_FIXTURES", DOMSCREEN_FIXTURE_DIR "/providers", 1);
    std::ofstream(dir / "in.csv") << "domain,pr,da,pa,bl,dp,acr,alexa,similarweb,dob,sv,te,sb,pb,ab\n"
                                     "example.com,0,0,0,0,0,0,,,2010,1,1,0,0,0\n";
    const auto r = run({"ingest", "--input", (dir / "in.csv").string(), "--output", (dir / "out.csv").string(),
                        "--providers", "moz,archive"});
    ::unsetenv("DOMSCREEN_FIXTURES");
    REQUIRE(r.code == 0);
    const auto parsed = parse_csv(dir / "out.csv");
    REQUIRE(parsed.records.size() == 1);
    CHECK(parsed.records[0].acr == 870);
    CHECK(parsed.records[0].dob == 1997);
    CHECK(parsed.records[0].da == 41);
}

TEST_CASE("cluster-report on synthetic data names the five groups") {
    auto& w = workspace();
    const auto big = w.dir / "big.csv";
    REQUIRE(run({"synth", "-n", "903", "--seed", "1", "--output", big.string()}).code == 0);
    const auto corr = w.dir / "corr.csv";
    const auto r = run({"cluster-report", "--input", big.string(), "--output", corr.string(), "--reference-year", "2016"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("Domain Authority: pr da pa bl dp") != std::string::npos);
    CHECK(r.out.find("Domain Traffic: alexa similarweb") != std::string::npos);
    CHECK(r.out.find("Active Domain Age: acr dob") != std::string::npos);
    CHECK(r.out.find("Domain Health: sb pb ab") != std::string::npos);
    CHECK(r.out.find("Name Quality: sv te") != std::string::npos);
    const auto text = slurp(corr);
    CHECK(count_lines(text) == 15);
    CHECK(text.rfind("feature,pr,da,pa,bl,dp,acr,alexa,similarweb,dob,sv,te,sb,pb,ab\n", 0) == 0);
}

TEST_CASE("cluster-report warns about constant columns") {
    const auto r = run({"cluster-report", "--input", DOMSCREEN_FIXTURE_DIR "/three_rows.csv", "--reference-year",
                        "2016"});
    CHECK(r.code == 0);
    CHECK(r.err.find("constant") != std::string::npos);  // ab is 0 everywhere
}

TEST_CASE("unwritable output is an internal error") {
    const auto r = run({"synth", "-n", "20", "--output", "/nonexistent-dir/x.csv"});
    CHECK(r.code == kExitInternal);
}
