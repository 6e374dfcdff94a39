#include "domscreen/cli.hpp"
#include "domscreen/clustering.hpp"
#include "domscreen/dataset.hpp"
#include "domscreen/errors.hpp"
#include "domscreen/feature_model.hpp"
#include "domscreen/metrics.hpp"
#include "domscreen/svm.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace domscreen;

namespace {

std::vector<ScaledVector> to_points(const std::vector<std::vector<double>>& rows) {
    std::vector<ScaledVector> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        if (r.size() != kDescriptorCount) {
            throw ValidationError("each point needs " + std::to_string(kDescriptorCount) + " components, got " +
                                  std::to_string(r.size()));
        }
        ScaledVector v{};
        std::copy(r.begin(), r.end(), v.begin());
        out.push_back(v);
    }
    return out;
}

py::dict descriptor_dict(const DescriptorVector& d) {
    py::dict out;
    const auto a = d.as_array();
    for (std::size_t i = 0; i < kDescriptorCount; ++i) out[py::str(std::string(kDescriptorNames[i]))] = a[i];
    return out;
}

}  // namespace

PYBIND11_MODULE(_domscreen, m) {
    m.doc() = "Domain-name value screening: features, clustering, SVM training and evaluation.";

    auto base = py::register_exception<Error>(m, "DomscreenError");
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());

    py::enum_<Label>(m, "Label")
        .value("valuable", Label::valuable)
        .value("non_valuable", Label::non_valuable);

    py::class_<DomainRecord>(m, "DomainRecord")
        .def(py::init<>())
        .def(py::init([](std::string name, py::kwargs kw) {
                 DomainRecord r;
                 r.name = std::move(name);
                 r.le = name_length(r.name);
                 for (const auto& [k, v] : kw) {
                     const auto key = py::cast<std::string>(k);
                     if (key == "price_usd") {
                         r.price_usd = v.is_none() ? std::nullopt : std::optional<double>(py::cast<double>(v));
                     } else {
                         r.set(parse_feature_kind(key), py::cast<std::int64_t>(v));
                     }
                 }
                 return r;
             }),
             py::arg("name"))
        .def_readwrite("name", &DomainRecord::name)
        .def_readwrite("price_usd", &DomainRecord::price_usd)
        .def("get", [](const DomainRecord& r, const std::string& k) { return r.get(parse_feature_kind(k)); })
        .def("set", [](DomainRecord& r, const std::string& k, std::int64_t v) { r.set(parse_feature_kind(k), v); })
        .def("__eq__", [](const DomainRecord& a, const DomainRecord& b) { return a == b; })
        .def("__repr__", [](const DomainRecord& r) { return "<DomainRecord " + r.name + ">"; });

    m.def("validation_errors", &validation_errors, py::arg("record"), py::arg("current_year"));
    m.def("label", &label, py::arg("record"));
    m.def("transform_feature",
          py::overload_cast<std::int64_t, std::string_view, int>(&transform_feature), py::arg("value"),
          py::arg("kind"), py::arg("reference_year"));
    m.def("geometric_mean", [](const std::vector<double>& v) { return geometric_mean(v); });
    m.def(
        "compute_descriptors",
        [](const DomainRecord& r, int year) { return descriptor_dict(compute_descriptors(r, year)); },
        py::arg("record"), py::arg("reference_year"));
    m.attr("DESCRIPTOR_NAMES") = [] {
        py::list names;
        for (const auto n : kDescriptorNames) names.append(std::string(n));
        return names;
    }();

    // dataset
    m.def(
        "parse_csv",
        [](const std::filesystem::path& path, int year) {
            auto r = parse_csv(path, year);
            py::list errors;
            for (const auto& e : r.errors) errors.append(py::make_tuple(e.line, e.message));
            return py::make_tuple(std::move(r.records), errors);
        },
        py::arg("path"), py::arg("current_year") = current_utc_year(),
        "Returns (records, errors) where errors is a list of (line, message).");
    m.def(
        "write_csv",
        [](const std::filesystem::path& path, const std::vector<DomainRecord>& records) { write_csv(path, records); },
        py::arg("path"), py::arg("records"));
    m.def(
        "synth_generate",
        [](std::size_t n, std::uint64_t seed) { return synth_generate(n, seed).records; }, py::arg("n"),
        py::arg("seed"));
    m.def(
        "diversity_split",
        [](const std::vector<DomainRecord>& records, std::uint64_t seed, int year) {
            const auto s = diversity_split(make_labeled(records), seed, year);
            return py::make_tuple(s.training_index, s.test_index, s.external_index);
        },
        py::arg("records"), py::arg("seed"), py::arg("reference_year"),
        "Returns (training, test, external) index lists.");

    // clustering
    m.def(
        "spearman_rho",
        [](const std::vector<double>& x, const std::vector<double>& y) { return spearman_rho(x, y).rho; },
        py::arg("x"), py::arg("y"));
    m.def(
        "cluster_features",
        [](const std::vector<DomainRecord>& records, int year, std::size_t k) {
            const auto matrix = make_feature_matrix(records, year);
            const auto parts = cut(hcluster(matrix), k);
            const auto names = name_groups(parts, matrix.column_names());
            py::dict out;
            for (std::size_t g = 0; g < parts.size(); ++g) {
                py::list cols;
                for (const auto c : parts[g]) cols.append(matrix.column_names()[c]);
                out[py::str(names[g])] = cols;
            }
            return out;
        },
        py::arg("records"), py::arg("reference_year"), py::arg("k") = 5,
        "Average-linkage clustering of the feature columns, cut into k named groups.");

    // svm
    py::class_<KernelSpec>(m, "KernelSpec")
        .def_static("linear", &KernelSpec::linear)
        .def_static("rbf", &KernelSpec::rbf, py::arg("gamma"))
        .def_static("polynomial", &KernelSpec::polynomial, py::arg("gamma"), py::arg("degree"), py::arg("coef0"))
        .def_property_readonly("kind", [](const KernelSpec& k) { return std::string(kernel_name(k.kind)); })
        .def_readonly("gamma", &KernelSpec::gamma)
        .def_readonly("degree", &KernelSpec::degree)
        .def_readonly("coef0", &KernelSpec::coef0);

    py::class_<SvmModel>(m, "SvmModel")
        .def_readonly("kernel", &SvmModel::kernel)
        .def_readonly("C", &SvmModel::C)
        .def_readonly("bias", &SvmModel::bias)
        .def_readonly("dual_coeffs", &SvmModel::dual_coeffs)
        .def_readonly("converged", &SvmModel::converged)
        .def_property_readonly("n_support", [](const SvmModel& s) { return s.support_vectors.size(); })
        .def_property_readonly("reference_year", [](const SvmModel& s) { return s.scaling.reference_year; })
        .def("decision_value", [](const SvmModel& s, const std::vector<double>& x) { return decision_value(s, x); })
        .def(
            "predict",
            [](const SvmModel& s, const DomainRecord& r, std::optional<int> year) {
                const auto p = predict(s, r, year.value_or(s.scaling.reference_year));
                return py::make_tuple(p.label, p.decision);
            },
            py::arg("record"), py::arg("reference_year") = py::none())
        .def("to_text", [](const SvmModel& s) {
            std::ostringstream out;
            write_model(s, out);
            return out.str();
        });

    m.def(
        "smo_train",
        [](const std::vector<std::vector<double>>& x, const std::vector<int>& y, double C, const KernelSpec& kernel,
           double tolerance) {
            TrainConfig cfg;
            cfg.C = C;
            cfg.kernel = kernel;
            cfg.tolerance = tolerance;
            return smo_train(to_points(x), y, cfg);
        },
        py::arg("x"), py::arg("y"), py::arg("C") = 1.0, py::arg("kernel") = KernelSpec::rbf(1.0),
        py::arg("tolerance") = 1e-3);
    m.def(
        "grid_search",
        [](const std::vector<std::vector<double>>& x, const std::vector<int>& y, const std::string& c_grid,
           const std::string& gamma_grid, int folds, std::uint64_t seed, int width) {
            GridSearchOptions o;
            o.c_grid = parse_exponent_range(c_grid);
            o.gamma_grid = parse_exponent_range(gamma_grid);
            o.folds = folds;
            o.seed = seed;
            o.width = width;
            const auto r = grid_search(to_points(x), y, o);
            py::dict out;
            out["C"] = r.best_c;
            out["gamma"] = r.best_gamma;
            out["cv_accuracy"] = r.best_accuracy;
            return out;
        },
        py::arg("x"), py::arg("y"), py::arg("c_grid") = "-5:15:2", py::arg("gamma_grid") = "-15:3:2",
        py::arg("folds") = 5, py::arg("seed") = 0, py::arg("width") = 1);
    m.def(
        "load_model", [](const std::filesystem::path& p) { return load_model(p); }, py::arg("path"));
    m.def(
        "save_model", [](const SvmModel& s, const std::filesystem::path& p) { save_model(s, p); }, py::arg("model"),
        py::arg("path"));

    // metrics
    m.def(
        "evaluate",
        [](const std::vector<Label>& predictions, const std::vector<Label>& truths) {
            const auto row = evaluation_row("", confusion(predictions, truths));
            py::dict out;
            out["TP"] = row.counts.tp;
            out["TN"] = row.counts.tn;
            out["FP"] = row.counts.fp;
            out["FN"] = row.counts.fn;
            out["ACC"] = row.acc;
            out["SE"] = row.se;
            out["SP"] = row.sp;
            out["MCC"] = row.mcc;
            return out;
        },
        py::arg("predictions"), py::arg("truths"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv{"domscreen"};
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line interface in-process; returns (exit_code, stdout, stderr).");
}
