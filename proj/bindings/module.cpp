// Python bindings for the main operations: ink preprocessing, synthetic
// corpora, the classifier and generator with train/save/load, sampling,
// SVG rendering and the generation-quality report.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "scrawl/classifier.hpp"
#include "scrawl/data_io.hpp"
#include "scrawl/generator.hpp"
#include "scrawl/ink.hpp"

namespace py = pybind11;
using namespace scrawl;

namespace {

using PyPoints = std::vector<std::tuple<double, double, int>>;
using PyCorpus = std::vector<std::pair<int, PyPoints>>;

ink::InkSequence to_ink(const PyPoints& points, std::optional<int> label = std::nullopt) {
    ink::InkSequence seq;
    seq.label = label;
    seq.points.reserve(points.size());
    for (const auto& [x, y, s] : points) seq.points.push_back({x, y, s});
    return seq;
}

PyPoints from_ink(const ink::InkSequence& seq) {
    PyPoints out;
    out.reserve(seq.size());
    for (const auto& p : seq.points) out.emplace_back(p.x, p.y, p.stroke_id);
    return out;
}

ink::PreprocessConfig preset_by_name(const std::string& name) {
    if (name == "recognition") return ink::recognition_preset();
    if (name == "generation") return ink::generation_preset();
    throw InvalidConfigError("unknown preset: " + name);
}

std::vector<double> to_vector(const num::Matrix& m) {
    return {m.data(), m.data() + m.size()};
}

struct PyClassifier {
    clf::ClassifierModel model;

    static std::vector<clf::LabeledFeatures> featurize(const PyCorpus& corpus) {
        std::vector<clf::LabeledFeatures> out;
        out.reserve(corpus.size());
        for (const auto& [label, points] : corpus)
            out.push_back({ink::to_line_features(
                               ink::preprocess(to_ink(points), ink::recognition_preset())),
                           label});
        return out;
    }

    static PyClassifier train(const PyCorpus& corpus, int epochs, int batch, double lr,
                              std::uint64_t seed, const std::string& arch, int classes) {
        clf::NetSpec spec = clf::net_preset(arch);
        if (classes > 0) {
            spec.class_count = classes;
        } else if (spec.class_count == 0) {
            int max_label = -1;
            for (const auto& [label, points] : corpus) max_label = std::max(max_label, label);
            spec.class_count = max_label + 1;
        }
        PyClassifier out;
        Rng rng(seed);
        out.model = clf::init_classifier(spec, rng);
        optim::OptConfig cfg;
        cfg.max_epochs = epochs;
        cfg.batch_size = batch;
        cfg.lr = lr;
        clf::train(out.model, featurize(corpus), cfg, rng);
        return out;
    }

    std::vector<double> predict_proba(const PyPoints& points) const {
        const auto prepped = ink::preprocess(to_ink(points), ink::recognition_preset());
        return to_vector(clf::forward(model, ink::to_line_features(prepped)));
    }

    int predict(const PyPoints& points) const {
        const auto prepped = ink::preprocess(to_ink(points), ink::recognition_preset());
        return num::argmax(clf::forward(model, ink::to_line_features(prepped)));
    }

    std::vector<double> predict_ensemble(const PyPoints& points, int n_sub, double p,
                                         std::uint64_t seed) const {
        const auto prepped = ink::preprocess(to_ink(points), ink::recognition_preset());
        Rng rng(seed);
        return to_vector(clf::predict_ensemble(model, ink::to_line_features(prepped), n_sub, p, rng));
    }

    double accuracy(const PyCorpus& corpus) const {
        return clf::evaluate(model, featurize(corpus)).accuracy;
    }

    void save(const std::string& base) { io::save_classifier(base, model); }

    static PyClassifier load(const std::string& base) { return {io::load_classifier(base)}; }

    std::string architecture() const { return model.spec.architecture_string(); }
    int class_count() const { return model.spec.class_count; }
};

struct PyGenerator {
    gen::GenParams params;
    gen::GenConfig config;

    static PyGenerator train(const PyCorpus& corpus, int epochs, int batch, double lr,
                             std::uint64_t seed, const std::string& arch, int classes) {
        gen::GenConfig cfg = gen::gen_preset(arch);
        if (classes > 0) {
            cfg.class_count = classes;
        } else if (cfg.class_count == 0) {
            int max_label = -1;
            for (const auto& [label, points] : corpus) max_label = std::max(max_label, label);
            cfg.class_count = max_label + 1;
        }
        std::vector<std::pair<std::vector<ink::GenToken>, int>> tokens;
        tokens.reserve(corpus.size());
        for (const auto& [label, points] : corpus)
            tokens.emplace_back(
                ink::to_gen_tokens(ink::preprocess(to_ink(points), ink::generation_preset())), label);

        PyGenerator out;
        out.config = cfg;
        Rng rng(seed);
        out.params = gen::init_generator(cfg, rng);
        optim::OptConfig ocfg;
        ocfg.max_epochs = epochs;
        ocfg.batch_size = batch;
        ocfg.lr = lr;
        gen::train(out.params, out.config, tokens, ocfg, rng);
        return out;
    }

    std::pair<PyPoints, bool> sample(int class_id, std::uint64_t seed, int max_len) const {
        Rng rng(seed);
        const auto result = gen::sample_character(params, config, class_id, rng, max_len);
        return {from_ink(result.ink), result.truncated};
    }

    std::vector<int> nearest_neighbors(int class_id, int k) const {
        return gen::nearest_neighbors(params.E, class_id, k);
    }

    void save(const std::string& base) { io::save_generator(base, params, config); }

    static PyGenerator load(const std::string& base) {
        auto [params, cfg] = io::load_generator(base);
        return {std::move(params), cfg};
    }

    int class_count() const { return config.class_count; }
};

py::dict report_to_dict(const io::QualityReport& report) {
    py::dict per_class;
    for (const auto& [id, acc] : report.per_class) per_class[py::int_(id)] = acc;
    py::dict out;
    out["overall"] = report.overall;
    out["per_class"] = per_class;
    out["worst"] = report.worst;
    out["confusion"] = report.confusion;
    out["truncated"] = report.truncated;
    out["samples"] = report.samples;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "recognize and draw handwritten characters with recurrent networks";

    py::register_exception<Error>(m, "ScrawlError");

    m.def(
        "preprocess",
        [](const PyPoints& points, const std::string& preset) {
            return from_ink(ink::preprocess(to_ink(points), preset_by_name(preset)));
        },
        py::arg("points"), py::arg("preset") = "recognition",
        "Remove redundant points and normalize coordinates.");

    m.def(
        "remove_redundant_points",
        [](const PyPoints& points, double dist_factor, double cos_threshold) {
            return from_ink(ink::remove_redundant_points(to_ink(points), {dist_factor, cos_threshold}));
        },
        py::arg("points"), py::arg("dist_factor") = 0.01, py::arg("cos_threshold") = 0.99);

    m.def(
        "normalize_coordinates",
        [](const PyPoints& points) {
            const auto [seq, stats] = ink::normalize_coordinates(to_ink(points));
            return py::make_tuple(from_ink(seq),
                                  py::make_tuple(stats.mu_x, stats.mu_y, stats.delta_x));
        },
        py::arg("points"), "Returns (points, (mu_x, mu_y, delta_x)).");

    m.def(
        "line_features",
        [](const PyPoints& points) { return ink::to_line_features(to_ink(points)); },
        py::arg("points"), "Six-dimensional per-segment classifier features.");

    m.def(
        "gen_tokens",
        [](const PyPoints& points) {
            std::vector<std::tuple<double, double, int>> out;
            for (const auto& tok : ink::to_gen_tokens(to_ink(points)))
                out.emplace_back(tok.dx, tok.dy, static_cast<int>(tok.pen));
            return out;
        },
        py::arg("points"), "(dx, dy, pen) tokens; pen 0=down, 1=up, 2=end-of-char.");

    m.def(
        "synthesize_corpus",
        [](int classes, int per_class, double noise, std::uint64_t seed) {
            auto templates = io::builtin_templates();
            if (classes > 0 && classes <= static_cast<int>(templates.size()))
                templates.resize(static_cast<std::size_t>(classes));
            io::SynthOptions opt;
            opt.noise = noise;
            Rng rng(seed);
            const auto corpus = io::synthesize_corpus(templates, per_class, opt, rng);
            PyCorpus out;
            out.reserve(corpus.samples.size());
            for (const auto& seq : corpus.samples) out.emplace_back(*seq.label, from_ink(seq));
            return out;
        },
        py::arg("classes") = 10, py::arg("per_class") = 10, py::arg("noise") = 0.025,
        py::arg("seed") = 0, "List of (label, points) synthetic samples.");

    m.def(
        "render_svg", [](const PyPoints& points) { return io::render_svg(to_ink(points)); },
        py::arg("points"));

    py::class_<PyClassifier>(m, "Classifier")
        .def_static("train", &PyClassifier::train, py::arg("corpus"), py::arg("epochs") = 40,
                    py::arg("batch") = 32, py::arg("lr") = 0.001, py::arg("seed") = 0,
                    py::arg("arch") = "desk-clf", py::arg("classes") = 0)
        .def("predict_proba", &PyClassifier::predict_proba, py::arg("points"))
        .def("predict", &PyClassifier::predict, py::arg("points"))
        .def("predict_ensemble", &PyClassifier::predict_ensemble, py::arg("points"),
             py::arg("n_sub") = 30, py::arg("p") = 0.3, py::arg("seed") = 0)
        .def("accuracy", &PyClassifier::accuracy, py::arg("corpus"))
        .def("save", &PyClassifier::save, py::arg("base"))
        .def_static("load", &PyClassifier::load, py::arg("base"))
        .def_property_readonly("architecture", &PyClassifier::architecture)
        .def_property_readonly("class_count", &PyClassifier::class_count);

    py::class_<PyGenerator>(m, "Generator")
        .def_static("train", &PyGenerator::train, py::arg("corpus"), py::arg("epochs") = 40,
                    py::arg("batch") = 32, py::arg("lr") = 0.001, py::arg("seed") = 0,
                    py::arg("arch") = "desk-gen", py::arg("classes") = 0)
        .def("sample", &PyGenerator::sample, py::arg("class_id"), py::arg("seed") = 0,
             py::arg("max_len") = -1, "Returns (points, truncated).")
        .def("nearest_neighbors", &PyGenerator::nearest_neighbors, py::arg("class_id"),
             py::arg("k") = 3)
        .def("save", &PyGenerator::save, py::arg("base"))
        .def_static("load", &PyGenerator::load, py::arg("base"))
        .def_property_readonly("class_count", &PyGenerator::class_count);

    m.def(
        "quality_report",
        [](const PyGenerator& generator, const PyClassifier& classifier, int n_per_class,
           std::uint64_t seed, int worst_k) {
            std::vector<int> classes;
            for (int c = 0; c < generator.config.class_count; ++c) classes.push_back(c);
            Rng rng(seed);
            return report_to_dict(io::quality_report(generator.params, generator.config,
                                                     classifier.model, classes, n_per_class, rng,
                                                     worst_k));
        },
        py::arg("generator"), py::arg("classifier"), py::arg("n_per_class") = 10,
        py::arg("seed") = 0, py::arg("worst_k") = 3,
        "Sample characters, classify them, report per-class accuracy.");
}
