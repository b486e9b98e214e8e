#include "scrawl/data_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace scrawl::io {

using nlohmann::json;

Corpus read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    Corpus corpus;
    std::string line;
    int line_no = 0;
    int max_label = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("points"))
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected {label, points}");
        ink::InkSequence seq;
        if (j.contains("label") && !j["label"].is_null()) {
            if (!j["label"].is_number_integer())
                throw ParseError(path + ":" + std::to_string(line_no) + ": label must be an integer or null");
            seq.label = j["label"].get<int>();
            max_label = std::max(max_label, *seq.label);
        }
        if (!j["points"].is_array())
            throw ParseError(path + ":" + std::to_string(line_no) + ": points must be an array");
        for (const auto& pt : j["points"]) {
            if (!pt.is_array() || pt.size() != 3 || !pt[0].is_number() || !pt[1].is_number() ||
                !pt[2].is_number_integer())
                throw ParseError(path + ":" + std::to_string(line_no) + ": point must be [x, y, stroke_id]");
            const double x = pt[0].get<double>();
            const double y = pt[1].get<double>();
            if (!std::isfinite(x) || !std::isfinite(y))
                throw ValueError(path + ":" + std::to_string(line_no) + ": non-finite coordinate");
            const int stroke = pt[2].get<int>();
            if (stroke < 0)
                throw ValueError(path + ":" + std::to_string(line_no) + ": negative stroke id");
            seq.points.push_back({x, y, stroke});
        }
        corpus.samples.push_back(std::move(seq));
    }
    corpus.class_count = max_label + 1;
    return corpus;
}

void write_jsonl(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    for (const auto& seq : corpus.samples) {
        json points = json::array();
        for (const auto& p : seq.points) {
            if (!std::isfinite(p.x) || !std::isfinite(p.y))
                throw ValueError("write_jsonl: non-finite coordinate");
            points.push_back(json::array({p.x, p.y, p.stroke_id}));
        }
        json j;
        if (seq.label)
            j["label"] = *seq.label;
        else
            j["label"] = nullptr;
        j["points"] = std::move(points);
        out << j.dump() << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

std::vector<GlyphTemplate> builtin_templates() {
    using Stroke = std::vector<std::array<double, 2>>;
    std::vector<GlyphTemplate> t;
    // 0: plus    } deliberately confusable pair: the same two-bar stroke
    // 2: T       } structure, the vertical attached mid-bar versus at the top
    t.push_back({0, {Stroke{{0.1, 0.5}, {0.9, 0.5}}, Stroke{{0.5, 0.1}, {0.5, 0.9}}}});
    // 1: box (closed square, one stroke)
    t.push_back({1, {Stroke{{0.15, 0.15}, {0.85, 0.15}, {0.85, 0.85}, {0.15, 0.85}, {0.15, 0.15}}}});
    t.push_back({2, {Stroke{{0.1, 0.15}, {0.9, 0.15}}, Stroke{{0.5, 0.15}, {0.5, 0.9}}}});
    // 3: L
    t.push_back({3, {Stroke{{0.2, 0.1}, {0.2, 0.9}, {0.85, 0.9}}}});
    // 4: X
    t.push_back({4, {Stroke{{0.15, 0.1}, {0.85, 0.9}}, Stroke{{0.85, 0.1}, {0.15, 0.9}}}});
    // 5: H
    t.push_back({5, {Stroke{{0.2, 0.1}, {0.2, 0.9}}, Stroke{{0.8, 0.1}, {0.8, 0.9}},
                     Stroke{{0.2, 0.5}, {0.8, 0.5}}}});
    // 6: V
    t.push_back({6, {Stroke{{0.1, 0.1}, {0.5, 0.9}, {0.9, 0.1}}}});
    // 7: three-segment zigzag, 8: four-segment zigzag (same box, same
    // opening strokes, one extra turn)
    t.push_back({7, {Stroke{{0.1, 0.2}, {0.9, 0.2}, {0.1, 0.5}, {0.9, 0.8}}}});
    t.push_back({8, {Stroke{{0.1, 0.2}, {0.9, 0.2}, {0.1, 0.45}, {0.9, 0.55}, {0.1, 0.8}}}});
    // 9: triangle
    t.push_back({9, {Stroke{{0.5, 0.1}, {0.9, 0.85}, {0.1, 0.85}, {0.5, 0.1}}}});
    return t;
}

std::pair<int, int> confusable_pair() {
    return {0, 2};
}

Corpus synthesize_corpus(const std::vector<GlyphTemplate>& templates, int per_class,
                         const SynthOptions& opt, Rng& rng) {
    if (templates.empty()) throw InvalidConfigError("synthesize_corpus: no templates");
    if (per_class < 1) throw InvalidConfigError("synthesize_corpus: per_class must be >= 1");
    if (opt.noise < 0.0) throw InvalidConfigError("synthesize_corpus: noise must be >= 0");
    if (opt.density_lo < 1 || opt.density_hi < opt.density_lo)
        throw InvalidConfigError("synthesize_corpus: bad density range");

    Corpus corpus;
    int max_class = 0;
    for (const auto& tpl : templates) max_class = std::max(max_class, tpl.class_id);
    corpus.class_count = max_class + 1;

    for (const auto& tpl : templates) {
        for (int s = 0; s < per_class; ++s) {
            const double scale = uniform(rng, opt.scale_lo, opt.scale_hi);
            const double angle = uniform(rng, -opt.rotate_deg, opt.rotate_deg) * std::numbers::pi / 180.0;
            const double ca = std::cos(angle), sa = std::sin(angle);

            ink::InkSequence seq;
            seq.label = tpl.class_id;
            int stroke_id = 0;
            for (const auto& stroke : tpl.strokes) {
                std::vector<std::array<double, 2>> pts;
                pts.push_back(stroke.front());
                for (std::size_t i = 0; i + 1 < stroke.size(); ++i) {
                    const int density = uniform_int(rng, opt.density_lo, opt.density_hi);
                    for (int k = 1; k <= density; ++k) {
                        const double u = static_cast<double>(k) / density;
                        pts.push_back({stroke[i][0] + u * (stroke[i + 1][0] - stroke[i][0]),
                                       stroke[i][1] + u * (stroke[i + 1][1] - stroke[i][1])});
                    }
                }
                for (auto& p : pts) {
                    // rotate and scale about the template center, then jitter
                    const double cx = p[0] - 0.5, cy = p[1] - 0.5;
                    double x = 0.5 + scale * (ca * cx - sa * cy);
                    double y = 0.5 + scale * (sa * cx + ca * cy);
                    if (opt.noise > 0.0) {
                        x += normal(rng, 0.0, opt.noise);
                        y += normal(rng, 0.0, opt.noise);
                    }
                    seq.points.push_back({x, y, stroke_id});
                }
                ++stroke_id;
            }
            corpus.samples.push_back(std::move(seq));
        }
    }
    return corpus;
}

std::string render_svg(const ink::InkSequence& seq) {
    if (seq.empty()) throw EmptyInkError("render_svg: empty sequence");
    static const char* kPalette[] = {"#e41a1c", "#377eb8", "#4daf4a", "#984ea3",
                                     "#ff7f00", "#a65628", "#f781bf", "#17becf"};
    constexpr int kPaletteSize = 8;

    const ink::BoundingBox box = bounding_box(seq);
    const double extent = std::max({box.width(), box.height(), 1e-6});
    const double margin = 0.05 * extent;
    const double stroke_width = 0.02 * extent;

    std::ostringstream os;
    os.precision(8);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\""
       << box.min_x - margin << " " << box.min_y - margin << " "
       << box.width() + 2 * margin << " " << box.height() + 2 * margin << "\">\n";

    std::size_t i = 0;
    int stroke_index = 0;
    const auto& pts = seq.points;
    while (i < pts.size()) {
        std::size_t end = i;
        while (end + 1 < pts.size() && pts[end + 1].stroke_id == pts[i].stroke_id) ++end;
        os << "  <polyline points=\"";
        for (std::size_t j = i; j <= end; ++j) {
            if (j > i) os << " ";
            os << pts[j].x << "," << pts[j].y;
        }
        os << "\" fill=\"none\" stroke=\"" << kPalette[stroke_index % kPaletteSize]
           << "\" stroke-width=\"" << stroke_width
           << "\" stroke-linecap=\"round\" stroke-linejoin=\"round\"/>\n";
        ++stroke_index;
        i = end + 1;
    }
    os << "</svg>\n";
    return os.str();
}

namespace {

std::string strip_json_suffix(const std::string& base) {
    if (base.size() > 5 && base.substr(base.size() - 5) == ".json") return base.substr(0, base.size() - 5);
    return base;
}

void write_f32_le(std::ofstream& out, float value) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
    const char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                           static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
    out.write(bytes, 4);
}

float read_f32_le(std::ifstream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    const std::uint32_t bits = static_cast<std::uint32_t>(bytes[0]) |
                               (static_cast<std::uint32_t>(bytes[1]) << 8) |
                               (static_cast<std::uint32_t>(bytes[2]) << 16) |
                               (static_cast<std::uint32_t>(bytes[3]) << 24);
    return std::bit_cast<float>(bits);
}

} // namespace

void write_checkpoint(const std::string& base_in, const std::string& kind,
                      const json& config, const ParamSet& params) {
    const std::string base = strip_json_suffix(base_in);
    json manifest;
    manifest["kind"] = kind;
    manifest["config"] = config;
    json tensors = json::array();
    for (const auto& p : params)
        tensors.push_back({{"name", p.name}, {"rows", p.value->rows()}, {"cols", p.value->cols()}});
    manifest["tensors"] = std::move(tensors);

    std::ofstream jf(base + ".json");
    if (!jf) throw IoError("cannot write " + base + ".json");
    jf << manifest.dump(2) << "\n";

    std::ofstream bf(base + ".bin", std::ios::binary);
    if (!bf) throw IoError("cannot write " + base + ".bin");
    for (const auto& p : params)
        for (int i = 0; i < p.value->size(); ++i)
            write_f32_le(bf, static_cast<float>((*p.value)[i]));
    if (!bf) throw IoError("write failed for " + base + ".bin");
}

Checkpoint read_checkpoint(const std::string& base_in, json& config_out) {
    const std::string base = strip_json_suffix(base_in);
    std::ifstream jf(base + ".json");
    if (!jf) throw IoError("cannot open " + base + ".json");
    json manifest;
    try {
        jf >> manifest;
    } catch (const json::exception& e) {
        throw ParseError(base + ".json: " + e.what());
    }
    if (!manifest.contains("kind") || !manifest.contains("tensors"))
        throw ParseError(base + ".json: missing kind/tensors");

    Checkpoint ckpt;
    ckpt.kind = manifest["kind"].get<std::string>();
    config_out = manifest.value("config", json::object());

    std::ifstream bf(base + ".bin", std::ios::binary);
    if (!bf) throw IoError("cannot open " + base + ".bin");
    for (const auto& t : manifest["tensors"]) {
        const std::string name = t["name"].get<std::string>();
        const int rows = t["rows"].get<int>();
        const int cols = t["cols"].get<int>();
        if (rows <= 0 || cols <= 0) throw ParseError(base + ".json: bad tensor shape for " + name);
        if (ckpt.tensors.count(name)) throw ParseError(base + ".json: duplicate tensor " + name);
        Matrix m(rows, cols);
        for (int i = 0; i < m.size(); ++i) m[i] = static_cast<double>(read_f32_le(bf));
        if (!bf) throw ParseError(base + ".bin: truncated blob at tensor " + name);
        ckpt.tensors.emplace(name, std::move(m));
    }
    return ckpt;
}

namespace {

void load_tensors(const Checkpoint& ckpt, const ParamSet& params, const std::string& base) {
    for (const auto& p : params) {
        auto it = ckpt.tensors.find(p.name);
        if (it == ckpt.tensors.end()) throw ConfigError(base + ": missing tensor " + p.name);
        if (!it->second.same_shape(*p.value))
            throw ConfigError(base + ": tensor " + p.name + " has shape " +
                              num::shape_string(it->second) + ", expected " + num::shape_string(*p.value));
        *p.value = it->second;
    }
    if (ckpt.tensors.size() != params.size()) throw ConfigError(base + ": extra tensors in checkpoint");
}

} // namespace

void save_classifier(const std::string& base, clf::ClassifierModel& model) {
    json config;
    config["input_dim"] = model.spec.input_dim;
    config["hidden_dims"] = model.spec.hidden_dims;
    config["full_dim"] = model.spec.full_dim;
    config["class_count"] = model.spec.class_count;
    config["cell"] = cells::to_string(model.spec.cell);
    config["dropout_pool"] = model.spec.dropout_pool;
    config["dropout_input"] = model.spec.dropout_input;
    write_checkpoint(base, "classifier", config, model.params());
}

clf::ClassifierModel load_classifier(const std::string& base) {
    json config;
    const Checkpoint ckpt = read_checkpoint(base, config);
    if (ckpt.kind != "classifier") throw ConfigError(base + ": not a classifier checkpoint");
    clf::NetSpec spec;
    try {
        spec.input_dim = config.at("input_dim").get<int>();
        spec.hidden_dims = config.at("hidden_dims").get<std::vector<int>>();
        spec.full_dim = config.at("full_dim").get<int>();
        spec.class_count = config.at("class_count").get<int>();
        spec.cell = cells::cell_kind_from_string(config.at("cell").get<std::string>());
        spec.dropout_pool = config.at("dropout_pool").get<double>();
        spec.dropout_input = config.at("dropout_input").get<double>();
    } catch (const json::exception& e) {
        throw ParseError(base + ".json: bad classifier config: " + e.what());
    }
    Rng dummy(0);
    clf::ClassifierModel model = clf::init_classifier(spec, dummy);
    load_tensors(ckpt, model.params(), base);
    return model;
}

void save_generator(const std::string& base, gen::GenParams& params, const gen::GenConfig& cfg) {
    json config;
    config["class_count"] = cfg.class_count;
    config["embed_dim"] = cfg.embed_dim;
    config["input_dim"] = cfg.input_dim;
    config["hidden_dim"] = cfg.hidden_dim;
    config["output_dim"] = cfg.output_dim;
    config["mixture_count"] = cfg.mixture_count;
    config["dropout"] = cfg.dropout;
    config["loss_weights"] = cfg.loss_weights;
    config["max_len"] = cfg.max_len;
    config["terminal_direction_loss"] = cfg.terminal_direction_loss;
    write_checkpoint(base, "generator", config, params.params());
}

std::pair<gen::GenParams, gen::GenConfig> load_generator(const std::string& base) {
    json config;
    const Checkpoint ckpt = read_checkpoint(base, config);
    if (ckpt.kind != "generator") throw ConfigError(base + ": not a generator checkpoint");
    gen::GenConfig cfg;
    try {
        cfg.class_count = config.at("class_count").get<int>();
        cfg.embed_dim = config.at("embed_dim").get<int>();
        cfg.input_dim = config.at("input_dim").get<int>();
        cfg.hidden_dim = config.at("hidden_dim").get<int>();
        cfg.output_dim = config.at("output_dim").get<int>();
        cfg.mixture_count = config.at("mixture_count").get<int>();
        cfg.dropout = config.at("dropout").get<double>();
        cfg.loss_weights = config.at("loss_weights").get<std::array<double, 3>>();
        cfg.max_len = config.at("max_len").get<int>();
        cfg.terminal_direction_loss = config.at("terminal_direction_loss").get<bool>();
    } catch (const json::exception& e) {
        throw ParseError(base + ".json: bad generator config: " + e.what());
    }
    Rng dummy(0);
    gen::GenParams params = gen::init_generator(cfg, dummy);
    load_tensors(ckpt, params.params(), base);
    return {std::move(params), cfg};
}

QualityReport quality_report(const SampleCharFn& sample, const ClassifyFn& classify,
                             const std::vector<int>& classes, int n_per_class, Rng& rng,
                             int worst_k) {
    if (classes.empty() || n_per_class < 1)
        throw InvalidConfigError("quality_report: need classes and n_per_class >= 1");
    const int k = static_cast<int>(classes.size());
    QualityReport report;
    report.confusion.assign(static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(k), 0));

    int correct_total = 0;
    for (int ci = 0; ci < k; ++ci) {
        const int class_id = classes[static_cast<std::size_t>(ci)];
        int correct = 0;
        for (int s = 0; s < n_per_class; ++s) {
            gen::SampleResult res = sample(class_id, rng);
            if (res.truncated) ++report.truncated;
            int predicted = -1;
            try {
                predicted = classify(res.ink);
            } catch (const Error&) {
                predicted = -1; // unusable sample counts as a miss
            }
            if (predicted == class_id) ++correct;
            for (int cj = 0; cj < k; ++cj)
                if (classes[static_cast<std::size_t>(cj)] == predicted) {
                    report.confusion[static_cast<std::size_t>(ci)][static_cast<std::size_t>(cj)] += 1;
                    break;
                }
            ++report.samples;
        }
        correct_total += correct;
        report.per_class[class_id] = static_cast<double>(correct) / static_cast<double>(n_per_class);
    }
    report.overall = static_cast<double>(correct_total) / static_cast<double>(report.samples);

    std::vector<std::pair<double, int>> ordered;
    ordered.reserve(static_cast<std::size_t>(k));
    for (const auto& [id, acc] : report.per_class) ordered.emplace_back(acc, id);
    std::sort(ordered.begin(), ordered.end());
    const int take = std::min<int>(worst_k, k);
    for (int i = 0; i < take; ++i) report.worst.push_back(ordered[static_cast<std::size_t>(i)].second);
    return report;
}

QualityReport quality_report(const gen::GenParams& gp, const gen::GenConfig& gc,
                             const clf::ClassifierModel& model,
                             const std::vector<int>& classes, int n_per_class, Rng& rng,
                             int worst_k) {
    if (gc.class_count != model.spec.class_count)
        throw ConfigError("quality_report: generator covers " + std::to_string(gc.class_count) +
                          " classes but the classifier expects " + std::to_string(model.spec.class_count));
    for (int c : classes)
        if (c < 0 || c >= gc.class_count)
            throw ConfigError("quality_report: class " + std::to_string(c) + " out of range");

    const auto sample = [&](int class_id, Rng& r) { return gen::sample_character(gp, gc, class_id, r); };
    const auto classify = [&](const ink::InkSequence& seq) {
        const ink::InkSequence prepped = ink::preprocess(seq, ink::recognition_preset());
        return num::argmax(clf::forward(model, ink::to_line_features(prepped)));
    };
    return quality_report(sample, classify, classes, n_per_class, rng, worst_k);
}

json to_json(const QualityReport& report) {
    json per_class = json::object();
    for (const auto& [id, acc] : report.per_class) per_class[std::to_string(id)] = acc;
    return json{{"overall", report.overall},
                {"per_class", per_class},
                {"worst", report.worst},
                {"confusion", report.confusion},
                {"truncated", report.truncated},
                {"samples", report.samples}};
}

} // namespace scrawl::io
