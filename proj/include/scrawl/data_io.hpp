#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "scrawl/classifier.hpp"
#include "scrawl/generator.hpp"
#include "scrawl/ink.hpp"

#include <nlohmann/json_fwd.hpp>

namespace scrawl::io {

using num::Matrix;

struct Corpus {
    std::vector<ink::InkSequence> samples;
    int class_count = 0;
    std::string split; // "train" | "test" | ""
};

// One character per line: {"label": int|null, "points": [[x, y, stroke_id], ...]}.
Corpus read_jsonl(const std::string& path);
void write_jsonl(const Corpus& corpus, const std::string& path);

// Polyline control points in [0,1]^2 per stroke, drawn in order.
struct GlyphTemplate {
    int class_id = 0;
    std::vector<std::vector<std::array<double, 2>>> strokes;
};

// Ten distinct multi-stroke figures; classes 0 and 2 (plus and T) are
// deliberately confusable: the same two bars, attached differently.
std::vector<GlyphTemplate> builtin_templates();
std::pair<int, int> confusable_pair(); // {0, 2}

struct SynthOptions {
    double noise = 0.025;         // per-point Gaussian jitter
    double scale_lo = 0.8, scale_hi = 1.2;
    double rotate_deg = 10.0;     // +- bound
    int density_lo = 4, density_hi = 7; // points per template segment
};

Corpus synthesize_corpus(const std::vector<GlyphTemplate>& templates, int per_class,
                         const SynthOptions& opt, Rng& rng);

// One polyline per pen-down stroke, palette cycling by stroke index,
// viewBox fitted with a 5% margin.
std::string render_svg(const ink::InkSequence& seq);

// Checkpoint = <base>.json manifest + <base>.bin little-endian float32
// blob, tensors concatenated row-major in manifest order.
void write_checkpoint(const std::string& base, const std::string& kind,
                      const nlohmann::json& config, const ParamSet& params);

struct Checkpoint {
    std::string kind;
    std::map<std::string, Matrix> tensors;
};

Checkpoint read_checkpoint(const std::string& base, nlohmann::json& config_out);

void save_classifier(const std::string& base, clf::ClassifierModel& model);
clf::ClassifierModel load_classifier(const std::string& base);

void save_generator(const std::string& base, gen::GenParams& params, const gen::GenConfig& cfg);
std::pair<gen::GenParams, gen::GenConfig> load_generator(const std::string& base);

struct QualityReport {
    double overall = 0.0;
    std::map<int, double> per_class;
    std::vector<int> worst;      // lowest-accuracy classes, ascending accuracy
    std::vector<std::vector<int>> confusion;
    int truncated = 0;
    int samples = 0;
};

using SampleCharFn = std::function<gen::SampleResult(int class_id, Rng& rng)>;
using ClassifyFn = std::function<int(const ink::InkSequence& seq)>;

QualityReport quality_report(const SampleCharFn& sample, const ClassifyFn& classify,
                             const std::vector<int>& classes, int n_per_class, Rng& rng,
                             int worst_k = 3);

// Samples from the generator, pushes every sample through the recognition
// preprocessing preset, classifies with the trained model.
QualityReport quality_report(const gen::GenParams& gp, const gen::GenConfig& gc,
                             const clf::ClassifierModel& model,
                             const std::vector<int>& classes, int n_per_class, Rng& rng,
                             int worst_k = 3);

nlohmann::json to_json(const QualityReport& report);

} // namespace scrawl::io
