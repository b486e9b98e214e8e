// scrawl: recognize and draw handwritten characters with recurrent nets.
//
// Subcommands: preprocess, synth, train-clf, train-gen, eval, sample,
// quality. Every command takes --seed (default from SCRAWL_SEED, then 0),
// echoes it in the output, and reports as JSON on stdout.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "scrawl/classifier.hpp"
#include "scrawl/data_io.hpp"
#include "scrawl/generator.hpp"
#include "scrawl/ink.hpp"

using namespace scrawl;
using nlohmann::json;

namespace {

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const EmptyInkError*>(&e)) return 3;
    if (dynamic_cast<const DegenerateInkError*>(&e)) return 4;
    if (dynamic_cast<const InvalidConfigError*>(&e)) return 5;
    if (dynamic_cast<const ShapeError*>(&e)) return 6;
    if (dynamic_cast<const TapeError*>(&e)) return 7;
    if (dynamic_cast<const NumericalError*>(&e)) return 8;
    if (dynamic_cast<const LabelError*>(&e)) return 9;
    if (dynamic_cast<const TokenError*>(&e)) return 10;
    if (dynamic_cast<const ParseError*>(&e)) return 11;
    if (dynamic_cast<const ValueError*>(&e)) return 12;
    if (dynamic_cast<const ConfigError*>(&e)) return 13;
    if (dynamic_cast<const IoError*>(&e)) return 14;
    return 1;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("SCRAWL_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

ink::PreprocessConfig preset_config(const std::string& name) {
    if (name == "recognition") return ink::recognition_preset();
    if (name == "generation") return ink::generation_preset();
    throw InvalidConfigError("unknown preprocess preset: " + name);
}

std::vector<clf::LabeledFeatures> recognition_features(const io::Corpus& corpus) {
    std::vector<clf::LabeledFeatures> out;
    out.reserve(corpus.samples.size());
    for (const auto& seq : corpus.samples) {
        if (!seq.label) throw LabelError("corpus sample without a label");
        out.push_back({ink::to_line_features(ink::preprocess(seq, ink::recognition_preset())),
                       *seq.label});
    }
    return out;
}

int resolve_class_count(int preset_classes, int flag_classes, const io::Corpus* corpus) {
    if (flag_classes > 0) return flag_classes;
    if (corpus && corpus->class_count > 0) return corpus->class_count;
    if (preset_classes > 0) return preset_classes;
    throw InvalidConfigError("class count unresolved: pass --classes or a labeled corpus");
}

struct TrainFlags {
    std::string in, checkpoint, arch;
    int epochs = -1;
    int batch = 32;
    double lr = 0.001;
    int classes = 0;
    int jobs = 1;
    std::string monitor = "loss";
    bool dry_run = false;
    std::uint64_t seed = 0;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f, const std::string& default_arch) {
    f.arch = default_arch;
    f.seed = default_seed();
    cmd->add_option("--in", f.in, "training corpus (ink JSONL)");
    cmd->add_option("--checkpoint", f.checkpoint, "checkpoint base path to write");
    cmd->add_option("--arch", f.arch, "architecture preset");
    cmd->add_option("--epochs", f.epochs, "training epochs");
    cmd->add_option("--batch", f.batch, "mini-batch size");
    cmd->add_option("--lr", f.lr, "initial learning rate");
    cmd->add_option("--classes", f.classes, "class count override");
    cmd->add_option("--jobs", f.jobs, "parallel per-sample gradient workers");
    cmd->add_option("--monitor", f.monitor, "plateau monitor: loss|accuracy");
    cmd->add_flag("--dry-run", f.dry_run, "print the resolved configuration and exit");
    cmd->add_option("--seed", f.seed, "RNG seed");
}

optim::OptConfig opt_config_from(const TrainFlags& f, int default_epochs) {
    optim::OptConfig cfg;
    cfg.lr = f.lr;
    cfg.batch_size = f.batch;
    cfg.max_epochs = f.epochs >= 0 ? f.epochs : default_epochs;
    cfg.jobs = f.jobs;
    if (f.monitor == "loss")
        cfg.monitor = optim::OptConfig::Monitor::Loss;
    else if (f.monitor == "accuracy")
        cfg.monitor = optim::OptConfig::Monitor::Metric;
    else
        throw InvalidConfigError("--monitor must be loss or accuracy");
    return cfg;
}

int cmd_preprocess(const std::string& in, const std::string& out, const std::string& preset,
                   double dist_factor, double cos_threshold, std::uint64_t seed) {
    ink::PreprocessConfig cfg = preset_config(preset);
    if (dist_factor > 0.0) cfg.dist_factor = dist_factor;
    if (cos_threshold > -1.0) cfg.cos_threshold = cos_threshold;

    const io::Corpus corpus = io::read_jsonl(in);
    io::Corpus processed;
    processed.class_count = corpus.class_count;
    double before = 0.0, after = 0.0;
    for (const auto& seq : corpus.samples) {
        processed.samples.push_back(ink::preprocess(seq, cfg));
        before += static_cast<double>(seq.size());
        after += static_cast<double>(processed.samples.back().size());
    }
    io::write_jsonl(processed, out);

    const double n = std::max<double>(1.0, static_cast<double>(corpus.samples.size()));
    json report{{"command", "preprocess"},
                {"preset", preset},
                {"dist_factor", cfg.dist_factor},
                {"cos_threshold", cfg.cos_threshold},
                {"seed", seed},
                {"in", in},
                {"out", out},
                {"samples", corpus.samples.size()},
                {"mean_points_before", before / n},
                {"mean_points_after", after / n},
                {"mean_length_reduction", before > 0.0 ? 1.0 - after / before : 0.0}};
    std::cout << report.dump() << "\n";
    return 0;
}

int cmd_synth(int classes, int per_class, double noise, const std::string& out,
              std::uint64_t seed, io::SynthOptions opt) {
    auto templates = io::builtin_templates();
    if (classes <= 0 || classes > static_cast<int>(templates.size()))
        throw InvalidConfigError("--classes must lie in [1, " + std::to_string(templates.size()) + "]");
    templates.resize(static_cast<std::size_t>(classes));
    opt.noise = noise;
    Rng rng(seed);
    const io::Corpus corpus = io::synthesize_corpus(templates, per_class, opt, rng);
    io::write_jsonl(corpus, out);
    json report{{"command", "synth"},
                {"classes", classes},
                {"per_class", per_class},
                {"noise", noise},
                {"seed", seed},
                {"out", out},
                {"samples", corpus.samples.size()}};
    std::cout << report.dump() << "\n";
    return 0;
}

int cmd_train_clf(const TrainFlags& f) {
    clf::NetSpec spec = clf::net_preset(f.arch);

    io::Corpus corpus;
    const bool have_corpus = !f.in.empty();
    if (have_corpus) corpus = io::read_jsonl(f.in);
    spec.class_count = resolve_class_count(spec.class_count, f.classes, have_corpus ? &corpus : nullptr);

    json config{{"command", "train-clf"},
                {"arch", f.arch},
                {"architecture", spec.architecture_string()},
                {"cell", cells::to_string(spec.cell)},
                {"seed", f.seed},
                {"batch", f.batch},
                {"lr", f.lr}};
    if (f.dry_run) {
        std::cout << config.dump() << "\n";
        return 0;
    }
    if (!have_corpus) throw IoError("train-clf needs --in <corpus.jsonl>");
    if (f.checkpoint.empty()) throw InvalidConfigError("train-clf needs --checkpoint <base>");

    const auto train_set = recognition_features(corpus);
    const optim::OptConfig cfg = opt_config_from(f, 40);
    Rng rng(f.seed);
    auto model = clf::init_classifier(spec, rng);
    const auto history = clf::train(model, train_set, cfg, rng, &std::cout);
    io::save_classifier(f.checkpoint, model);

    config["epochs"] = cfg.max_epochs;
    config["checkpoint"] = f.checkpoint;
    if (!history.empty()) {
        config["final_loss"] = history.back().loss;
        config["final_train_accuracy"] = history.back().metric;
    }
    std::cout << config.dump() << "\n";
    return 0;
}

int cmd_train_gen(const TrainFlags& f, int mixtures) {
    gen::GenConfig gcfg = gen::gen_preset(f.arch);
    if (mixtures > 0) gcfg.mixture_count = mixtures;

    io::Corpus corpus;
    const bool have_corpus = !f.in.empty();
    if (have_corpus) corpus = io::read_jsonl(f.in);
    gcfg.class_count = resolve_class_count(gcfg.class_count, f.classes, have_corpus ? &corpus : nullptr);

    json config{{"command", "train-gen"},
                {"arch", f.arch},
                {"embed_dim", gcfg.embed_dim},
                {"input_dim", gcfg.input_dim},
                {"hidden_dim", gcfg.hidden_dim},
                {"output_dim", gcfg.output_dim},
                {"mixtures", gcfg.mixture_count},
                {"classes", gcfg.class_count},
                {"loss_weights", gcfg.loss_weights},
                {"seed", f.seed},
                {"batch", f.batch},
                {"lr", f.lr}};
    if (f.dry_run) {
        std::cout << config.dump() << "\n";
        return 0;
    }
    if (!have_corpus) throw IoError("train-gen needs --in <corpus.jsonl>");
    if (f.checkpoint.empty()) throw InvalidConfigError("train-gen needs --checkpoint <base>");

    std::vector<std::pair<std::vector<ink::GenToken>, int>> train_set;
    for (const auto& seq : corpus.samples) {
        if (!seq.label) throw LabelError("corpus sample without a label");
        train_set.emplace_back(
            ink::to_gen_tokens(ink::preprocess(seq, ink::generation_preset())), *seq.label);
    }

    const optim::OptConfig cfg = opt_config_from(f, 40);
    Rng rng(f.seed);
    auto params = gen::init_generator(gcfg, rng);
    const auto history = gen::train(params, gcfg, train_set, cfg, rng, &std::cout);
    io::save_generator(f.checkpoint, params, gcfg);

    config["epochs"] = cfg.max_epochs;
    config["checkpoint"] = f.checkpoint;
    if (!history.empty()) config["final_loss"] = history.back().loss;
    std::cout << config.dump() << "\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& in, int ensemble, double p,
             std::uint64_t seed) {
    const auto model = io::load_classifier(checkpoint);
    const io::Corpus corpus = io::read_jsonl(in);
    const auto eval_set = recognition_features(corpus);
    Rng rng(seed);
    const auto report = clf::evaluate(model, eval_set, ensemble, p, &rng);
    json out{{"command", "eval"},
             {"checkpoint", checkpoint},
             {"in", in},
             {"ensemble", ensemble},
             {"p", p},
             {"seed", seed},
             {"accuracy", report.accuracy},
             {"per_class_accuracy", report.per_class_accuracy},
             {"confusion", report.confusion}};
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_sample(const std::string& checkpoint, int class_id, int n, const std::string& svg_dir,
               const std::string& jsonl_out, int max_len, std::uint64_t seed) {
    const auto [params, gcfg] = io::load_generator(checkpoint);
    Rng rng(seed);

    std::ofstream jsonl;
    if (!jsonl_out.empty()) {
        jsonl.open(jsonl_out);
        if (!jsonl) throw IoError("cannot write " + jsonl_out);
    }
    if (!svg_dir.empty()) std::filesystem::create_directories(svg_dir);

    int truncated = 0;
    json files = json::array();
    for (int i = 0; i < n; ++i) {
        const auto result = gen::sample_character(params, gcfg, class_id, rng, max_len);
        if (result.truncated) ++truncated;
        if (jsonl.is_open()) {
            json points = json::array();
            for (const auto& pt : result.ink.points)
                points.push_back(json::array({pt.x, pt.y, pt.stroke_id}));
            jsonl << json{{"label", class_id}, {"points", points}, {"truncated", result.truncated}}
                         .dump()
                  << "\n";
        }
        if (!svg_dir.empty() && !result.ink.empty()) {
            const std::string name = "sample_" + std::to_string(class_id) + "_" +
                                     std::to_string(i) + ".svg";
            std::ofstream svg(std::filesystem::path(svg_dir) / name);
            if (!svg) throw IoError("cannot write SVG in " + svg_dir);
            svg << io::render_svg(result.ink);
            files.push_back(name);
        }
    }
    json out{{"command", "sample"},
             {"checkpoint", checkpoint},
             {"class", class_id},
             {"n", n},
             {"seed", seed},
             {"truncated", truncated},
             {"svg_files", files}};
    if (!jsonl_out.empty()) out["jsonl_out"] = jsonl_out;
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_quality(const std::string& gen_ckpt, const std::string& clf_ckpt, int n_per_class,
                int worst_k, std::uint64_t seed) {
    const auto [gp, gcfg] = io::load_generator(gen_ckpt);
    const auto model = io::load_classifier(clf_ckpt);
    std::vector<int> classes;
    for (int c = 0; c < gcfg.class_count; ++c) classes.push_back(c);
    Rng rng(seed);
    const auto report = io::quality_report(gp, gcfg, model, classes, n_per_class, rng, worst_k);
    json out = io::to_json(report);
    out["command"] = "quality";
    out["gen"] = gen_ckpt;
    out["clf"] = clf_ckpt;
    out["n_per_class"] = n_per_class;
    out["seed"] = seed;
    std::cout << out.dump() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"recognize and draw handwritten characters with recurrent networks"};
    app.require_subcommand(1);

    auto* prep = app.add_subcommand("preprocess", "remove redundant points and normalize coordinates");
    std::string prep_in, prep_out, prep_preset = "recognition";
    double prep_dist = -1.0, prep_cos = -2.0;
    std::uint64_t prep_seed = default_seed();
    prep->add_option("--in", prep_in, "input ink JSONL")->required();
    prep->add_option("--out", prep_out, "output ink JSONL")->required();
    prep->add_option("--preset", prep_preset, "recognition|generation");
    prep->add_option("--dist-factor", prep_dist, "override the distance factor");
    prep->add_option("--cos-threshold", prep_cos, "override the cosine threshold");
    prep->add_option("--seed", prep_seed, "RNG seed");

    auto* synth = app.add_subcommand("synth", "generate a synthetic glyph corpus");
    int synth_classes = 10, synth_per_class = 200;
    double synth_noise = 0.025;
    std::string synth_out;
    std::uint64_t synth_seed = default_seed();
    io::SynthOptions synth_opt;
    synth->add_option("--classes", synth_classes, "number of template classes");
    synth->add_option("--per-class", synth_per_class, "samples per class");
    synth->add_option("--noise", synth_noise, "per-point jitter");
    synth->add_option("--scale-lo", synth_opt.scale_lo, "scale range low");
    synth->add_option("--scale-hi", synth_opt.scale_hi, "scale range high");
    synth->add_option("--rotate", synth_opt.rotate_deg, "rotation bound (degrees)");
    synth->add_option("--density-lo", synth_opt.density_lo, "resampling density low");
    synth->add_option("--density-hi", synth_opt.density_hi, "resampling density high");
    synth->add_option("--out", synth_out, "output ink JSONL")->required();
    synth->add_option("--seed", synth_seed, "RNG seed");

    auto* tclf = app.add_subcommand("train-clf", "train the recognition model");
    TrainFlags tclf_flags;
    add_train_flags(tclf, tclf_flags, "desk-clf");

    auto* tgen = app.add_subcommand("train-gen", "train the generative model");
    TrainFlags tgen_flags;
    int tgen_mixtures = 0;
    add_train_flags(tgen, tgen_flags, "desk-gen");
    tgen->add_option("--mixtures", tgen_mixtures, "mixture component count override");

    auto* eval = app.add_subcommand("eval", "evaluate a classifier checkpoint");
    std::string eval_ckpt, eval_in;
    int eval_ensemble = 1;
    double eval_p = 0.0;
    std::uint64_t eval_seed = default_seed();
    eval->add_option("--checkpoint", eval_ckpt, "classifier checkpoint base")->required();
    eval->add_option("--in", eval_in, "test corpus")->required();
    eval->add_option("--ensemble", eval_ensemble, "sub-sequence draws per sample");
    eval->add_option("--p", eval_p, "sub-sequence dropout probability");
    eval->add_option("--seed", eval_seed, "RNG seed");

    auto* sample = app.add_subcommand("sample", "draw characters from a generator checkpoint");
    std::string sample_ckpt, sample_svg, sample_jsonl;
    int sample_class = 0, sample_n = 9, sample_max_len = -1;
    std::uint64_t sample_seed = default_seed();
    sample->add_option("--checkpoint", sample_ckpt, "generator checkpoint base")->required();
    sample->add_option("--class", sample_class, "class id to draw");
    sample->add_option("--n", sample_n, "number of characters");
    sample->add_option("--svg-out", sample_svg, "directory for SVG files");
    sample->add_option("--jsonl-out", sample_jsonl, "ink JSONL output path");
    sample->add_option("--max-len", sample_max_len, "sampling step cap");
    sample->add_option("--seed", sample_seed, "RNG seed");

    auto* quality = app.add_subcommand("quality", "classify generated characters");
    std::string q_gen, q_clf;
    int q_n = 100, q_worst = 3;
    std::uint64_t q_seed = default_seed();
    quality->add_option("--gen", q_gen, "generator checkpoint base")->required();
    quality->add_option("--clf", q_clf, "classifier checkpoint base")->required();
    quality->add_option("--n-per-class", q_n, "samples per class");
    quality->add_option("--worst-k", q_worst, "number of lowest-accuracy classes to report");
    quality->add_option("--seed", q_seed, "RNG seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (prep->parsed()) return cmd_preprocess(prep_in, prep_out, prep_preset, prep_dist, prep_cos, prep_seed);
        if (synth->parsed()) return cmd_synth(synth_classes, synth_per_class, synth_noise, synth_out, synth_seed, synth_opt);
        if (tclf->parsed()) return cmd_train_clf(tclf_flags);
        if (tgen->parsed()) return cmd_train_gen(tgen_flags, tgen_mixtures);
        if (eval->parsed()) return cmd_eval(eval_ckpt, eval_in, eval_ensemble, eval_p, eval_seed);
        if (sample->parsed()) return cmd_sample(sample_ckpt, sample_class, sample_n, sample_svg, sample_jsonl, sample_max_len, sample_seed);
        if (quality->parsed()) return cmd_quality(q_gen, q_clf, q_n, q_worst, q_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return 1;
}
