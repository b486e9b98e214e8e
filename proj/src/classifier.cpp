#include "scrawl/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace scrawl::clf {

using cells::CellKind;
using cells::CellState;
using num::Tape;
using num::Var;

std::string NetSpec::architecture_string() const {
    std::ostringstream os;
    os << input_dim << "->[";
    for (std::size_t i = 0; i < hidden_dims.size(); ++i) {
        if (i) os << ",";
        os << hidden_dims[i];
    }
    os << "]->" << full_dim << "->" << class_count;
    return os.str();
}

void NetSpec::validate() const {
    if (input_dim <= 0 || full_dim <= 0 || class_count <= 0)
        throw InvalidConfigError("NetSpec: dimensions must be positive");
    if (hidden_dims.empty() || hidden_dims.size() > 3)
        throw InvalidConfigError("NetSpec: 1 to 3 stacked recurrent layers");
    for (int d : hidden_dims)
        if (d <= 0) throw InvalidConfigError("NetSpec: hidden dims must be positive");
    if (dropout_pool < 0.0 || dropout_pool >= 1.0 || dropout_input < 0.0 || dropout_input >= 1.0)
        throw InvalidConfigError("NetSpec: dropout probabilities must lie in [0, 1)");
}

NetSpec net_preset(const std::string& name) {
    NetSpec s;
    s.class_count = 3755;
    if (name == "net1") {
        s.hidden_dims = {500};
        s.full_dim = 200;
        s.cell = CellKind::Lstm;
    } else if (name == "net2") {
        s.hidden_dims = {500};
        s.full_dim = 200;
        s.cell = CellKind::Gru;
    } else if (name == "net3") {
        s.hidden_dims = {100, 500};
        s.full_dim = 200;
        s.cell = CellKind::Lstm;
    } else if (name == "net4") {
        s.hidden_dims = {100, 500};
        s.full_dim = 200;
        s.cell = CellKind::Gru;
    } else if (name == "net5") {
        s.hidden_dims = {100, 300, 500};
        s.full_dim = 200;
        s.cell = CellKind::Lstm;
    } else if (name == "net6") {
        s.hidden_dims = {100, 300, 500};
        s.full_dim = 200;
        s.cell = CellKind::Gru;
    } else if (name == "desk-clf") {
        s.hidden_dims = {32, 64};
        s.full_dim = 64;
        s.cell = CellKind::Gru;
        s.class_count = 0; // filled in from the corpus
    } else {
        throw InvalidConfigError("unknown classifier preset: " + name);
    }
    return s;
}

ParamSet ClassifierModel::params() {
    ParamSet out;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string prefix = "layer" + std::to_string(l);
        cells::register_params(layers[l].forward, prefix + ".fwd", out);
        cells::register_params(layers[l].backward, prefix + ".bwd", out);
    }
    out.push_back({"full.W", &full_w});
    out.push_back({"full.b", &full_b});
    out.push_back({"soft.W", &soft_w});
    out.push_back({"soft.b", &soft_b});
    return out;
}

ClassifierModel init_classifier(const NetSpec& spec, Rng& rng) {
    spec.validate();
    ClassifierModel m;
    m.spec = spec;
    int in_dim = spec.input_dim;
    for (int hidden : spec.hidden_dims) {
        BidiLayer layer;
        layer.forward = cells::init_cell(spec.cell, in_dim, hidden, rng);
        layer.backward = cells::init_cell(spec.cell, in_dim, hidden, rng);
        m.layers.push_back(std::move(layer));
        in_dim = 2 * hidden; // next layer consumes [fwd ; bwd]
    }
    const int top = spec.hidden_dims.back();
    m.full_w = Matrix(spec.full_dim, top);
    for (int i = 0; i < m.full_w.size(); ++i) m.full_w[i] = normal(rng, 0.0, cells::kInitStddev);
    m.full_b = Matrix(spec.full_dim, 1);
    m.soft_w = Matrix(spec.class_count, spec.full_dim);
    for (int i = 0; i < m.soft_w.size(); ++i) m.soft_w[i] = normal(rng, 0.0, cells::kInitStddev);
    m.soft_b = Matrix(spec.class_count, 1);
    return m;
}

namespace {

Var dropout(Tape& tape, Var x, double p, Mode mode, Rng* rng) {
    if (mode != Mode::Train || p <= 0.0) return x;
    if (!rng) throw InvalidConfigError("dropout in train mode needs an RNG");
    Matrix mask(x.value().rows(), 1);
    const double keep_scale = 1.0 / (1.0 - p);
    for (int i = 0; i < mask.size(); ++i)
        mask[i] = uniform(*rng, 0.0, 1.0) >= p ? keep_scale : 0.0;
    return tape.mul(x, tape.constant(std::move(mask)));
}

struct BoundModel {
    std::vector<std::pair<cells::AnyCellParamVars, cells::AnyCellParamVars>> layers;
    Var full_w, full_b, soft_w, soft_b;
};

BoundModel bind(Tape& tape, const ClassifierModel& m, bool trainable) {
    BoundModel b;
    for (const auto& layer : m.layers)
        b.layers.emplace_back(cells::bind(tape, layer.forward, trainable),
                              cells::bind(tape, layer.backward, trainable));
    b.full_w = tape.view(m.full_w, trainable);
    b.full_b = tape.view(m.full_b, trainable);
    b.soft_w = tape.view(m.soft_w, trainable);
    b.soft_b = tape.view(m.soft_b, trainable);
    return b;
}

// Runs the stack and returns the class logits. Layer 1 reads the feature
// sequence forward and reversed; deeper layers read the per-position
// concatenation of the previous layer's two directions; the top layer's
// states are mean-pooled as (1/2k) * sum(h_i + h'_i).
Var logits_on_tape(Tape& tape, const BoundModel& b, const NetSpec& spec,
                   const std::vector<ink::LineFeature>& feats, Mode mode, Rng* rng) {
    const std::size_t k = feats.size();
    std::vector<Var> inputs;
    inputs.reserve(k);
    for (const auto& f : feats) {
        Matrix x(spec.input_dim, 1);
        for (int i = 0; i < spec.input_dim; ++i) x[i] = f[static_cast<std::size_t>(i)];
        inputs.push_back(tape.constant(std::move(x)));
    }

    std::vector<Var> fwd(k), bwd(k);
    for (std::size_t l = 0; l < b.layers.size(); ++l) {
        const int hidden = spec.hidden_dims[l];
        CellState fs = cells::zero_state(tape, spec.cell, hidden);
        for (std::size_t t = 0; t < k; ++t) {
            fs = cells::cell_step(tape, b.layers[l].first, inputs[t], fs);
            fwd[t] = fs.h;
        }
        CellState bs = cells::zero_state(tape, spec.cell, hidden);
        for (std::size_t t = k; t-- > 0;) {
            bs = cells::cell_step(tape, b.layers[l].second, inputs[t], bs);
            bwd[t] = bs.h;
        }
        if (l + 1 < b.layers.size())
            for (std::size_t t = 0; t < k; ++t) inputs[t] = tape.concat(fwd[t], bwd[t]);
    }

    Var pooled = tape.add(fwd[0], bwd[0]);
    for (std::size_t t = 1; t < k; ++t)
        pooled = tape.add(pooled, tape.add(fwd[t], bwd[t]));
    pooled = tape.scale(pooled, 1.0 / (2.0 * static_cast<double>(k)));

    pooled = dropout(tape, pooled, spec.dropout_pool, mode, rng);
    Var full = tape.tanh(tape.affine(pooled, b.full_w, b.full_b));
    full = dropout(tape, full, spec.dropout_pool, mode, rng);
    return tape.affine(full, b.soft_w, b.soft_b);
}

} // namespace

Matrix forward(const ClassifierModel& m, const std::vector<ink::LineFeature>& feats,
               Mode mode, Rng* rng) {
    if (feats.empty()) throw EmptyInkError("classifier forward: empty feature sequence");
    Tape tape;
    const BoundModel b = bind(tape, m, false);
    const Var logits = logits_on_tape(tape, b, m.spec, feats, mode, rng);
    return num::softmax(logits.value());
}

double nll_loss(ClassifierModel& m, const std::vector<LabeledFeatures>& batch, Rng& rng,
                std::vector<Matrix>* grad_accum, double* accuracy) {
    if (batch.empty()) throw EmptyInkError("nll_loss: empty batch");
    ParamSet params = m.params();
    if (grad_accum && grad_accum->size() != params.size())
        throw ShapeError("nll_loss: gradient accumulator size mismatch");

    const double inv = 1.0 / static_cast<double>(batch.size());
    double loss_sum = 0.0;
    int correct = 0;
    for (const auto& sample : batch) {
        if (sample.label < 0 || sample.label >= m.spec.class_count)
            throw LabelError("nll_loss: label " + std::to_string(sample.label) +
                             " outside [0, " + std::to_string(m.spec.class_count) + ")");
        if (sample.feats.empty()) throw EmptyInkError("nll_loss: empty feature sequence");

        Tape tape;
        const BoundModel b = bind(tape, m, grad_accum != nullptr);
        const Var logits = logits_on_tape(tape, b, m.spec, sample.feats,
                                          grad_accum ? Mode::Train : Mode::Eval, &rng);
        const Var loss = tape.neg(tape.pick(tape.log_softmax(logits), sample.label));
        loss_sum += loss.value()[0];
        if (num::argmax(logits.value()) == sample.label) ++correct;

        if (grad_accum) {
            tape.backward(loss);
            std::size_t p = 0;
            auto accumulate = [&](Var v) {
                const Matrix& g = tape.grad(v);
                Matrix& acc = (*grad_accum)[p++];
                for (int i = 0; i < acc.size(); ++i) acc[i] += inv * g[i];
            };
            for (const auto& layer : b.layers) {
                for (const auto* side : {&layer.first, &layer.second}) {
                    std::visit([&](const auto& vars) {
                        using T = std::decay_t<decltype(vars)>;
                        if constexpr (std::is_same_v<T, cells::LstmParamVars>) {
                            for (Var v : {vars.W_i, vars.W_f, vars.W_o, vars.W_c,
                                          vars.U_i, vars.U_f, vars.U_o, vars.U_c,
                                          vars.b_i, vars.b_f, vars.b_o, vars.b_c})
                                accumulate(v);
                        } else {
                            for (Var v : {vars.W_r, vars.W_z, vars.W,
                                          vars.U_r, vars.U_z, vars.U,
                                          vars.b_r, vars.b_z, vars.b})
                                accumulate(v);
                        }
                    }, *side);
                }
            }
            for (Var v : {b.full_w, b.full_b, b.soft_w, b.soft_b}) accumulate(v);
        }
    }
    if (accuracy) *accuracy = static_cast<double>(correct) / static_cast<double>(batch.size());
    const double mean = loss_sum * inv;
    if (!std::isfinite(mean)) throw NumericalError("nll_loss: non-finite loss");
    return mean;
}

Matrix predict_ensemble(const ClassifierModel& m, const std::vector<ink::LineFeature>& feats,
                        int n_sub, double p, Rng& rng) {
    if (n_sub < 1) throw InvalidConfigError("predict_ensemble: need at least one sub-sequence");
    Matrix mean(m.spec.class_count, 1);
    for (int s = 0; s < n_sub; ++s) {
        const auto sub = ink::sequential_dropout(feats, p, rng);
        const Matrix probs = forward(m, sub, Mode::Eval, nullptr);
        for (int i = 0; i < mean.size(); ++i) mean[i] += probs[i];
    }
    for (int i = 0; i < mean.size(); ++i) mean[i] /= static_cast<double>(n_sub);
    return mean;
}

Matrix average_probabilities(const std::vector<Matrix>& probs) {
    if (probs.empty()) throw InvalidConfigError("average_probabilities: empty input");
    Matrix mean(probs[0].rows(), 1);
    for (const auto& p : probs) {
        if (!p.same_shape(mean)) throw ShapeError("average_probabilities: shape mismatch");
        for (int i = 0; i < mean.size(); ++i) mean[i] += p[i];
    }
    for (int i = 0; i < mean.size(); ++i) mean[i] /= static_cast<double>(probs.size());
    return mean;
}

optim::History train(ClassifierModel& m, const std::vector<LabeledFeatures>& corpus,
                     const optim::OptConfig& cfg, Rng& rng, std::ostream* log) {
    if (corpus.empty()) throw InvalidConfigError("train: empty corpus");
    ParamSet params = m.params();
    optim::AdamState state(params);

    auto sample_fn = [&](std::size_t index, Rng& sample_rng, std::vector<Matrix>& grads)
        -> optim::SampleOutcome {
        LabeledFeatures presented;
        presented.label = corpus[index].label;
        presented.feats = ink::sequential_dropout(corpus[index].feats, m.spec.dropout_input, sample_rng);
        double acc = 0.0;
        const double loss = nll_loss(m, {presented}, sample_rng, &grads, &acc);
        return {loss, acc};
    };

    return optim::run_epochs(params, corpus.size(), sample_fn, cfg, state, rng, log);
}

EvalReport evaluate(const ClassifierModel& m, const std::vector<LabeledFeatures>& corpus,
                    int ensemble, double p, Rng* rng) {
    const int k = m.spec.class_count;
    EvalReport report;
    report.per_class_accuracy.assign(static_cast<std::size_t>(k), 0.0);
    report.confusion.assign(static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(k), 0));
    std::vector<int> totals(static_cast<std::size_t>(k), 0);

    Rng fallback(0);
    Rng& draw_rng = rng ? *rng : fallback;
    int correct = 0;
    for (const auto& sample : corpus) {
        if (sample.label < 0 || sample.label >= k) throw LabelError("evaluate: label out of range");
        const Matrix probs = (ensemble == 1 && p == 0.0)
                                 ? forward(m, sample.feats)
                                 : predict_ensemble(m, sample.feats, ensemble, p, draw_rng);
        const int pred = num::argmax(probs);
        report.confusion[static_cast<std::size_t>(sample.label)][static_cast<std::size_t>(pred)] += 1;
        totals[static_cast<std::size_t>(sample.label)] += 1;
        if (pred == sample.label) ++correct;
    }
    for (int c = 0; c < k; ++c)
        if (totals[static_cast<std::size_t>(c)] > 0)
            report.per_class_accuracy[static_cast<std::size_t>(c)] =
                static_cast<double>(report.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)]) /
                static_cast<double>(totals[static_cast<std::size_t>(c)]);
    report.accuracy = corpus.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(corpus.size());
    return report;
}

} // namespace scrawl::clf
