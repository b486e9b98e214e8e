#pragma once

#include <string>
#include <vector>

#include "scrawl/cells.hpp"
#include "scrawl/ink.hpp"
#include "scrawl/optim.hpp"

namespace scrawl::clf {

using num::Matrix;

// Architecture A -> [B_1..B_n] -> C -> D: stacked bidirectional recurrent
// layers, mean pooling over the top layer, full layer, softmax layer.
struct NetSpec {
    int input_dim = 6;
    std::vector<int> hidden_dims = {32, 64};
    int full_dim = 64;
    int class_count = 10;
    cells::CellKind cell = cells::CellKind::Gru;
    double dropout_pool = 0.1;  // pooled vector and full-layer output
    double dropout_input = 0.3; // sequential dropout during training

    std::string architecture_string() const; // "6->[32,64]->64->10"
    void validate() const;
};

// Named presets: net1..net6 (paper-scale rows) and desk-clf. For presets
// with class_count == 0 the trainer fills it in from the corpus.
NetSpec net_preset(const std::string& name);

struct BidiLayer {
    cells::AnyCellParams forward;
    cells::AnyCellParams backward;
};

struct ClassifierModel {
    NetSpec spec;
    std::vector<BidiLayer> layers;
    Matrix full_w, full_b;
    Matrix soft_w, soft_b;

    ParamSet params(); // stable registration order
};

ClassifierModel init_classifier(const NetSpec& spec, Rng& rng);

// Class probability vector (sums to 1). Train mode applies inverted
// dropout to the pooled vector and the full-layer output and needs an RNG.
Matrix forward(const ClassifierModel& m, const std::vector<ink::LineFeature>& feats,
               Mode mode = Mode::Eval, Rng* rng = nullptr);

// Mean over the batch of -log p(label). Accumulates averaged gradients
// into `grad_accum` when one is supplied.
struct LabeledFeatures {
    std::vector<ink::LineFeature> feats;
    int label = 0;
};

double nll_loss(ClassifierModel& m, const std::vector<LabeledFeatures>& batch, Rng& rng,
                std::vector<Matrix>* grad_accum = nullptr, double* accuracy = nullptr);

// Average of `n_sub` forward passes over independent sequential-dropout
// draws of the input.
Matrix predict_ensemble(const ClassifierModel& m, const std::vector<ink::LineFeature>& feats,
                        int n_sub, double p, Rng& rng);

// Plain averaging of probability vectors (for ensembles of separately
// trained models).
Matrix average_probabilities(const std::vector<Matrix>& probs);

optim::History train(ClassifierModel& m, const std::vector<LabeledFeatures>& corpus,
                     const optim::OptConfig& cfg, Rng& rng, std::ostream* log = nullptr);

struct EvalReport {
    double accuracy = 0.0;
    std::vector<double> per_class_accuracy;
    std::vector<std::vector<int>> confusion;
};

EvalReport evaluate(const ClassifierModel& m, const std::vector<LabeledFeatures>& corpus,
                    int ensemble = 1, double p = 0.0, Rng* rng = nullptr);

} // namespace scrawl::clf
