#pragma once

#include <array>
#include <string>
#include <vector>

#include "scrawl/cells.hpp"
#include "scrawl/ink.hpp"
#include "scrawl/optim.hpp"

namespace scrawl::gen {

using num::Matrix;
using num::Tape;
using num::Var;

struct GenConfig {
    int class_count = 10;
    int embed_dim = 32;      // character embedding
    int input_dim = 32;      // pen direction/state transform space
    int hidden_dim = 128;
    int output_dim = 64;
    int mixture_count = 5;
    double dropout = 0.3;    // on the output vector, training only
    std::array<double, 3> loss_weights = {1.0, 5.0, 100.0}; // pen-down, pen-up, end-of-char
    int max_len = 200;

    // The direction loss for the transition into end-of-char is skipped by
    // default (the target direction is the (0,0) filler); enable to train
    // the mixture toward (0,0) there instead.
    bool terminal_direction_loss = false;

    void validate() const;
};

GenConfig gen_preset(const std::string& name); // "gen-paper", "desk-gen"

// Eqs.-style parameter blocks: input transforms, gate weights over
// (hidden, direction, state, embedding), output, mixture head, pen head,
// and the jointly trained class embedding (one column per class).
struct GenParams {
    Matrix E;                            // embed_dim x class_count
    Matrix W_d, b_d, W_s, b_s;           // input transforms
    Matrix W_r, U_r, V_r, M_r, b_r;      // reset gate
    Matrix W_z, U_z, V_z, M_z, b_z;      // update gate
    Matrix W, U, V, M, b;                // candidate state
    Matrix W_o, U_o, V_o, M_o, b_o;      // output vector
    Matrix W_gmm, b_gmm;                 // 5M mixture parameters
    Matrix W_pen, b_pen;                 // 3 pen-state logits

    ParamSet params();
};

GenParams init_generator(const GenConfig& cfg, Rng& rng);

struct GenParamVars {
    Var E;
    Var W_d, b_d, W_s, b_s;
    Var W_r, U_r, V_r, M_r, b_r;
    Var W_z, U_z, V_z, M_z, b_z;
    Var W, U, V, M, b;
    Var W_o, U_o, V_o, M_o, b_o;
    Var W_gmm, b_gmm;
    Var W_pen, b_pen;
};

GenParamVars bind(Tape& tape, const GenParams& p, bool trainable);

struct GenStepTrace {
    Var d_in, s_in;     // transformed inputs
    Var r, z, h_tilde;  // gates and candidate
    Var h, o;
};

// One conditional GRU step: transform the (direction, pen-state) inputs,
// gate on (h_prev, d', s', c), emit the output vector. Dropout applies to
// the output in train mode.
GenStepTrace gen_step(Tape& tape, const GenParamVars& p, const GenConfig& cfg,
                      Var h_prev, Var d_t, Var s_t, Var c,
                      Mode mode = Mode::Eval, Rng* rng = nullptr);

// Mixture over the next pen direction, axes independent.
struct MixtureParams {
    std::vector<double> pi, mu_x, mu_y, delta_x, delta_y;
    int count() const { return static_cast<int>(pi.size()); }
};

inline constexpr double kDeltaFloor = 1e-6;

MixtureParams gmm_head(const Matrix& o_t, const GenParams& p);

double gmm_log_density(const MixtureParams& mix, double dx, double dy);
double gmm_density(const MixtureParams& mix, double dx, double dy);

std::pair<double, double> gmm_sample(const MixtureParams& mix, Rng& rng);

struct PenStateProbs {
    std::array<double, 3> p; // pen-down, pen-up, end-of-char
};

PenStateProbs pen_head(const Matrix& o_t, const GenParams& p);

// Hard-max with ties resolved toward the lower index.
ink::PenState hard_max(const PenStateProbs& probs);

enum class LossVariant { CostSensitive, Plain };

// Teacher-forced sequence loss. Step 1 consumes the all-zero token and
// targets tokens[0]; step t consumes tokens[t-2] and targets tokens[t-1].
// CostSensitive weighs the pen-state term per Eq.-style class weights;
// Plain is the unweighted formulation (log of the picked probability).
double gen_loss(GenParams& p, const GenConfig& cfg, const std::vector<ink::GenToken>& tokens,
                int class_id, Mode mode, Rng* rng,
                std::vector<Matrix>* grad_accum = nullptr,
                LossVariant variant = LossVariant::CostSensitive);

struct SampleResult {
    ink::InkSequence ink;
    std::vector<ink::GenToken> tokens;
    bool truncated = false;
};

// Autoregressive draw: zero initial hidden state, zero initial direction
// and pen-state inputs; sample a mixture component then the direction,
// hard-max the pen state; stop on end-of-char or after max_len steps
// (setting `truncated`). Dropout stays off.
SampleResult sample_character(const GenParams& p, const GenConfig& cfg, int class_id,
                              Rng& rng, int max_len = -1);

// k nearest embedding columns by Euclidean distance, self excluded,
// ties broken toward the lower class index.
std::vector<int> nearest_neighbors(const Matrix& embedding, int class_id, int k);

optim::History train(GenParams& p, const GenConfig& cfg,
                     const std::vector<std::pair<std::vector<ink::GenToken>, int>>& corpus,
                     const optim::OptConfig& cfg_opt, Rng& rng, std::ostream* log = nullptr);

} // namespace scrawl::gen
