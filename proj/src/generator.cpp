#include "scrawl/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace scrawl::gen {

namespace {
constexpr double kHalfLog2Pi = 0.5 * 1.8378770664093453; // 0.5 * ln(2*pi)
}

void GenConfig::validate() const {
    if (class_count <= 0 || embed_dim <= 0 || input_dim <= 0 || hidden_dim <= 0 ||
        output_dim <= 0 || mixture_count <= 0 || max_len <= 0)
        throw InvalidConfigError("GenConfig: dimensions must be positive");
    if (dropout < 0.0 || dropout >= 1.0)
        throw InvalidConfigError("GenConfig: dropout must lie in [0, 1)");
    for (double w : loss_weights)
        if (!(w > 0.0)) throw InvalidConfigError("GenConfig: loss weights must be positive");
}

GenConfig gen_preset(const std::string& name) {
    GenConfig c;
    if (name == "gen-paper") {
        c.class_count = 3755;
        c.embed_dim = 500;
        c.input_dim = 300;
        c.hidden_dim = 1000;
        c.output_dim = 300;
        c.mixture_count = 30;
    } else if (name == "desk-gen") {
        c.class_count = 0; // filled in from the corpus
        c.embed_dim = 32;
        c.input_dim = 32;
        c.hidden_dim = 128;
        c.output_dim = 64;
        c.mixture_count = 5;
    } else {
        throw InvalidConfigError("unknown generator preset: " + name);
    }
    return c;
}

ParamSet GenParams::params() {
    ParamSet out;
    out.push_back({"embed.E", &E});
    out.push_back({"in.W_d", &W_d});
    out.push_back({"in.b_d", &b_d});
    out.push_back({"in.W_s", &W_s});
    out.push_back({"in.b_s", &b_s});
    for (auto& [name, m] : std::initializer_list<std::pair<const char*, Matrix*>>{
             {"gru.W_r", &W_r}, {"gru.U_r", &U_r}, {"gru.V_r", &V_r}, {"gru.M_r", &M_r}, {"gru.b_r", &b_r},
             {"gru.W_z", &W_z}, {"gru.U_z", &U_z}, {"gru.V_z", &V_z}, {"gru.M_z", &M_z}, {"gru.b_z", &b_z},
             {"gru.W", &W},     {"gru.U", &U},     {"gru.V", &V},     {"gru.M", &M},     {"gru.b", &b},
             {"out.W_o", &W_o}, {"out.U_o", &U_o}, {"out.V_o", &V_o}, {"out.M_o", &M_o}, {"out.b_o", &b_o},
             {"gmm.W", &W_gmm}, {"gmm.b", &b_gmm}, {"pen.W", &W_pen}, {"pen.b", &b_pen}})
        out.push_back({name, m});
    return out;
}

namespace {

Matrix gaussian_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (int i = 0; i < m.size(); ++i) m[i] = normal(rng, 0.0, cells::kInitStddev);
    return m;
}

} // namespace

GenParams init_generator(const GenConfig& cfg, Rng& rng) {
    cfg.validate();
    const int d = cfg.embed_dim, t = cfg.input_dim, D = cfg.hidden_dim, o = cfg.output_dim;
    GenParams p;
    p.E = gaussian_matrix(d, cfg.class_count, rng);
    p.W_d = gaussian_matrix(t, 2, rng);
    p.b_d = Matrix(t, 1);
    p.W_s = gaussian_matrix(t, 3, rng);
    p.b_s = Matrix(t, 1);
    for (Matrix* w : {&p.W_r, &p.W_z, &p.W}) *w = gaussian_matrix(D, D, rng);
    for (Matrix* u : {&p.U_r, &p.U_z, &p.U}) *u = gaussian_matrix(D, t, rng);
    for (Matrix* v : {&p.V_r, &p.V_z, &p.V}) *v = gaussian_matrix(D, t, rng);
    for (Matrix* m : {&p.M_r, &p.M_z, &p.M}) *m = gaussian_matrix(D, d, rng);
    for (Matrix* b : {&p.b_r, &p.b_z, &p.b}) *b = Matrix(D, 1);
    p.W_o = gaussian_matrix(o, D, rng);
    p.U_o = gaussian_matrix(o, t, rng);
    p.V_o = gaussian_matrix(o, t, rng);
    p.M_o = gaussian_matrix(o, d, rng);
    p.b_o = Matrix(o, 1);
    p.W_gmm = gaussian_matrix(5 * cfg.mixture_count, o, rng);
    p.b_gmm = Matrix(5 * cfg.mixture_count, 1);
    p.W_pen = gaussian_matrix(3, o, rng);
    p.b_pen = Matrix(3, 1);
    return p;
}

GenParamVars bind(Tape& tape, const GenParams& p, bool trainable) {
    GenParamVars v;
    v.E = tape.view(p.E, trainable);
    v.W_d = tape.view(p.W_d, trainable);
    v.b_d = tape.view(p.b_d, trainable);
    v.W_s = tape.view(p.W_s, trainable);
    v.b_s = tape.view(p.b_s, trainable);
    v.W_r = tape.view(p.W_r, trainable);
    v.U_r = tape.view(p.U_r, trainable);
    v.V_r = tape.view(p.V_r, trainable);
    v.M_r = tape.view(p.M_r, trainable);
    v.b_r = tape.view(p.b_r, trainable);
    v.W_z = tape.view(p.W_z, trainable);
    v.U_z = tape.view(p.U_z, trainable);
    v.V_z = tape.view(p.V_z, trainable);
    v.M_z = tape.view(p.M_z, trainable);
    v.b_z = tape.view(p.b_z, trainable);
    v.W = tape.view(p.W, trainable);
    v.U = tape.view(p.U, trainable);
    v.V = tape.view(p.V, trainable);
    v.M = tape.view(p.M, trainable);
    v.b = tape.view(p.b, trainable);
    v.W_o = tape.view(p.W_o, trainable);
    v.U_o = tape.view(p.U_o, trainable);
    v.V_o = tape.view(p.V_o, trainable);
    v.M_o = tape.view(p.M_o, trainable);
    v.b_o = tape.view(p.b_o, trainable);
    v.W_gmm = tape.view(p.W_gmm, trainable);
    v.b_gmm = tape.view(p.b_gmm, trainable);
    v.W_pen = tape.view(p.W_pen, trainable);
    v.b_pen = tape.view(p.b_pen, trainable);
    return v;
}

GenStepTrace gen_step(Tape& tape, const GenParamVars& p, const GenConfig& cfg,
                      Var h_prev, Var d_t, Var s_t, Var c, Mode mode, Rng* rng) {
    GenStepTrace t;
    t.d_in = tape.tanh(tape.affine(d_t, p.W_d, p.b_d));
    t.s_in = tape.tanh(tape.affine(s_t, p.W_s, p.b_s));
    t.r = tape.sigm(tape.linear({{p.W_r, h_prev}, {p.U_r, t.d_in}, {p.V_r, t.s_in}, {p.M_r, c}}, p.b_r));
    t.z = tape.sigm(tape.linear({{p.W_z, h_prev}, {p.U_z, t.d_in}, {p.V_z, t.s_in}, {p.M_z, c}}, p.b_z));
    t.h_tilde = tape.tanh(tape.linear(
        {{p.W, tape.mul(t.r, h_prev)}, {p.U, t.d_in}, {p.V, t.s_in}, {p.M, c}}, p.b));
    t.h = tape.add(tape.mul(t.z, h_prev), tape.mul(tape.one_minus(t.z), t.h_tilde));
    t.o = tape.tanh(tape.linear({{p.W_o, t.h}, {p.U_o, t.d_in}, {p.V_o, t.s_in}, {p.M_o, c}}, p.b_o));
    if (mode == Mode::Train && cfg.dropout > 0.0) {
        if (!rng) throw InvalidConfigError("gen_step: train-mode dropout needs an RNG");
        Matrix mask(t.o.value().rows(), 1);
        const double keep_scale = 1.0 / (1.0 - cfg.dropout);
        for (int i = 0; i < mask.size(); ++i)
            mask[i] = uniform(*rng, 0.0, 1.0) >= cfg.dropout ? keep_scale : 0.0;
        t.o = tape.mul(t.o, tape.constant(std::move(mask)));
    }
    return t;
}

MixtureParams gmm_head(const Matrix& o_t, const GenParams& p) {
    const Matrix raw = num::affine(p.W_gmm, o_t, p.b_gmm);
    const int m = raw.size() / 5;
    MixtureParams mix;
    mix.pi.resize(static_cast<std::size_t>(m));
    mix.mu_x.resize(static_cast<std::size_t>(m));
    mix.mu_y.resize(static_cast<std::size_t>(m));
    mix.delta_x.resize(static_cast<std::size_t>(m));
    mix.delta_y.resize(static_cast<std::size_t>(m));

    Matrix pi_raw(m, 1);
    for (int j = 0; j < m; ++j) pi_raw[j] = raw[j];
    const Matrix pi = num::softmax(pi_raw);
    for (int j = 0; j < m; ++j) {
        mix.pi[static_cast<std::size_t>(j)] = pi[j];
        mix.mu_x[static_cast<std::size_t>(j)] = raw[m + j];
        mix.mu_y[static_cast<std::size_t>(j)] = raw[2 * m + j];
        mix.delta_x[static_cast<std::size_t>(j)] = std::max(std::exp(raw[3 * m + j]), kDeltaFloor);
        mix.delta_y[static_cast<std::size_t>(j)] = std::max(std::exp(raw[4 * m + j]), kDeltaFloor);
    }
    return mix;
}

double gmm_log_density(const MixtureParams& mix, double dx, double dy) {
    const int m = mix.count();
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        const double zx = (dx - mix.mu_x[static_cast<std::size_t>(j)]) / mix.delta_x[static_cast<std::size_t>(j)];
        const double zy = (dy - mix.mu_y[static_cast<std::size_t>(j)]) / mix.delta_y[static_cast<std::size_t>(j)];
        const double term = std::log(mix.pi[static_cast<std::size_t>(j)]) -
                            std::log(mix.delta_x[static_cast<std::size_t>(j)]) -
                            std::log(mix.delta_y[static_cast<std::size_t>(j)]) -
                            2.0 * kHalfLog2Pi - 0.5 * (zx * zx + zy * zy);
        terms[static_cast<std::size_t>(j)] = term;
        best = std::max(best, term);
    }
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - best);
    return best + std::log(acc);
}

double gmm_density(const MixtureParams& mix, double dx, double dy) {
    return std::exp(gmm_log_density(mix, dx, dy));
}

std::pair<double, double> gmm_sample(const MixtureParams& mix, Rng& rng) {
    const double u = uniform(rng, 0.0, 1.0);
    int j = 0;
    double cdf = 0.0;
    for (; j < mix.count(); ++j) {
        cdf += mix.pi[static_cast<std::size_t>(j)];
        if (u < cdf) break;
    }
    j = std::min(j, mix.count() - 1);
    const double dx = normal(rng, mix.mu_x[static_cast<std::size_t>(j)], mix.delta_x[static_cast<std::size_t>(j)]);
    const double dy = normal(rng, mix.mu_y[static_cast<std::size_t>(j)], mix.delta_y[static_cast<std::size_t>(j)]);
    return {dx, dy};
}

PenStateProbs pen_head(const Matrix& o_t, const GenParams& p) {
    const Matrix probs = num::softmax(num::affine(p.W_pen, o_t, p.b_pen));
    return {{probs[0], probs[1], probs[2]}};
}

ink::PenState hard_max(const PenStateProbs& probs) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (probs.p[static_cast<std::size_t>(i)] > probs.p[static_cast<std::size_t>(best)]) best = i;
    return static_cast<ink::PenState>(best);
}

namespace {

// -log N(v | mu, exp(dhat)) vector over mixture components, in log space:
// log N = -dhat - 0.5*log(2*pi) - 0.5*(v - mu)^2 * exp(-2*dhat).
Var log_normal_terms(Tape& tape, Var mu, Var delta_hat, double v, int m) {
    const Var diff = tape.sub(tape.constant(Matrix(m, 1, v)), mu);
    const Var quad = tape.mul(tape.square(diff), tape.exp(tape.scale(delta_hat, -2.0)));
    Var out = tape.sub(tape.scale(delta_hat, -1.0), tape.scale(quad, 0.5));
    return tape.add(out, tape.constant(Matrix(m, 1, -kHalfLog2Pi)));
}

struct StepHeads {
    Var log_pd;      // log mixture density of the target direction
    Var pen_logits;  // 3 raw pen-state logits
};

StepHeads step_heads(Tape& tape, const GenParamVars& p, int mixture_count, Var o_t,
                     double target_dx, double target_dy) {
    const int m = mixture_count;
    const Var raw = tape.affine(o_t, p.W_gmm, p.b_gmm);
    const Var log_pi = tape.log_softmax(tape.slice(raw, 0, m));
    const Var mu_x = tape.slice(raw, m, m);
    const Var mu_y = tape.slice(raw, 2 * m, m);
    const Var dhat_x = tape.slice(raw, 3 * m, m);
    const Var dhat_y = tape.slice(raw, 4 * m, m);
    const Var comp = tape.add(log_pi, tape.add(log_normal_terms(tape, mu_x, dhat_x, target_dx, m),
                                               log_normal_terms(tape, mu_y, dhat_y, target_dy, m)));
    StepHeads heads;
    heads.log_pd = tape.logsumexp(comp);
    heads.pen_logits = tape.affine(o_t, p.W_pen, p.b_pen);
    return heads;
}

Matrix token_direction(const ink::GenToken& t) {
    return Matrix::column({t.dx, t.dy});
}

Matrix pen_vector(const ink::GenToken& t) {
    const auto oh = ink::one_hot(t.pen);
    return Matrix::column({oh[0], oh[1], oh[2]});
}

void validate_tokens(const std::vector<ink::GenToken>& tokens) {
    if (tokens.empty()) throw TokenError("gen_loss: empty token sequence");
    if (tokens.back().pen != ink::PenState::End)
        throw TokenError("gen_loss: sequence must end with end-of-char");
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
        if (tokens[i].pen == ink::PenState::End)
            throw TokenError("gen_loss: end-of-char before the final token");
}

} // namespace

double gen_loss(GenParams& p, const GenConfig& cfg, const std::vector<ink::GenToken>& tokens,
                int class_id, Mode mode, Rng* rng,
                std::vector<Matrix>* grad_accum, LossVariant variant) {
    validate_tokens(tokens);
    if (class_id < 0 || class_id >= cfg.class_count)
        throw LabelError("gen_loss: class id out of range");

    Tape tape;
    const GenParamVars v = bind(tape, p, grad_accum != nullptr);
    const Var c = tape.column(v.E, class_id);

    Var h = tape.constant(Matrix(cfg.hidden_dim, 1));
    Var d_in = tape.constant(Matrix(2, 1));  // zero initial token
    Var s_in = tape.constant(Matrix(3, 1));

    Var loss = tape.scalar(0.0);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const ink::GenToken& target = tokens[t];
        const GenStepTrace trace = gen_step(tape, v, cfg, h, d_in, s_in, c, mode, rng);
        const StepHeads heads = step_heads(tape, v, cfg.mixture_count, trace.o, target.dx, target.dy);

        const bool direction_counts =
            target.pen != ink::PenState::End || cfg.terminal_direction_loss;
        if (direction_counts) loss = tape.sub(loss, heads.log_pd);

        if (variant == LossVariant::CostSensitive) {
            const auto oh = ink::one_hot(target.pen);
            Matrix weighted(3, 1);
            for (int i = 0; i < 3; ++i)
                weighted[i] = cfg.loss_weights[static_cast<std::size_t>(i)] * oh[static_cast<std::size_t>(i)];
            loss = tape.sub(loss, tape.dot(tape.log_softmax(heads.pen_logits),
                                           tape.constant(std::move(weighted))));
        } else {
            // unweighted route: probability of the observed state, then log
            const Var p_s = tape.dot(tape.softmax(heads.pen_logits), tape.constant(pen_vector(target)));
            loss = tape.sub(loss, tape.log(p_s));
        }

        h = trace.h;
        d_in = tape.constant(token_direction(target));
        s_in = tape.constant(pen_vector(target));
    }

    const double value = loss.value()[0];
    if (!std::isfinite(value)) throw NumericalError("gen_loss: non-finite loss");

    if (grad_accum) {
        ParamSet params = p.params();
        if (grad_accum->size() != params.size())
            throw ShapeError("gen_loss: gradient accumulator size mismatch");
        tape.backward(loss);
        const Var ordered[] = {v.E, v.W_d, v.b_d, v.W_s, v.b_s,
                               v.W_r, v.U_r, v.V_r, v.M_r, v.b_r,
                               v.W_z, v.U_z, v.V_z, v.M_z, v.b_z,
                               v.W, v.U, v.V, v.M, v.b,
                               v.W_o, v.U_o, v.V_o, v.M_o, v.b_o,
                               v.W_gmm, v.b_gmm, v.W_pen, v.b_pen};
        for (std::size_t i = 0; i < std::size(ordered); ++i) {
            const Matrix& g = tape.grad(ordered[i]);
            Matrix& acc = (*grad_accum)[i];
            for (int j = 0; j < acc.size(); ++j) acc[j] += g[j];
        }
    }
    return value;
}

SampleResult sample_character(const GenParams& p, const GenConfig& cfg, int class_id,
                              Rng& rng, int max_len) {
    if (class_id < 0 || class_id >= cfg.class_count)
        throw LabelError("sample_character: class id out of range");
    if (max_len < 0) max_len = cfg.max_len;

    Tape tape;
    const GenParamVars v = bind(tape, p, false);
    const Var c = tape.column(v.E, class_id);

    Var h = tape.constant(Matrix(cfg.hidden_dim, 1));
    Var d_in = tape.constant(Matrix(2, 1));
    Var s_in = tape.constant(Matrix(3, 1));

    SampleResult result;
    for (int step = 0; step < max_len; ++step) {
        const GenStepTrace trace = gen_step(tape, v, cfg, h, d_in, s_in, c, Mode::Eval, nullptr);
        const Matrix& o = trace.o.value();
        const MixtureParams mix = gmm_head(o, p);
        const auto [dx, dy] = gmm_sample(mix, rng);
        const ink::PenState state = hard_max(pen_head(o, p));

        if (state == ink::PenState::End) {
            result.tokens.push_back({0.0, 0.0, ink::PenState::End});
            break;
        }
        result.tokens.push_back({dx, dy, state});
        h = trace.h;
        d_in = tape.constant(Matrix::column({dx, dy}));
        const auto oh = ink::one_hot(state);
        s_in = tape.constant(Matrix::column({oh[0], oh[1], oh[2]}));
    }

    result.truncated = result.tokens.empty() || result.tokens.back().pen != ink::PenState::End;
    result.ink = ink::tokens_to_ink(result.tokens);
    result.ink.label = class_id;
    return result;
}

std::vector<int> nearest_neighbors(const Matrix& embedding, int class_id, int k) {
    const int n = embedding.cols();
    if (class_id < 0 || class_id >= n) throw LabelError("nearest_neighbors: class id out of range");
    if (k < 0 || k >= n) throw InvalidConfigError("nearest_neighbors: need 0 <= k < class count");

    std::vector<std::pair<double, int>> dists;
    dists.reserve(static_cast<std::size_t>(n) - 1);
    for (int j = 0; j < n; ++j) {
        if (j == class_id) continue;
        double d2 = 0.0;
        for (int r = 0; r < embedding.rows(); ++r) {
            const double diff = embedding(r, j) - embedding(r, class_id);
            d2 += diff * diff;
        }
        dists.emplace_back(d2, j);
    }
    std::sort(dists.begin(), dists.end()); // ties resolve to the lower index
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) out.push_back(dists[static_cast<std::size_t>(i)].second);
    return out;
}

optim::History train(GenParams& p, const GenConfig& cfg,
                     const std::vector<std::pair<std::vector<ink::GenToken>, int>>& corpus,
                     const optim::OptConfig& cfg_opt, Rng& rng, std::ostream* log) {
    if (corpus.empty()) throw InvalidConfigError("generator train: empty corpus");
    ParamSet params = p.params();
    optim::AdamState state(params);

    auto sample_fn = [&](std::size_t index, Rng& sample_rng, std::vector<Matrix>& grads)
        -> optim::SampleOutcome {
        const auto& [tokens, class_id] = corpus[index];
        const double loss = gen_loss(p, cfg, tokens, class_id, Mode::Train, &sample_rng, &grads);
        return {loss, loss};
    };

    return optim::run_epochs(params, corpus.size(), sample_fn, cfg_opt, state, rng, log);
}

} // namespace scrawl::gen
