#include "scrawl/cells.hpp"

namespace scrawl::cells {

std::string to_string(CellKind k) {
    return k == CellKind::Lstm ? "lstm" : "gru";
}

CellKind cell_kind_from_string(const std::string& s) {
    if (s == "lstm" || s == "LSTM") return CellKind::Lstm;
    if (s == "gru" || s == "GRU") return CellKind::Gru;
    throw InvalidConfigError("unknown cell kind: " + s);
}

namespace {

Matrix gaussian_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (int i = 0; i < m.size(); ++i) m[i] = normal(rng, 0.0, kInitStddev);
    return m;
}

} // namespace

LstmParams init_lstm(int input_dim, int hidden_dim, Rng& rng) {
    if (input_dim <= 0 || hidden_dim <= 0) throw InvalidConfigError("cell dims must be positive");
    LstmParams p;
    p.W_i = gaussian_matrix(hidden_dim, input_dim, rng);
    p.W_f = gaussian_matrix(hidden_dim, input_dim, rng);
    p.W_o = gaussian_matrix(hidden_dim, input_dim, rng);
    p.W_c = gaussian_matrix(hidden_dim, input_dim, rng);
    p.U_i = gaussian_matrix(hidden_dim, hidden_dim, rng);
    p.U_f = gaussian_matrix(hidden_dim, hidden_dim, rng);
    p.U_o = gaussian_matrix(hidden_dim, hidden_dim, rng);
    p.U_c = gaussian_matrix(hidden_dim, hidden_dim, rng);
    p.b_i = Matrix(hidden_dim, 1);
    p.b_f = Matrix(hidden_dim, 1, kForgetBiasInit);
    p.b_o = Matrix(hidden_dim, 1);
    p.b_c = Matrix(hidden_dim, 1);
    return p;
}

GruParams init_gru(int input_dim, int hidden_dim, Rng& rng) {
    if (input_dim <= 0 || hidden_dim <= 0) throw InvalidConfigError("cell dims must be positive");
    GruParams p;
    p.W_r = gaussian_matrix(hidden_dim, input_dim, rng);
    p.W_z = gaussian_matrix(hidden_dim, input_dim, rng);
    p.W = gaussian_matrix(hidden_dim, input_dim, rng);
    p.U_r = gaussian_matrix(hidden_dim, hidden_dim, rng);
    p.U_z = gaussian_matrix(hidden_dim, hidden_dim, rng);
    p.U = gaussian_matrix(hidden_dim, hidden_dim, rng);
    p.b_r = Matrix(hidden_dim, 1);
    p.b_z = Matrix(hidden_dim, 1);
    p.b = Matrix(hidden_dim, 1);
    return p;
}

LstmParamVars bind(Tape& tape, const LstmParams& p, bool trainable) {
    LstmParamVars v;
    v.W_i = tape.view(p.W_i, trainable);
    v.W_f = tape.view(p.W_f, trainable);
    v.W_o = tape.view(p.W_o, trainable);
    v.W_c = tape.view(p.W_c, trainable);
    v.U_i = tape.view(p.U_i, trainable);
    v.U_f = tape.view(p.U_f, trainable);
    v.U_o = tape.view(p.U_o, trainable);
    v.U_c = tape.view(p.U_c, trainable);
    v.b_i = tape.view(p.b_i, trainable);
    v.b_f = tape.view(p.b_f, trainable);
    v.b_o = tape.view(p.b_o, trainable);
    v.b_c = tape.view(p.b_c, trainable);
    return v;
}

GruParamVars bind(Tape& tape, const GruParams& p, bool trainable) {
    GruParamVars v;
    v.W_r = tape.view(p.W_r, trainable);
    v.W_z = tape.view(p.W_z, trainable);
    v.W = tape.view(p.W, trainable);
    v.U_r = tape.view(p.U_r, trainable);
    v.U_z = tape.view(p.U_z, trainable);
    v.U = tape.view(p.U, trainable);
    v.b_r = tape.view(p.b_r, trainable);
    v.b_z = tape.view(p.b_z, trainable);
    v.b = tape.view(p.b, trainable);
    return v;
}

void register_params(LstmParams& p, const std::string& prefix, ParamSet& out) {
    out.push_back({prefix + ".W_i", &p.W_i});
    out.push_back({prefix + ".W_f", &p.W_f});
    out.push_back({prefix + ".W_o", &p.W_o});
    out.push_back({prefix + ".W_c", &p.W_c});
    out.push_back({prefix + ".U_i", &p.U_i});
    out.push_back({prefix + ".U_f", &p.U_f});
    out.push_back({prefix + ".U_o", &p.U_o});
    out.push_back({prefix + ".U_c", &p.U_c});
    out.push_back({prefix + ".b_i", &p.b_i});
    out.push_back({prefix + ".b_f", &p.b_f});
    out.push_back({prefix + ".b_o", &p.b_o});
    out.push_back({prefix + ".b_c", &p.b_c});
}

void register_params(GruParams& p, const std::string& prefix, ParamSet& out) {
    out.push_back({prefix + ".W_r", &p.W_r});
    out.push_back({prefix + ".W_z", &p.W_z});
    out.push_back({prefix + ".W", &p.W});
    out.push_back({prefix + ".U_r", &p.U_r});
    out.push_back({prefix + ".U_z", &p.U_z});
    out.push_back({prefix + ".U", &p.U});
    out.push_back({prefix + ".b_r", &p.b_r});
    out.push_back({prefix + ".b_z", &p.b_z});
    out.push_back({prefix + ".b", &p.b});
}

CellState zero_state(Tape& tape, CellKind kind, int hidden_dim) {
    CellState s;
    s.h = tape.constant(Matrix(hidden_dim, 1));
    if (kind == CellKind::Lstm) s.c = tape.constant(Matrix(hidden_dim, 1));
    return s;
}

std::pair<CellState, LstmTrace> lstm_step(Tape& tape, const LstmParamVars& p, Var x, const CellState& s) {
    LstmTrace t;
    t.i = tape.sigm(tape.linear({{p.W_i, x}, {p.U_i, s.h}}, p.b_i));
    t.f = tape.sigm(tape.linear({{p.W_f, x}, {p.U_f, s.h}}, p.b_f));
    t.o = tape.sigm(tape.linear({{p.W_o, x}, {p.U_o, s.h}}, p.b_o));
    t.c_tilde = tape.tanh(tape.linear({{p.W_c, x}, {p.U_c, s.h}}, p.b_c));
    CellState next;
    next.c = tape.add(tape.mul(t.i, t.c_tilde), tape.mul(t.f, s.c));
    next.h = tape.mul(t.o, tape.tanh(next.c));
    return {next, t};
}

std::pair<CellState, GruTrace> gru_step(Tape& tape, const GruParamVars& p, Var x, const CellState& s) {
    GruTrace t;
    t.r = tape.sigm(tape.linear({{p.W_r, x}, {p.U_r, s.h}}, p.b_r));
    t.z = tape.sigm(tape.linear({{p.W_z, x}, {p.U_z, s.h}}, p.b_z));
    t.h_tilde = tape.tanh(tape.linear({{p.W, x}, {p.U, tape.mul(t.r, s.h)}}, p.b));
    CellState next;
    next.h = tape.add(tape.mul(t.z, s.h), tape.mul(tape.one_minus(t.z), t.h_tilde));
    return {next, t};
}

AnyCellParams init_cell(CellKind kind, int input_dim, int hidden_dim, Rng& rng) {
    if (kind == CellKind::Lstm) return init_lstm(input_dim, hidden_dim, rng);
    return init_gru(input_dim, hidden_dim, rng);
}

AnyCellParamVars bind(Tape& tape, const AnyCellParams& p, bool trainable) {
    return std::visit([&](const auto& concrete) -> AnyCellParamVars {
        return bind(tape, concrete, trainable);
    }, p);
}

void register_params(AnyCellParams& p, const std::string& prefix, ParamSet& out) {
    std::visit([&](auto& concrete) { register_params(concrete, prefix, out); }, p);
}

CellState cell_step(Tape& tape, const AnyCellParamVars& p, Var x, const CellState& s) {
    if (const auto* lstm = std::get_if<LstmParamVars>(&p))
        return lstm_step(tape, *lstm, x, s).first;
    return gru_step(tape, std::get<GruParamVars>(p), x, s).first;
}

} // namespace scrawl::cells
