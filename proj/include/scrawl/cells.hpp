#pragma once

#include <string>
#include <utility>
#include <variant>

#include "scrawl/params.hpp"
#include "scrawl/rng.hpp"
#include "scrawl/tape.hpp"

namespace scrawl::cells {

using num::Matrix;
using num::Tape;
using num::Var;

enum class CellKind { Lstm, Gru };

std::string to_string(CellKind k);
CellKind cell_kind_from_string(const std::string& s);

// Per-gate matrices, kept separate rather than fused: W_* maps the input,
// U_* maps the previous hidden state.
struct LstmParams {
    Matrix W_i, W_f, W_o, W_c;
    Matrix U_i, U_f, U_o, U_c;
    Matrix b_i, b_f, b_o, b_c;
};

struct GruParams {
    Matrix W_r, W_z, W;
    Matrix U_r, U_z, U;
    Matrix b_r, b_z, b;
};

struct LstmParamVars {
    Var W_i, W_f, W_o, W_c, U_i, U_f, U_o, U_c, b_i, b_f, b_o, b_c;
};

struct GruParamVars {
    Var W_r, W_z, W, U_r, U_z, U, b_r, b_z, b;
};

// Hidden state handles on a tape. `c` is only set for LSTM cells.
struct CellState {
    Var h;
    Var c;
};

struct LstmTrace {
    Var i, f, o, c_tilde;
};

struct GruTrace {
    Var r, z, h_tilde;
};

// Weights ~ N(0, 0.01^2); biases zero except the LSTM forget bias, which
// starts at 5 so the cell initially forgets nothing.
inline constexpr double kInitStddev = 0.01;
inline constexpr double kForgetBiasInit = 5.0;

LstmParams init_lstm(int input_dim, int hidden_dim, Rng& rng);
GruParams init_gru(int input_dim, int hidden_dim, Rng& rng);

LstmParamVars bind(Tape& tape, const LstmParams& p, bool trainable);
GruParamVars bind(Tape& tape, const GruParams& p, bool trainable);

void register_params(LstmParams& p, const std::string& prefix, ParamSet& out);
void register_params(GruParams& p, const std::string& prefix, ParamSet& out);

CellState zero_state(Tape& tape, CellKind kind, int hidden_dim);

// One step of Eqs. i/f/o gates -> cell -> hidden (LSTM) or r/z gates ->
// candidate -> interpolation (GRU). Pure given the tape.
std::pair<CellState, LstmTrace> lstm_step(Tape& tape, const LstmParamVars& p, Var x, const CellState& s);
std::pair<CellState, GruTrace> gru_step(Tape& tape, const GruParamVars& p, Var x, const CellState& s);

// Kind-erased wrappers used by the stacked classifier.
using AnyCellParams = std::variant<LstmParams, GruParams>;
using AnyCellParamVars = std::variant<LstmParamVars, GruParamVars>;

AnyCellParams init_cell(CellKind kind, int input_dim, int hidden_dim, Rng& rng);
AnyCellParamVars bind(Tape& tape, const AnyCellParams& p, bool trainable);
void register_params(AnyCellParams& p, const std::string& prefix, ParamSet& out);
CellState cell_step(Tape& tape, const AnyCellParamVars& p, Var x, const CellState& s);

} // namespace scrawl::cells
