#pragma once

#include <span>
#include <utility>

#include "aopath/autodiff.hpp"

namespace aopath {

// One direction's weights. Two bias vectors are kept separate; gate
// blocks are laid out [input, forget, cell, output] within the 4h axis,
// and checkpoints serialize them in that order.
struct LstmCellParams {
    Var w_ih;  // [4h x in]
    Var w_hh;  // [4h x h]
    Var b_ih;  // [4h]
    Var b_hh;  // [4h]

    std::size_t hidden_size() const { return w_hh.value().dim(1); }
    std::size_t input_size() const { return w_ih.value().dim(1); }
};

struct LstmState {
    Var h;
    Var c;
};

// Standard gate equations: i,f,o sigmoid, g tanh; c' = f*c + i*g,
// h' = o * tanh(c').
LstmState lstm_cell(const Var& x, const Var& h, const Var& c, const LstmCellParams& p);

// Concatenation [h_fwd_last ; h_bwd_last] where the backward half runs the
// sequence from its last element to its first. Zero initial states.
Var bilstm(std::span<const Var> seq, const LstmCellParams& fwd, const LstmCellParams& bwd);

}  // namespace aopath
