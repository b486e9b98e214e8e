#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "scrawl/matrix.hpp"

namespace scrawl::num {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while its tape lives.
class Var {
public:
    Var() = default;
    const Matrix& value() const;
    const Matrix& grad() const;
    Tape* tape() const { return tape_; }
    int index() const { return idx_; }
    bool valid() const { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* t, int i) : tape_(t), idx_(i) {}
    Tape* tape_ = nullptr;
    int idx_ = -1;
};

// Reverse-mode tape over Matrix values. Operations evaluate eagerly and
// record enough to replay the exact reverse order in backward(). One tape
// per forward pass; independent tapes are safe to use concurrently.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Leaves. Trainable leaves receive gradients; view leaves alias an
    // external matrix that must outlive the tape (model weights).
    Var leaf(Matrix value, bool trainable = false);
    Var view(const Matrix& external, bool trainable);
    Var constant(Matrix value) { return leaf(std::move(value), false); }
    Var scalar(double v) { return leaf(Matrix(1, 1, v), false); }

    // w x + b
    Var affine(Var x, Var w, Var b);
    // sum_i w_i x_i + b, one node for a whole gate pre-activation
    Var linear(const std::vector<std::pair<Var, Var>>& terms, Var b);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var scale(Var a, double alpha);
    Var one_minus(Var a);
    Var mul(Var a, Var b); // elementwise
    Var neg(Var a) { return scale(a, -1.0); }

    Var sigm(Var a);
    Var tanh(Var a);
    Var exp(Var a);
    Var log(Var a);
    Var square(Var a);

    Var softmax(Var v);     // column vector, max-shifted
    Var log_softmax(Var v); // column vector
    Var logsumexp(Var v);   // column vector -> 1x1
    Var sum(Var a);         // all entries -> 1x1
    Var dot(Var a, Var b);  // -> 1x1

    Var concat(Var a, Var b);            // stacked column vectors
    Var slice(Var v, int offset, int len);
    Var pick(Var v, int index);          // -> 1x1
    Var column(Var m, int col);          // matrix column -> vector

    // Reverse sweep seeded with d(loss)/d(loss) = 1. `loss` must be a 1x1
    // node recorded on this tape. Gradients of trainable leaves that the
    // loss does not depend on are zero.
    void backward(Var loss);

    const Matrix& value(Var v) const { return val(check(v)); }
    const Matrix& grad(Var v) const;

    std::size_t node_count() const { return nodes_.size(); }
    void reset();

private:
    enum class Op : std::uint8_t {
        Leaf, View, Affine, Linear, Add, Sub, Scale, OneMinus, Mul,
        Sigm, Tanh, Exp, Log, Square,
        Softmax, LogSoftmax, LogSumExp, Sum, Dot,
        Concat, Slice, Pick, Column,
    };

    struct Node {
        Matrix value;                 // owned result (unused for View)
        const Matrix* view = nullptr; // View leaves alias external storage
        Matrix grad;                  // allocated during backward
        Op op = Op::Leaf;
        std::vector<int> args;
        int i0 = 0, i1 = 0;           // slice offset/len, pick/column index
        double alpha = 1.0;           // Scale factor
        bool requires_grad = false;
    };

    const Matrix& val(int i) const {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        return n.view ? *n.view : n.value;
    }
    int check(Var v) const;
    Var push(Node n) {
        nodes_.push_back(std::move(n));
        return Var(this, static_cast<int>(nodes_.size()) - 1);
    }
    bool any_grad(const std::vector<int>& args) const;
    void backward_node(int i);
    Matrix& grad_of(int i);

    std::vector<Node> nodes_;
    bool swept_ = false;
};

} // namespace scrawl::num
