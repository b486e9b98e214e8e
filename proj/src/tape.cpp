#include "scrawl/tape.hpp"

#include <cmath>

namespace scrawl::num {

const Matrix& Var::value() const {
    if (!tape_) throw TapeError("value() on an empty Var");
    return tape_->value(*this);
}

const Matrix& Var::grad() const {
    if (!tape_) throw TapeError("grad() on an empty Var");
    return tape_->grad(*this);
}

int Tape::check(Var v) const {
    if (v.tape() != this || v.index() < 0 || v.index() >= static_cast<int>(nodes_.size()))
        throw TapeError("Var does not belong to this tape");
    return v.index();
}

bool Tape::any_grad(const std::vector<int>& args) const {
    for (int a : args)
        if (nodes_[static_cast<std::size_t>(a)].requires_grad) return true;
    return false;
}

Matrix& Tape::grad_of(int i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.empty() && val(i).size() > 0) n.grad = Matrix(val(i).rows(), val(i).cols());
    return n.grad;
}

Var Tape::leaf(Matrix value, bool trainable) {
    Node n;
    n.value = std::move(value);
    n.op = Op::Leaf;
    n.requires_grad = trainable;
    return push(std::move(n));
}

Var Tape::view(const Matrix& external, bool trainable) {
    Node n;
    n.view = &external;
    n.op = Op::View;
    n.requires_grad = trainable;
    return push(std::move(n));
}

Var Tape::affine(Var x, Var w, Var b) {
    return linear({{w, x}}, b);
}

Var Tape::linear(const std::vector<std::pair<Var, Var>>& terms, Var b) {
    if (terms.empty()) throw TapeError("linear: no terms");
    const int bi = check(b);
    const Matrix& bias = val(bi);
    if (bias.cols() != 1) throw ShapeError("linear: bias must be a column vector");
    Node n;
    n.op = Op::Linear;
    n.value = bias;
    for (const auto& [w, x] : terms) {
        const int wi = check(w), xi = check(x);
        const Matrix& wm = val(wi);
        const Matrix& xv = val(xi);
        if (xv.cols() != 1 || wm.cols() != xv.rows() || wm.rows() != bias.rows())
            throw ShapeError("linear: " + shape_string(wm) + " * " + shape_string(xv) +
                             " + " + shape_string(bias));
        for (int r = 0; r < wm.rows(); ++r) {
            const double* row = wm.data() + static_cast<std::size_t>(r) * wm.cols();
            double acc = 0.0;
            for (int c = 0; c < wm.cols(); ++c) acc += row[c] * xv[c];
            n.value[r] += acc;
        }
        n.args.push_back(wi);
        n.args.push_back(xi);
    }
    n.args.push_back(bi);
    n.requires_grad = any_grad(n.args);
    return push(std::move(n));
}

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(what) + ": " + shape_string(a) + " vs " + shape_string(b));
}

} // namespace

Var Tape::add(Var a, Var b) {
    const int ai = check(a), bi = check(b);
    check_same_shape(val(ai), val(bi), "add");
    Node n;
    n.op = Op::Add;
    n.args = {ai, bi};
    n.value = val(ai);
    const Matrix& rhs = val(bi);
    for (int i = 0; i < n.value.size(); ++i) n.value[i] += rhs[i];
    n.requires_grad = any_grad(n.args);
    return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
    const int ai = check(a), bi = check(b);
    check_same_shape(val(ai), val(bi), "sub");
    Node n;
    n.op = Op::Sub;
    n.args = {ai, bi};
    n.value = val(ai);
    const Matrix& rhs = val(bi);
    for (int i = 0; i < n.value.size(); ++i) n.value[i] -= rhs[i];
    n.requires_grad = any_grad(n.args);
    return push(std::move(n));
}

Var Tape::scale(Var a, double alpha) {
    const int ai = check(a);
    Node n;
    n.op = Op::Scale;
    n.args = {ai};
    n.alpha = alpha;
    n.value = val(ai);
    for (int i = 0; i < n.value.size(); ++i) n.value[i] *= alpha;
    n.requires_grad = any_grad(n.args);
    return push(std::move(n));
}

Var Tape::one_minus(Var a) {
    const int ai = check(a);
    Node n;
    n.op = Op::OneMinus;
    n.args = {ai};
    n.value = val(ai);
    for (int i = 0; i < n.value.size(); ++i) n.value[i] = 1.0 - n.value[i];
    n.requires_grad = any_grad(n.args);
    return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
    const int ai = check(a), bi = check(b);
    check_same_shape(val(ai), val(bi), "mul");
    Node n;
    n.op = Op::Mul;
    n.args = {ai, bi};
    n.value = val(ai);
    const Matrix& rhs = val(bi);
    for (int i = 0; i < n.value.size(); ++i) n.value[i] *= rhs[i];
    n.requires_grad = any_grad(n.args);
    return push(std::move(n));
}

#define SCRAWL_UNARY(NAME, OPKIND, EXPR)                      \
    Var Tape::NAME(Var a) {                                   \
        const int ai = check(a);                              \
        Node n;                                               \
        n.op = Op::OPKIND;                                    \
        n.args = {ai};                                        \
        n.value = val(ai);                                    \
        for (int i = 0; i < n.value.size(); ++i) {            \
            const double x = n.value[i];                      \
            n.value[i] = (EXPR);                              \
        }                                                     \
        n.requires_grad = any_grad(n.args);                   \
        return push(std::move(n));                            \
    }

SCRAWL_UNARY(sigm, Sigm, 1.0 / (1.0 + std::exp(-x)))
SCRAWL_UNARY(tanh, Tanh, std::tanh(x))
SCRAWL_UNARY(exp, Exp, std::exp(x))
SCRAWL_UNARY(log, Log, std::log(x))
SCRAWL_UNARY(square, Square, x * x)

#undef SCRAWL_UNARY

Var Tape::softmax(Var v) {
    const int vi = check(v);
    const Matrix& x = val(vi);
    if (x.cols() != 1 || x.rows() == 0) throw ShapeError("softmax: expected nonempty column vector");
    Node n;
    n.op = Op::Softmax;
    n.args = {vi};
    n.value = num::softmax(x);
    n.requires_grad = any_grad(n.args);
    return push(std::move(n));
}

Var Tape::log_softmax(Var v) {
    const int vi = check(v);
    const Matrix& x = val(vi);
    if (x.cols() != 1 || x.rows() == 0) throw ShapeError("log_softmax: expected nonempty column vector");
    double mx = x[0];
    for (int i = 1; i < x.size(); ++i) mx = std::max(mx, x[i]);
    double sum = 0.0;
    for (int i = 0; i < x.size(); ++i) sum += std::exp(x[i] - mx);
    const double lse = mx + std::log(sum);
    Node n;
    n.op = Op::LogSoftmax;
    n.args = {vi};
    n.value = x;
    for (int i = 0; i < n.value.size(); ++i) n.value[i] -= lse;
    n.requires_grad = any_grad(n.args);
    return push(std::move(n));
}

Var Tape::logsumexp(Var v) {
    const int vi = check(v);
    const Matrix& x = val(vi);
    if (x.cols() != 1 || x.rows() == 0) throw ShapeError("logsumexp: expected nonempty column vector");
    double mx = x[0];
    for (int i = 1; i < x.size(); ++i) mx = std::max(mx, x[i]);
    double sum = 0.0;
    for (int i = 0; i < x.size(); ++i) sum += std::exp(x[i] - mx);
    Node n;
    n.op = Op::LogSumExp;
    n.args = {vi};
    n.value = Matrix(1, 1, mx + std::log(sum));
    n.requires_grad = any_grad(n.args);
    return push(std::move(n));
}

Var Tape::sum(Var a) {
    const int ai = check(a);
    const Matrix& x = val(ai);
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i) acc += x[i];
    Node n;
    n.op = Op::Sum;
    n.args = {ai};
    n.value = Matrix(1, 1, acc);
    n.requires_grad = any_grad(n.args);
    return push(std::move(n));
}

Var Tape::dot(Var a, Var b) {
    const int ai = check(a), bi = check(b);
    check_same_shape(val(ai), val(bi), "dot");
    const Matrix& x = val(ai);
    const Matrix& y = val(bi);
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    Node n;
    n.op = Op::Dot;
    n.args = {ai, bi};
    n.value = Matrix(1, 1, acc);
    n.requires_grad = any_grad(n.args);
    return push(std::move(n));
}

Var Tape::concat(Var a, Var b) {
    const int ai = check(a), bi = check(b);
    const Matrix& x = val(ai);
    const Matrix& y = val(bi);
    if (x.cols() != 1 || y.cols() != 1) throw ShapeError("concat: expected column vectors");
    Node n;
    n.op = Op::Concat;
    n.args = {ai, bi};
    n.value = Matrix(x.rows() + y.rows(), 1);
    for (int i = 0; i < x.rows(); ++i) n.value[i] = x[i];
    for (int i = 0; i < y.rows(); ++i) n.value[x.rows() + i] = y[i];
    n.requires_grad = any_grad(n.args);
    return push(std::move(n));
}

Var Tape::slice(Var v, int offset, int len) {
    const int vi = check(v);
    const Matrix& x = val(vi);
    if (x.cols() != 1) throw ShapeError("slice: expected a column vector");
    if (offset < 0 || len <= 0 || offset + len > x.rows()) throw ShapeError("slice: range out of bounds");
    Node n;
    n.op = Op::Slice;
    n.args = {vi};
    n.i0 = offset;
    n.i1 = len;
    n.value = Matrix(len, 1);
    for (int i = 0; i < len; ++i) n.value[i] = x[offset + i];
    n.requires_grad = any_grad(n.args);
    return push(std::move(n));
}

Var Tape::pick(Var v, int index) {
    const int vi = check(v);
    const Matrix& x = val(vi);
    if (x.cols() != 1) throw ShapeError("pick: expected a column vector");
    if (index < 0 || index >= x.rows()) throw ShapeError("pick: index out of bounds");
    Node n;
    n.op = Op::Pick;
    n.args = {vi};
    n.i0 = index;
    n.value = Matrix(1, 1, x[index]);
    n.requires_grad = any_grad(n.args);
    return push(std::move(n));
}

Var Tape::column(Var m, int col) {
    const int mi = check(m);
    const Matrix& x = val(mi);
    if (col < 0 || col >= x.cols()) throw ShapeError("column: index out of bounds");
    Node n;
    n.op = Op::Column;
    n.args = {mi};
    n.i0 = col;
    n.value = Matrix(x.rows(), 1);
    for (int i = 0; i < x.rows(); ++i) n.value[i] = x(i, col);
    n.requires_grad = any_grad(n.args);
    return push(std::move(n));
}

const Matrix& Tape::grad(Var v) const {
    const int i = check(v);
    if (!swept_) throw TapeError("grad read before backward()");
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.requires_grad) throw TapeError("grad of a node that does not require gradients");
    return n.grad;
}

void Tape::backward(Var loss) {
    const int li = check(loss);
    const Matrix& lv = val(li);
    if (lv.rows() != 1 || lv.cols() != 1) throw TapeError("backward: loss must be a 1x1 scalar node");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        Node& n = nodes_[i];
        if (!n.requires_grad) continue;
        n.grad = Matrix(val(static_cast<int>(i)).rows(), val(static_cast<int>(i)).cols());
    }
    if (!nodes_[static_cast<std::size_t>(li)].requires_grad)
        nodes_[static_cast<std::size_t>(li)].grad = Matrix(1, 1);
    nodes_[static_cast<std::size_t>(li)].grad[0] = 1.0;
    for (int i = li; i >= 0; --i) {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        if (!n.requires_grad && i != li) continue;
        if (n.op == Op::Leaf || n.op == Op::View) continue;
        backward_node(i);
    }
    swept_ = true;
}

void Tape::backward_node(int i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    const Matrix& g = n.grad;
    if (g.empty() || g.max_abs() == 0.0) return;
    auto wants = [&](int a) { return nodes_[static_cast<std::size_t>(a)].requires_grad; };

    switch (n.op) {
    case Op::Leaf:
    case Op::View:
        break;
    case Op::Linear: {
        // args: w0, x0, w1, x1, ..., bias
        const int pairs = (static_cast<int>(n.args.size()) - 1) / 2;
        for (int p = 0; p < pairs; ++p) {
            const int wi = n.args[static_cast<std::size_t>(2 * p)];
            const int xi = n.args[static_cast<std::size_t>(2 * p + 1)];
            const Matrix& wm = val(wi);
            const Matrix& xv = val(xi);
            if (wants(wi)) {
                Matrix& gw = grad_of(wi);
                for (int r = 0; r < wm.rows(); ++r) {
                    double* grow = gw.data() + static_cast<std::size_t>(r) * wm.cols();
                    const double gr = g[r];
                    for (int c = 0; c < wm.cols(); ++c) grow[c] += gr * xv[c];
                }
            }
            if (wants(xi)) {
                Matrix& gx = grad_of(xi);
                for (int r = 0; r < wm.rows(); ++r) {
                    const double* row = wm.data() + static_cast<std::size_t>(r) * wm.cols();
                    const double gr = g[r];
                    for (int c = 0; c < wm.cols(); ++c) gx[c] += row[c] * gr;
                }
            }
        }
        const int bi = n.args.back();
        if (wants(bi)) {
            Matrix& gb = grad_of(bi);
            for (int r = 0; r < gb.size(); ++r) gb[r] += g[r];
        }
        break;
    }
    case Op::Add: {
        for (int k = 0; k < 2; ++k)
            if (wants(n.args[static_cast<std::size_t>(k)])) {
                Matrix& ga = grad_of(n.args[static_cast<std::size_t>(k)]);
                for (int j = 0; j < ga.size(); ++j) ga[j] += g[j];
            }
        break;
    }
    case Op::Sub: {
        if (wants(n.args[0])) {
            Matrix& ga = grad_of(n.args[0]);
            for (int j = 0; j < ga.size(); ++j) ga[j] += g[j];
        }
        if (wants(n.args[1])) {
            Matrix& gb = grad_of(n.args[1]);
            for (int j = 0; j < gb.size(); ++j) gb[j] -= g[j];
        }
        break;
    }
    case Op::Scale: {
        if (wants(n.args[0])) {
            Matrix& ga = grad_of(n.args[0]);
            for (int j = 0; j < ga.size(); ++j) ga[j] += n.alpha * g[j];
        }
        break;
    }
    case Op::OneMinus: {
        if (wants(n.args[0])) {
            Matrix& ga = grad_of(n.args[0]);
            for (int j = 0; j < ga.size(); ++j) ga[j] -= g[j];
        }
        break;
    }
    case Op::Mul: {
        const Matrix& a = val(n.args[0]);
        const Matrix& b = val(n.args[1]);
        if (wants(n.args[0])) {
            Matrix& ga = grad_of(n.args[0]);
            for (int j = 0; j < ga.size(); ++j) ga[j] += g[j] * b[j];
        }
        if (wants(n.args[1])) {
            Matrix& gb = grad_of(n.args[1]);
            for (int j = 0; j < gb.size(); ++j) gb[j] += g[j] * a[j];
        }
        break;
    }
    case Op::Sigm: {
        if (wants(n.args[0])) {
            Matrix& ga = grad_of(n.args[0]);
            const Matrix& s = n.value;
            for (int j = 0; j < ga.size(); ++j) ga[j] += g[j] * s[j] * (1.0 - s[j]);
        }
        break;
    }
    case Op::Tanh: {
        if (wants(n.args[0])) {
            Matrix& ga = grad_of(n.args[0]);
            const Matrix& t = n.value;
            for (int j = 0; j < ga.size(); ++j) ga[j] += g[j] * (1.0 - t[j] * t[j]);
        }
        break;
    }
    case Op::Exp: {
        if (wants(n.args[0])) {
            Matrix& ga = grad_of(n.args[0]);
            for (int j = 0; j < ga.size(); ++j) ga[j] += g[j] * n.value[j];
        }
        break;
    }
    case Op::Log: {
        if (wants(n.args[0])) {
            Matrix& ga = grad_of(n.args[0]);
            const Matrix& x = val(n.args[0]);
            for (int j = 0; j < ga.size(); ++j) ga[j] += g[j] / x[j];
        }
        break;
    }
    case Op::Square: {
        if (wants(n.args[0])) {
            Matrix& ga = grad_of(n.args[0]);
            const Matrix& x = val(n.args[0]);
            for (int j = 0; j < ga.size(); ++j) ga[j] += 2.0 * g[j] * x[j];
        }
        break;
    }
    case Op::Softmax: {
        if (wants(n.args[0])) {
            Matrix& ga = grad_of(n.args[0]);
            const Matrix& s = n.value;
            double inner = 0.0;
            for (int j = 0; j < s.size(); ++j) inner += g[j] * s[j];
            for (int j = 0; j < ga.size(); ++j) ga[j] += s[j] * (g[j] - inner);
        }
        break;
    }
    case Op::LogSoftmax: {
        if (wants(n.args[0])) {
            Matrix& ga = grad_of(n.args[0]);
            double gsum = 0.0;
            for (int j = 0; j < g.size(); ++j) gsum += g[j];
            for (int j = 0; j < ga.size(); ++j) ga[j] += g[j] - std::exp(n.value[j]) * gsum;
        }
        break;
    }
    case Op::LogSumExp: {
        if (wants(n.args[0])) {
            Matrix& ga = grad_of(n.args[0]);
            const Matrix& x = val(n.args[0]);
            const double lse = n.value[0];
            for (int j = 0; j < ga.size(); ++j) ga[j] += g[0] * std::exp(x[j] - lse);
        }
        break;
    }
    case Op::Sum: {
        if (wants(n.args[0])) {
            Matrix& ga = grad_of(n.args[0]);
            for (int j = 0; j < ga.size(); ++j) ga[j] += g[0];
        }
        break;
    }
    case Op::Dot: {
        const Matrix& a = val(n.args[0]);
        const Matrix& b = val(n.args[1]);
        if (wants(n.args[0])) {
            Matrix& ga = grad_of(n.args[0]);
            for (int j = 0; j < ga.size(); ++j) ga[j] += g[0] * b[j];
        }
        if (wants(n.args[1])) {
            Matrix& gb = grad_of(n.args[1]);
            for (int j = 0; j < gb.size(); ++j) gb[j] += g[0] * a[j];
        }
        break;
    }
    case Op::Concat: {
        const int na = val(n.args[0]).rows();
        if (wants(n.args[0])) {
            Matrix& ga = grad_of(n.args[0]);
            for (int j = 0; j < na; ++j) ga[j] += g[j];
        }
        if (wants(n.args[1])) {
            Matrix& gb = grad_of(n.args[1]);
            for (int j = 0; j < gb.size(); ++j) gb[j] += g[na + j];
        }
        break;
    }
    case Op::Slice: {
        if (wants(n.args[0])) {
            Matrix& ga = grad_of(n.args[0]);
            for (int j = 0; j < n.i1; ++j) ga[n.i0 + j] += g[j];
        }
        break;
    }
    case Op::Pick: {
        if (wants(n.args[0])) grad_of(n.args[0])[n.i0] += g[0];
        break;
    }
    case Op::Column: {
        if (wants(n.args[0])) {
            Matrix& gm = grad_of(n.args[0]);
            for (int r = 0; r < g.size(); ++r) gm(r, n.i0) += g[r];
        }
        break;
    }
    }
}

void Tape::reset() {
    nodes_.clear();
    swept_ = false;
}

} // namespace scrawl::num
