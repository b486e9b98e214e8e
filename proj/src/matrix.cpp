#include "scrawl/matrix.hpp"

#include <cmath>
#include <string>

namespace scrawl::num {

Matrix Matrix::row_major(int rows, int cols, std::initializer_list<double> values) {
    Matrix m(rows, cols);
    if (static_cast<int>(values.size()) != rows * cols)
        throw ShapeError("row_major: value count does not match shape");
    int i = 0;
    for (double v : values) m[i++] = v;
    return m;
}

Matrix Matrix::column(std::initializer_list<double> values) {
    return row_major(static_cast<int>(values.size()), 1, values);
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

std::string shape_string(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Matrix matvec(const Matrix& w, const Matrix& x) {
    if (x.cols() != 1 || w.cols() != x.rows())
        throw ShapeError("matvec: " + shape_string(w) + " * " + shape_string(x));
    Matrix y(w.rows(), 1);
    for (int i = 0; i < w.rows(); ++i) {
        const double* row = w.data() + static_cast<std::size_t>(i) * w.cols();
        double acc = 0.0;
        for (int j = 0; j < w.cols(); ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
    return y;
}

Matrix affine(const Matrix& w, const Matrix& x, const Matrix& b) {
    Matrix y = matvec(w, x);
    if (!y.same_shape(b)) throw ShapeError("affine: bias shape " + shape_string(b));
    for (int i = 0; i < y.size(); ++i) y[i] += b[i];
    return y;
}

Matrix add(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw ShapeError("add: " + shape_string(a) + " vs " + shape_string(b));
    Matrix y = a;
    for (int i = 0; i < y.size(); ++i) y[i] += b[i];
    return y;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw ShapeError("hadamard: " + shape_string(a) + " vs " + shape_string(b));
    Matrix y = a;
    for (int i = 0; i < y.size(); ++i) y[i] *= b[i];
    return y;
}

Matrix map_sigm(const Matrix& a) {
    Matrix y = a;
    for (int i = 0; i < y.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-y[i]));
    return y;
}

Matrix map_tanh(const Matrix& a) {
    Matrix y = a;
    for (int i = 0; i < y.size(); ++i) y[i] = std::tanh(y[i]);
    return y;
}

Matrix softmax(const Matrix& v) {
    if (v.cols() != 1 || v.rows() == 0) throw ShapeError("softmax: expected nonempty column vector");
    double mx = v[0];
    for (int i = 1; i < v.size(); ++i) mx = std::max(mx, v[i]);
    Matrix y(v.rows(), 1);
    double sum = 0.0;
    for (int i = 0; i < v.size(); ++i) {
        y[i] = std::exp(v[i] - mx);
        sum += y[i];
    }
    for (int i = 0; i < y.size(); ++i) y[i] /= sum;
    return y;
}

int argmax(const Matrix& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

} // namespace scrawl::num
