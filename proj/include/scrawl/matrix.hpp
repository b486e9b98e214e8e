#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "scrawl/error.hpp"

namespace scrawl::num {

// Dense row-major matrix of doubles. Column vectors are n x 1 matrices.
// All model weights, biases and activations use this one type.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {
        if (rows < 0 || cols < 0) throw ShapeError("negative matrix dimension");
    }
    Matrix(int rows, int cols, double fill) : Matrix(rows, cols) {
        for (auto& v : data_) v = fill;
    }

    static Matrix row_major(int rows, int cols, std::initializer_list<double> values);
    static Matrix column(std::initializer_list<double> values);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int size() const { return rows_ * cols_; }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double& operator[](int i) { return data_[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return data_[static_cast<std::size_t>(i)]; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool is_vector() const { return cols_ == 1; }

    void fill(double v) {
        for (auto& x : data_) x = v;
    }
    bool all_finite() const;
    double max_abs() const;

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

std::string shape_string(const Matrix& m);

// Plain (untaped) helpers used by inference paths and tests.
Matrix matvec(const Matrix& w, const Matrix& x);
Matrix affine(const Matrix& w, const Matrix& x, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix map_sigm(const Matrix& a);
Matrix map_tanh(const Matrix& a);
Matrix softmax(const Matrix& v); // max-shifted, column vector in/out
int argmax(const Matrix& v);

} // namespace scrawl::num
