#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace p2bench::ad {

// Dense real matrix, row-major. Everything the tape touches is rank 2;
// scalars are 1x1 and vectors are explicit 1xn or nx1.
struct Tensor {
    std::vector<std::size_t> shape;  // {rows, cols}
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
        : shape{rows, cols}, data(rows * cols, fill) {}

    static Tensor scalar(double v) {
        Tensor t(1, 1);
        t.data[0] = v;
        return t;
    }
    static Tensor row(std::vector<double> v) {
        Tensor t;
        t.shape = {1, v.size()};
        t.data = std::move(v);
        return t;
    }
    static Tensor col(std::vector<double> v) {
        Tensor t;
        t.shape = {v.size(), 1};
        t.data = std::move(v);
        return t;
    }
    static Tensor zeros_like(const Tensor& o) {
        Tensor t;
        t.shape = o.shape;
        t.data.assign(o.data.size(), 0.0);
        return t;
    }

    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? 0 : shape[1]; }
    std::size_t size() const { return data.size(); }

    double& at(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    void require_shape(std::size_t r, std::size_t c, const std::string& what) const {
        if (rows() != r || cols() != c)
            throw std::invalid_argument(what + ": expected " + std::to_string(r) + "x" +
                                        std::to_string(c) + ", got " + std::to_string(rows()) +
                                        "x" + std::to_string(cols()));
    }
};

}  // namespace p2bench::ad
