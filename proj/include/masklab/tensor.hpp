#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "masklab/error.hpp"
#include "masklab/rng.hpp"

namespace masklab {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);

// Dense N-dimensional array of doubles, row-major, contiguous. Values are
// immutable once a tensor is handed out by an operation; copies are cheap
// enough at the sizes this project works with.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape);               // zero-filled
    Tensor(Shape shape, double fill);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor identity(std::size_t n);
    static Tensor row_vector(std::vector<double> values);          // shape {n}
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& operator()(std::size_t i, std::size_t j) {
        return data_[i * shape_[1] + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        return data_[i * shape_[1] + j];
    }
    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    std::string shape_str() const { return masklab::shape_str(shape_); }

private:
    Shape shape_;
    std::vector<double> data_;
};

// --- linear algebra ---------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// Per-sample masked product. mask is either node-granular (B x Din), where
// row k of the output is (x_k * mask_k) . w, or connection-granular
// (B x Din x Dout), where row k is x_k . (w * mask_k). The mask is applied
// to the input term first in both paths so that a connection mask that is
// constant along Dout is bit-identical to the node mask it collapses to.
Tensor batched_masked_matmul(const Tensor& x, const Tensor& w, const Tensor& mask);

// --- elementwise ------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);   // throws DomainError on zero divisor
Tensor add(const Tensor& a, double s);
Tensor sub(const Tensor& a, double s);
Tensor mul(const Tensor& a, double s);
Tensor div(const Tensor& a, double s);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);                    // throws DomainError on overflow
Tensor log(const Tensor& a);                    // throws DomainError on x <= 0
Tensor greater(const Tensor& a, const Tensor& b);  // 0/1 indicator
Tensor greater(const Tensor& a, double s);

double sum(const Tensor& a);
double mean(const Tensor& a);
bool all_finite(const Tensor& a);

// --- random draws -----------------------------------------------------------

// Deterministic given the stream state; each advances the counter by exactly
// one per element.
Tensor draw_uniform(RngStream& stream, const Shape& shape);
Tensor draw_normal(RngStream& stream, double mean, double stddev, const Shape& shape);

} // namespace masklab
