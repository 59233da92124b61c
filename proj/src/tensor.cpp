#include "masklab/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace masklab {

namespace {

std::size_t shape_product(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) {
        if (d == 0)
            throw ShapeError("tensor dimensions must be positive, got " + shape_str(s));
        n *= d;
    }
    return n;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() +
                         " vs " + b.shape_str());
}

template <typename F>
Tensor map2(const Tensor& a, const Tensor& b, const char* op, F f) {
    require_same_shape(a, b, op);
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
    return out;
}

template <typename F>
Tensor map1(const Tensor& a, F f) {
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
    return out;
}

} // namespace

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << "x";
        os << s[i];
    }
    os << ")";
    return os.str();
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_product(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_product(shape_) != data_.size())
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str());
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
}

Tensor Tensor::row_vector(std::vector<double> values) {
    const std::size_t n = values.size();
    return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return Tensor({rows, cols}, std::move(values));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2)
        throw ShapeError("matmul: expected rank-2 operands, got " + a.shape_str() +
                         " and " + b.shape_str());
    if (a.dim(1) != b.dim(0))
        throw ShapeError("matmul: inner dimensions disagree, " + a.shape_str() +
                         " vs " + b.shape_str());
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t l = 0; l < k; ++l) {
            const double ail = a(i, l);
            if (ail == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) out(i, j) += ail * b(l, j);
        }
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    if (a.rank() != 2)
        throw ShapeError("transpose: expected rank-2 operand, got " + a.shape_str());
    Tensor out({a.dim(1), a.dim(0)});
    for (std::size_t i = 0; i < a.dim(0); ++i)
        for (std::size_t j = 0; j < a.dim(1); ++j) out(j, i) = a(i, j);
    return out;
}

Tensor batched_masked_matmul(const Tensor& x, const Tensor& w, const Tensor& mask) {
    if (x.rank() != 2 || w.rank() != 2)
        throw ShapeError("batched_masked_matmul: x and w must be rank-2, got " +
                         x.shape_str() + " and " + w.shape_str());
    const std::size_t batch = x.dim(0), din = x.dim(1);
    if (w.dim(0) != din)
        throw ShapeError("batched_masked_matmul: x " + x.shape_str() +
                         " incompatible with w " + w.shape_str());
    const std::size_t dout = w.dim(1);

    const bool node_mask = mask.rank() == 2;
    if (node_mask) {
        if (mask.dim(0) != batch || mask.dim(1) != din)
            throw ShapeError("batched_masked_matmul: node mask " + mask.shape_str() +
                             " does not match input " + x.shape_str());
    } else if (mask.rank() == 3) {
        if (mask.dim(0) != batch || mask.dim(1) != din || mask.dim(2) != dout)
            throw ShapeError("batched_masked_matmul: connection mask " + mask.shape_str() +
                             " does not match " + x.shape_str() + " . " + w.shape_str());
    } else {
        throw ShapeError("batched_masked_matmul: mask must be rank 2 or 3, got " +
                         mask.shape_str());
    }

    Tensor out({batch, dout});
    if (node_mask) {
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t i = 0; i < din; ++i) {
                const double xi = x(b, i) * mask(b, i);
                if (xi == 0.0) continue;
                for (std::size_t j = 0; j < dout; ++j) out(b, j) += xi * w(i, j);
            }
    } else {
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t i = 0; i < din; ++i) {
                const double xi = x(b, i);
                for (std::size_t j = 0; j < dout; ++j)
                    out(b, j) += (xi * mask(b, i, j)) * w(i, j);
            }
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    return map2(a, b, "add", [](double x, double y) { return x + y; });
}
Tensor sub(const Tensor& a, const Tensor& b) {
    return map2(a, b, "sub", [](double x, double y) { return x - y; });
}
Tensor mul(const Tensor& a, const Tensor& b) {
    return map2(a, b, "mul", [](double x, double y) { return x * y; });
}
Tensor div(const Tensor& a, const Tensor& b) {
    return map2(a, b, "div", [](double x, double y) {
        if (y == 0.0) throw DomainError("div: division by zero");
        return x / y;
    });
}

Tensor add(const Tensor& a, double s) { return map1(a, [s](double x) { return x + s; }); }
Tensor sub(const Tensor& a, double s) { return map1(a, [s](double x) { return x - s; }); }
Tensor mul(const Tensor& a, double s) { return map1(a, [s](double x) { return x * s; }); }
Tensor div(const Tensor& a, double s) {
    if (s == 0.0) throw DomainError("div: division by zero scalar");
    return map1(a, [s](double x) { return x / s; });
}

Tensor relu(const Tensor& a) {
    return map1(a, [](double x) { return x > 0.0 ? x : 0.0; });
}

Tensor exp(const Tensor& a) {
    return map1(a, [](double x) {
        const double y = std::exp(x);
        if (!std::isfinite(y))
            throw DomainError("exp: overflow at input " + std::to_string(x));
        return y;
    });
}

Tensor log(const Tensor& a) {
    return map1(a, [](double x) {
        if (x <= 0.0)
            throw DomainError("log: non-positive input " + std::to_string(x));
        return std::log(x);
    });
}

Tensor greater(const Tensor& a, const Tensor& b) {
    return map2(a, b, "greater", [](double x, double y) { return x > y ? 1.0 : 0.0; });
}
Tensor greater(const Tensor& a, double s) {
    return map1(a, [s](double x) { return x > s ? 1.0 : 0.0; });
}

double sum(const Tensor& a) {
    return std::accumulate(a.values().begin(), a.values().end(), 0.0);
}

double mean(const Tensor& a) {
    if (a.size() == 0) throw ContractError("mean of empty tensor");
    return sum(a) / static_cast<double>(a.size());
}

bool all_finite(const Tensor& a) {
    for (double v : a.values())
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor draw_uniform(RngStream& stream, const Shape& shape) {
    Tensor out(shape);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = stream.next_uniform();
    return out;
}

Tensor draw_normal(RngStream& stream, double mean, double stddev, const Shape& shape) {
    if (stddev < 0.0)
        throw DomainError("draw_normal: negative stddev " + std::to_string(stddev));
    Tensor out(shape);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = stream.next_normal(mean, stddev);
    return out;
}

} // namespace masklab
