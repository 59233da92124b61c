#include "masklab/autodiff.hpp"

#include <cmath>

namespace masklab {

namespace {
constexpr double kProbClip = 1e-12;
} // namespace

Tape::NodeId Tape::push(Tensor value, std::vector<NodeId> parents,
                        std::function<void(Tape&, const Node&)> back) {
    Node n;
    n.value = std::move(value);
    n.parents = std::move(parents);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
}

void Tape::accumulate(NodeId id, const Tensor& g) {
    Node& n = nodes_[id];
    if (!n.touched) {
        n.grad = Tensor(n.value.shape());
        n.touched = true;
    }
    for (std::size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
}

Tape::NodeId Tape::input(Tensor value) {
    NodeId id = push(std::move(value), {}, nullptr);
    nodes_[id].is_leaf = true;
    return id;
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
    Tensor y = masklab::matmul(value(a), value(b));
    return push(std::move(y), {a, b}, [a, b](Tape& t, const Node& n) {
        t.accumulate(a, masklab::matmul(n.grad, transpose(t.value(b))));
        t.accumulate(b, masklab::matmul(transpose(t.value(a)), n.grad));
    });
}

Tape::NodeId Tape::masked_matmul(NodeId x, NodeId w, Tensor mask) {
    Tensor y = batched_masked_matmul(value(x), value(w), mask);
    auto back = [x, w, m = std::move(mask)](Tape& t, const Node& n) {
        const Tensor& xv = t.value(x);
        const Tensor& wv = t.value(w);
        const Tensor& gy = n.grad;
        const std::size_t batch = xv.dim(0), din = xv.dim(1), dout = wv.dim(1);
        Tensor gx(xv.shape());
        Tensor gw(wv.shape());
        if (m.rank() == 2) {
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t i = 0; i < din; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < dout; ++j) {
                        acc += gy(b, j) * wv(i, j);
                        gw(i, j) += xv(b, i) * m(b, i) * gy(b, j);
                    }
                    gx(b, i) = acc * m(b, i);
                }
        } else {
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t i = 0; i < din; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < dout; ++j) {
                        acc += gy(b, j) * m(b, i, j) * wv(i, j);
                        gw(i, j) += xv(b, i) * m(b, i, j) * gy(b, j);
                    }
                    gx(b, i) = acc;
                }
        }
        t.accumulate(x, gx);
        t.accumulate(w, gw);
    };
    return push(std::move(y), {x, w}, std::move(back));
}

Tape::NodeId Tape::weight_masked_matmul(NodeId x, NodeId w, Tensor mask) {
    if (!value(w).same_shape(mask))
        throw ShapeError("weight_masked_matmul: mask " + mask.shape_str() +
                         " does not match weights " + value(w).shape_str());
    Tensor wm = masklab::mul(value(w), mask);
    Tensor y = masklab::matmul(value(x), wm);
    auto back = [x, w, m = std::move(mask)](Tape& t, const Node& n) {
        Tensor wm2 = masklab::mul(t.value(w), m);
        t.accumulate(x, masklab::matmul(n.grad, transpose(wm2)));
        Tensor gw = masklab::matmul(transpose(t.value(x)), n.grad);
        t.accumulate(w, masklab::mul(gw, m));
    };
    return push(std::move(y), {x, w}, std::move(back));
}

Tape::NodeId Tape::add_bias(NodeId x, NodeId bias) {
    const Tensor& xv = value(x);
    const Tensor& bv = value(bias);
    if (xv.rank() != 2 || bv.rank() != 1 || bv.dim(0) != xv.dim(1))
        throw ShapeError("add_bias: " + xv.shape_str() + " + " + bv.shape_str());
    Tensor y = xv;
    for (std::size_t i = 0; i < xv.dim(0); ++i)
        for (std::size_t j = 0; j < xv.dim(1); ++j) y(i, j) += bv[j];
    return push(std::move(y), {x, bias}, [x, bias](Tape& t, const Node& n) {
        t.accumulate(x, n.grad);
        Tensor gb({n.grad.dim(1)});
        for (std::size_t i = 0; i < n.grad.dim(0); ++i)
            for (std::size_t j = 0; j < n.grad.dim(1); ++j) gb[j] += n.grad(i, j);
        t.accumulate(bias, gb);
    });
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
    Tensor y = masklab::add(value(a), value(b));
    return push(std::move(y), {a, b}, [a, b](Tape& t, const Node& n) {
        t.accumulate(a, n.grad);
        t.accumulate(b, n.grad);
    });
}

Tape::NodeId Tape::mul(NodeId a, NodeId b) {
    Tensor y = masklab::mul(value(a), value(b));
    return push(std::move(y), {a, b}, [a, b](Tape& t, const Node& n) {
        t.accumulate(a, masklab::mul(n.grad, t.value(b)));
        t.accumulate(b, masklab::mul(n.grad, t.value(a)));
    });
}

Tape::NodeId Tape::mul_const(NodeId a, Tensor c) {
    Tensor y = masklab::mul(value(a), c);
    return push(std::move(y), {a}, [a, c = std::move(c)](Tape& t, const Node& n) {
        t.accumulate(a, masklab::mul(n.grad, c));
    });
}

Tape::NodeId Tape::scale(NodeId a, double s) {
    Tensor y = masklab::mul(value(a), s);
    return push(std::move(y), {a}, [a, s](Tape& t, const Node& n) {
        t.accumulate(a, masklab::mul(n.grad, s));
    });
}

Tape::NodeId Tape::relu(NodeId a) {
    Tensor y = masklab::relu(value(a));
    // Subgradient at 0 is 0.
    return push(std::move(y), {a}, [a](Tape& t, const Node& n) {
        Tensor g(n.grad.shape());
        const Tensor& av = t.value(a);
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] = av[i] > 0.0 ? n.grad[i] : 0.0;
        t.accumulate(a, g);
    });
}

Tape::NodeId Tape::softmax_rows(NodeId a) {
    const Tensor& av = value(a);
    if (av.rank() != 2)
        throw ShapeError("softmax_rows: expected rank-2 logits, got " + av.shape_str());
    Tensor y(av.shape());
    for (std::size_t i = 0; i < av.dim(0); ++i) {
        double mx = av(i, 0);
        for (std::size_t j = 1; j < av.dim(1); ++j) mx = std::max(mx, av(i, j));
        double z = 0.0;
        for (std::size_t j = 0; j < av.dim(1); ++j) {
            y(i, j) = std::exp(av(i, j) - mx);
            z += y(i, j);
        }
        for (std::size_t j = 0; j < av.dim(1); ++j) y(i, j) /= z;
    }
    return push(std::move(y), {a}, [a](Tape& t, const Node& n) {
        const Tensor& p = n.value;
        Tensor g(p.shape());
        for (std::size_t i = 0; i < p.dim(0); ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < p.dim(1); ++j) dot += n.grad(i, j) * p(i, j);
            for (std::size_t j = 0; j < p.dim(1); ++j)
                g(i, j) = p(i, j) * (n.grad(i, j) - dot);
        }
        t.accumulate(a, g);
    });
}

Tape::NodeId Tape::sigmoid(NodeId a) {
    const Tensor& av = value(a);
    Tensor y(av.shape());
    for (std::size_t i = 0; i < av.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-av[i]));
    return push(std::move(y), {a}, [a](Tape& t, const Node& n) {
        Tensor g(n.value.shape());
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] = n.grad[i] * n.value[i] * (1.0 - n.value[i]);
        t.accumulate(a, g);
    });
}

Tape::NodeId Tape::sum(NodeId a) {
    Tensor y({1}, masklab::sum(value(a)));
    return push(std::move(y), {a}, [a](Tape& t, const Node& n) {
        t.accumulate(a, Tensor(t.value(a).shape(), n.grad[0]));
    });
}

double cross_entropy_value(const Tensor& probs, const Tensor& targets, LossKind kind) {
    if (!probs.same_shape(targets))
        throw ShapeError("cross_entropy: predictions " + probs.shape_str() +
                         " vs targets " + targets.shape_str());
    if (probs.rank() != 2)
        throw ShapeError("cross_entropy: expected rank-2 predictions, got " +
                         probs.shape_str());
    const double denom = kind == LossKind::CategoricalCE
                             ? static_cast<double>(probs.dim(0))
                             : static_cast<double>(probs.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double t = targets[i];
        if (kind == LossKind::CategoricalCE) {
            loss -= t * std::log(std::max(probs[i], kProbClip));
        } else {
            loss -= t * std::log(std::max(probs[i], kProbClip)) +
                    (1.0 - t) * std::log(std::max(1.0 - probs[i], kProbClip));
        }
    }
    return loss / denom;
}

Tape::NodeId Tape::cross_entropy(NodeId probs, Tensor targets, LossKind kind) {
    const Tensor& p = value(probs);
    Tensor y({1}, cross_entropy_value(p, targets, kind));
    const double denom = kind == LossKind::CategoricalCE
                             ? static_cast<double>(p.dim(0))
                             : static_cast<double>(p.size());
    auto back = [probs, tg = std::move(targets), kind, denom](Tape& t, const Node& n) {
        const Tensor& pv = t.value(probs);
        Tensor g(pv.shape());
        const double scale = n.grad[0] / denom;
        for (std::size_t i = 0; i < pv.size(); ++i) {
            double d = 0.0;
            if (pv[i] > kProbClip) d -= tg[i] / pv[i];
            if (kind == LossKind::BinaryCE && 1.0 - pv[i] > kProbClip)
                d += (1.0 - tg[i]) / (1.0 - pv[i]);
            g[i] = scale * d;
        }
        t.accumulate(probs, g);
    };
    return push(std::move(y), {probs}, std::move(back));
}

std::unordered_map<Tape::NodeId, Tensor> Tape::backward(NodeId root) {
    if (value(root).size() != 1)
        throw ContractError("backward: root must be scalar, got shape " +
                            value(root).shape_str());
    for (Node& n : nodes_) {
        n.touched = false;
        n.grad = Tensor();
    }
    accumulate(root, Tensor(value(root).shape(), 1.0));
    for (std::size_t i = root + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.touched && n.back) n.back(*this, n);
    }
    std::unordered_map<NodeId, Tensor> grads;
    for (std::size_t i = 0; i <= root; ++i) {
        Node& n = nodes_[i];
        if (!n.is_leaf) continue;
        grads[i] = n.touched ? n.grad : Tensor(n.value.shape());
    }
    return grads;
}

Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f,
                        const Tensor& at, double eps) {
    if (eps <= 0.0)
        throw DomainError("finite_diff_grad: eps must be positive");
    Tensor x = at;
    Tensor g(at.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + eps;
        const double fp = f(x);
        x[i] = orig - eps;
        const double fm = f(x);
        x[i] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw DomainError("finite_diff_grad: function returned non-finite value");
        g[i] = (fp - fm) / (2.0 * eps);
    }
    return g;
}

Tensor hessian_diag(const std::function<double(const Tensor&)>& f,
                    const Tensor& at, double eps) {
    if (eps <= 0.0)
        throw DomainError("hessian_diag: eps must be positive");
    Tensor x = at;
    Tensor h(at.shape());
    const double f0 = f(x);
    if (!std::isfinite(f0))
        throw DomainError("hessian_diag: function returned non-finite value");
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + eps;
        const double fp = f(x);
        x[i] = orig - eps;
        const double fm = f(x);
        x[i] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw DomainError("hessian_diag: function returned non-finite value");
        h[i] = (fp - 2.0 * f0 + fm) / (eps * eps);
    }
    return h;
}

} // namespace masklab
