#include "aopath/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "autodiff_internal.hpp"

namespace aopath {

using detail::Node;

Var Var::leaf(Tensor value, bool requires_grad) {
    Var v;
    v.node_ = std::make_shared<Node>();
    v.node_->value = std::move(value);
    v.node_->requires_grad = requires_grad;
    return v;
}

const Tensor& Var::value() const { return node_->value; }
Tensor& Var::mutable_value() { return node_->value; }
bool Var::requires_grad() const { return node_->requires_grad; }
bool Var::has_grad() const { return node_->grad.size() == node_->value.size() && node_->value.size() > 0; }

Tensor& Var::grad() {
    node_->ensure_grad();
    return node_->grad;
}

const Tensor& Var::grad() const {
    node_->ensure_grad();
    return node_->grad;
}

void Var::zero_grad() { node_->grad = Tensor(); }

Node& unwrap(const Var& v) { return *v.node_; }

Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backprop) {
    Var out;
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    for (const Var& p : parents) {
        node->requires_grad = node->requires_grad || p.node_->requires_grad;
        node->parents.push_back(p.node_);
    }
    if (node->requires_grad) node->backprop = std::move(backprop);
    out.node_ = std::move(node);
    return out;
}

void Var::backward() const {
    if (node_->value.size() != 1)
        throw DimensionError("backward: root must be a scalar");

    // iterative post-order topological sort
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
    seen.insert(node_.get());
    while (!stack.empty()) {
        auto& [n, i] = stack.back();
        if (i < n->parents.size()) {
            Node* p = n->parents[i++].get();
            if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    node_->ensure_grad();
    node_->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if ((*it)->backprop) (*it)->backprop(**it);
    }
}

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
    if (!a.value().same_shape(b.value()))
        throw DimensionError(std::string(op) + ": shape mismatch");
}

Node& parent(Node& n, std::size_t i) { return *n.parents[i]; }

}  // namespace

Var affine(const Var& x, const Var& W, const Var& b) {
    const Tensor& xv = x.value();
    const Tensor& Wv = W.value();
    const Tensor& bv = b.value();
    if (Wv.ndim() != 2 || xv.ndim() != 1 || bv.ndim() != 1 || Wv.dim(1) != xv.dim(0) ||
        Wv.dim(0) != bv.dim(0))
        throw DimensionError("affine: shapes do not conform");

    const std::size_t out = Wv.dim(0), in = Wv.dim(1);
    Tensor y({out});
    for (std::size_t r = 0; r < out; ++r) {
        const double* wr = &Wv.data[r * in];
        double acc = bv[r];
        for (std::size_t c = 0; c < in; ++c) acc += wr[c] * xv[c];
        y[r] = acc;
    }
    return make_op(std::move(y), {x, W, b}, [out, in](Node& n) {
        Node& xn = parent(n, 0);
        Node& Wn = parent(n, 1);
        Node& bn = parent(n, 2);
        const Tensor& gy = n.grad;
        if (Wn.requires_grad) {
            Wn.ensure_grad();
            for (std::size_t r = 0; r < out; ++r) {
                double g = gy[r];
                if (g == 0.0) continue;
                double* dst = &Wn.grad.data[r * in];
                const double* xv = xn.value.data.data();
                for (std::size_t c = 0; c < in; ++c) dst[c] += g * xv[c];
            }
        }
        if (bn.requires_grad) {
            bn.ensure_grad();
            for (std::size_t r = 0; r < out; ++r) bn.grad[r] += gy[r];
        }
        if (xn.requires_grad) {
            xn.ensure_grad();
            for (std::size_t r = 0; r < out; ++r) {
                double g = gy[r];
                if (g == 0.0) continue;
                const double* wr = &Wn.value.data[r * in];
                for (std::size_t c = 0; c < in; ++c) xn.grad[c] += g * wr[c];
            }
        }
    });
}

Var add(const Var& a, const Var& b) {
    require_same_shape(a, b, "add");
    Tensor y = a.value();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += b.value()[i];
    return make_op(std::move(y), {a, b}, [](Node& n) {
        for (int k = 0; k < 2; ++k) {
            Node& p = parent(n, k);
            if (!p.requires_grad) continue;
            p.ensure_grad();
            for (std::size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += n.grad[i];
        }
    });
}

Var mul(const Var& a, const Var& b) {
    require_same_shape(a, b, "mul");
    Tensor y = a.value();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= b.value()[i];
    return make_op(std::move(y), {a, b}, [](Node& n) {
        Node& an = parent(n, 0);
        Node& bn = parent(n, 1);
        if (an.requires_grad) {
            an.ensure_grad();
            for (std::size_t i = 0; i < n.grad.size(); ++i) an.grad[i] += n.grad[i] * bn.value[i];
        }
        if (bn.requires_grad) {
            bn.ensure_grad();
            for (std::size_t i = 0; i < n.grad.size(); ++i) bn.grad[i] += n.grad[i] * an.value[i];
        }
    });
}

Var scale(const Var& x, double c) {
    Tensor y = x.value();
    for (double& v : y.data) v *= c;
    return make_op(std::move(y), {x}, [c](Node& n) {
        Node& xn = parent(n, 0);
        if (!xn.requires_grad) return;
        xn.ensure_grad();
        for (std::size_t i = 0; i < n.grad.size(); ++i) xn.grad[i] += c * n.grad[i];
    });
}

Var sigmoid(const Var& x) {
    Tensor y = x.value();
    for (double& v : y.data) v = 1.0 / (1.0 + std::exp(-v));
    return make_op(std::move(y), {x}, [](Node& n) {
        Node& xn = parent(n, 0);
        if (!xn.requires_grad) return;
        xn.ensure_grad();
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
            double s = n.value[i];
            xn.grad[i] += n.grad[i] * s * (1.0 - s);
        }
    });
}

Var tanh_op(const Var& x) {
    Tensor y = x.value();
    for (double& v : y.data) v = std::tanh(v);
    return make_op(std::move(y), {x}, [](Node& n) {
        Node& xn = parent(n, 0);
        if (!xn.requires_grad) return;
        xn.ensure_grad();
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
            double t = n.value[i];
            xn.grad[i] += n.grad[i] * (1.0 - t * t);
        }
    });
}

Var slice(const Var& x, std::size_t begin, std::size_t len) {
    const Tensor& xv = x.value();
    if (xv.ndim() != 1 || begin + len > xv.dim(0))
        throw DimensionError("slice: out of range");
    Tensor y({len});
    std::copy_n(xv.data.begin() + begin, len, y.data.begin());
    return make_op(std::move(y), {x}, [begin, len](Node& n) {
        Node& xn = parent(n, 0);
        if (!xn.requires_grad) return;
        xn.ensure_grad();
        for (std::size_t i = 0; i < len; ++i) xn.grad[begin + i] += n.grad[i];
    });
}

Var concat(const Var& a, const Var& b) {
    const std::array<Var, 2> parts{a, b};
    return concat(std::span<const Var>(parts));
}

Var concat(std::span<const Var> parts) {
    if (parts.empty()) throw DimensionError("concat: no inputs");
    std::size_t total = 0;
    for (const Var& p : parts) {
        if (p.value().ndim() != 1) throw DimensionError("concat: 1-D inputs only");
        total += p.value().dim(0);
    }
    Tensor y({total});
    std::size_t off = 0;
    for (const Var& p : parts) {
        std::copy(p.value().data.begin(), p.value().data.end(), y.data.begin() + off);
        off += p.value().size();
    }
    std::vector<Var> ps(parts.begin(), parts.end());
    return make_op(std::move(y), std::move(ps), [](Node& n) {
        std::size_t off = 0;
        for (auto& pp : n.parents) {
            Node& p = *pp;
            std::size_t len = p.value.size();
            if (p.requires_grad) {
                p.ensure_grad();
                for (std::size_t i = 0; i < len; ++i) p.grad[i] += n.grad[off + i];
            }
            off += len;
        }
    });
}

Var sum(const Var& x) {
    double s = 0.0;
    for (double v : x.value().data) s += v;
    return make_op(Tensor::scalar_of(s), {x}, [](Node& n) {
        Node& xn = parent(n, 0);
        if (!xn.requires_grad) return;
        xn.ensure_grad();
        for (double& g : xn.grad.data) g += n.grad[0];
    });
}

double cosine_similarity_value(const Tensor& a, const Tensor& b) {
    double na = norm(a), nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

Var cosine_similarity(const Var& a, const Var& b) {
    require_same_shape(a, b, "cosine_similarity");
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    const double na = norm(av), nb = norm(bv);
    const bool degenerate = (na == 0.0 || nb == 0.0);
    const double cos = degenerate ? 0.0 : dot(av, bv) / (na * nb);
    return make_op(Tensor::scalar_of(cos), {a, b}, [na, nb, cos, degenerate](Node& n) {
        if (degenerate) return;  // defined as 0 with zero gradient
        Node& an = parent(n, 0);
        Node& bn = parent(n, 1);
        const double g = n.grad[0];
        // d cos / da = b/(|a||b|) - cos * a/|a|^2, symmetric for b
        if (an.requires_grad) {
            an.ensure_grad();
            for (std::size_t i = 0; i < an.value.size(); ++i)
                an.grad[i] += g * (bn.value[i] / (na * nb) - cos * an.value[i] / (na * na));
        }
        if (bn.requires_grad) {
            bn.ensure_grad();
            for (std::size_t i = 0; i < bn.value.size(); ++i)
                bn.grad[i] += g * (an.value[i] / (na * nb) - cos * bn.value[i] / (nb * nb));
        }
    });
}

Var softmax_cross_entropy(const Var& logits, std::size_t gold) {
    const Tensor& lv = logits.value();
    if (lv.ndim() != 1) throw DimensionError("softmax_cross_entropy: logits must be 1-D");
    if (gold >= lv.dim(0))
        throw DataError("softmax_cross_entropy: gold index " + std::to_string(gold) +
                        " out of range for " + std::to_string(lv.dim(0)) + " classes");

    const double mx = *std::max_element(lv.data.begin(), lv.data.end());
    double z = 0.0;
    for (double v : lv.data) z += std::exp(v - mx);
    const double loss = std::log(z) - (lv[gold] - mx);

    std::vector<double> soft(lv.size());
    for (std::size_t i = 0; i < lv.size(); ++i) soft[i] = std::exp(lv[i] - mx) / z;

    return make_op(Tensor::scalar_of(loss), {logits}, [soft = std::move(soft), gold](Node& n) {
        Node& ln = parent(n, 0);
        if (!ln.requires_grad) return;
        ln.ensure_grad();
        const double g = n.grad[0];
        for (std::size_t i = 0; i < soft.size(); ++i)
            ln.grad[i] += g * (soft[i] - (i == gold ? 1.0 : 0.0));
    });
}

}  // namespace aopath
