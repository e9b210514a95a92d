#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "aopath/tensor.hpp"

namespace aopath {

namespace detail {
struct Node;
}

// Handle to a node on the dynamic tape. Leaves are created with
// Var::leaf / Var::constant; every op builds a fresh node holding its
// backward closure. The graph is rebuilt per example and discarded.
class Var {
  public:
    Var() = default;

    static Var leaf(Tensor value, bool requires_grad);
    static Var constant(Tensor value) { return leaf(std::move(value), false); }

    const Tensor& value() const;
    Tensor& mutable_value();  // for optimizer updates on leaves

    bool requires_grad() const;
    bool has_grad() const;  // grad allocated (i.e. touched by a backward pass)
    Tensor& grad();         // allocates zeroed storage on first use
    const Tensor& grad() const;
    void zero_grad();       // drops grad storage

    // Reverse pass from this scalar node; seeds d(this)/d(this) = 1.
    void backward() const;

    bool valid() const { return node_ != nullptr; }

    std::size_t size() const { return value().size(); }

  private:
    friend Var make_op(Tensor, std::vector<Var>, std::function<void(detail::Node&)>);
    friend detail::Node& unwrap(const Var&);
    std::shared_ptr<detail::Node> node_;
};

// --- op set (exactly what the model needs) ---

// y = W x + b, W: [out x in], x: [in], b: [out]
Var affine(const Var& x, const Var& W, const Var& b);
Var add(const Var& a, const Var& b);            // elementwise, same shape
Var mul(const Var& a, const Var& b);            // elementwise, same shape
Var scale(const Var& x, double c);
Var sigmoid(const Var& x);
Var tanh_op(const Var& x);
Var slice(const Var& x, std::size_t begin, std::size_t len);
Var concat(const Var& a, const Var& b);
Var concat(std::span<const Var> parts);
Var sum(const Var& x);                          // -> scalar {1}
// a.b / (|a||b|); zero-norm input -> 0 with zero gradient
Var cosine_similarity(const Var& a, const Var& b);
// -log softmax(logits)[gold]; gradient is softmax - onehot(gold)
Var softmax_cross_entropy(const Var& logits, std::size_t gold);

}  // namespace aopath
