#pragma once

// Tape internals shared by autodiff.cpp and the fused ops in lstm.cpp.
// Not installed; everything public goes through aopath/autodiff.hpp.

#include <functional>
#include <memory>
#include <vector>

#include "aopath/autodiff.hpp"

namespace aopath {

namespace detail {

struct Node {
    Tensor value;
    Tensor grad;  // empty until ensure_grad
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backprop;  // pulls this->grad into parents

    void ensure_grad() {
        if (grad.size() != value.size()) {
            grad = Tensor(value.shape, 0.0);
        }
    }
};

}  // namespace detail

Var make_op(Tensor value, std::vector<Var> parents, std::function<void(detail::Node&)> backprop);

}  // namespace aopath
