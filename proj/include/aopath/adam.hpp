#pragma once

#include <cstdint>
#include <vector>

#include "aopath/autodiff.hpp"

namespace aopath {

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction over a fixed list of leaf parameters.
// Moments are zero-initialized and shape-matched on construction.
class Adam {
  public:
    Adam(std::vector<Var> params, AdamConfig cfg = {});

    // One update; every parameter must carry a gradient from a backward
    // pass since the last step. Gradients are cleared afterward.
    void step();

    std::int64_t step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }

  private:
    std::vector<Var> params_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    AdamConfig cfg_;
    std::int64_t step_ = 0;
};

}  // namespace aopath
