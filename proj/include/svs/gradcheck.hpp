#pragma once

#include <functional>
#include <string>
#include <vector>

#include "svs/tensor.hpp"

namespace svs {

struct GradcheckResult {
  std::string name;
  double max_rel_err = 0.0;
  bool passed = false;
};

/// Central finite differences on every requires_grad input of `fn`,
/// compared against reverse-mode gradients of the scalar fn(inputs).
/// Relative error is |ad - fd| / max(1, |ad|, |fd|), reduced by max.
GradcheckResult gradcheck(const std::string& name,
                          const std::function<Tensor(const std::vector<Tensor>&)>& fn,
                          std::vector<Tensor> inputs, double tol = 1e-4, double step = 1e-5);

/// The built-in primitive suite (randomized small shapes, fixed seed).
/// `filter` empty = run everything; otherwise run checks whose name contains it.
std::vector<GradcheckResult> gradcheck_primitives(const std::string& filter = "", uint64_t seed = 7);

/// Double-backprop check of the gradient-penalty expression
/// (||d D/d x||_2 - 1)^2 for a small two-layer tanh critic, differentiated
/// with respect to the critic weights and compared to finite differences.
GradcheckResult gradcheck_gradient_penalty(uint64_t seed = 7, double tol = 1e-3);

}  // namespace svs
