#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace svs {

using Shape = std::vector<int64_t>;

int64_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};
struct AutodiffError : std::runtime_error {
  explicit AutodiffError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Node;

/// Dense row-major double tensor participating in a reverse-mode graph.
/// Copies are shallow; a Tensor is a handle to a shared graph node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor leaf(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double v);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double v);
  static Tensor randn(Shape shape, std::mt19937_64& rng, double stddev = 1.0,
                      bool requires_grad = false);

  bool defined() const { return n_ != nullptr; }
  const Shape& shape() const;
  int64_t size() const;
  int64_t dim(int i) const;
  const std::vector<double>& data() const;
  /// Leaf-only mutable access (optimizer updates). Throws on non-leaf nodes.
  std::vector<double>& mutable_data();
  bool requires_grad() const;
  double item() const;

  /// Value copy severed from the graph (constant, requires_grad=false).
  Tensor detach() const;

  Node* node() const { return n_.get(); }

  explicit Tensor(std::shared_ptr<Node> n) : n_(std::move(n)) {}

 private:
  std::shared_ptr<Node> n_;
};

/// One recorded primitive. backward maps the upstream gradient to per-parent
/// gradients, itself built from primitives so gradients stay differentiable.
struct Node : std::enable_shared_from_this<Node> {
  uint64_t id = 0;
  std::string op;
  Shape shape;
  std::vector<double> data;
  bool requires_grad = false;
  std::vector<Tensor> parents;
  std::function<std::vector<Tensor>(const Tensor& self, const Tensor& grad)> backward;
  bool backward_root_used = false;
};

/// Gradients keyed by graph node, produced by one backward sweep.
class GradMap {
 public:
  bool contains(const Tensor& t) const { return g_.count(t.node()) > 0; }
  const Tensor& at(const Tensor& t) const;
  void set(const Node* n, Tensor grad) { g_[n] = std::move(grad); }
  Tensor* find(const Node* n) {
    auto it = g_.find(n);
    return it == g_.end() ? nullptr : &it->second;
  }

 private:
  std::unordered_map<const Node*, Tensor> g_;
};

/// Reverse-mode sweep from a scalar loss. Each reachable node that requires
/// grad is visited exactly once; gradient tensors are graph nodes themselves,
/// so a scalar function of a gradient can be backwarded again.
/// A given loss node may be used as a backward root only once.
GradMap backward(const Tensor& loss);

/// Gradient of `out` with respect to `wrt` (must be reachable), graph retained.
Tensor grad(const Tensor& out, const Tensor& wrt);

namespace detail {
Tensor make_node(std::string op, Shape shape, std::vector<double> data,
                 std::vector<Tensor> parents,
                 std::function<std::vector<Tensor>(const Tensor&, const Tensor&)> backward);
void check_finite(const Tensor& t, const std::string& op);
}  // namespace detail

}  // namespace svs
