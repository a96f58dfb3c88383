#include "svs/tensor.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

namespace svs {

namespace {
std::atomic<uint64_t> g_next_id{1};
}

int64_t numel(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << "]";
  return os.str();
}

Tensor Tensor::leaf(Shape shape, std::vector<double> data, bool requires_grad) {
  for (int64_t d : shape) {
    if (d <= 0) throw ShapeError("tensor: non-positive dimension in " + shape_str(shape));
  }
  if (static_cast<int64_t>(data.size()) != numel(shape)) {
    throw ShapeError("tensor: data length " + std::to_string(data.size()) +
                     " does not match shape " + shape_str(shape));
  }
  auto n = std::make_shared<Node>();
  n->id = g_next_id.fetch_add(1);
  n->op = "leaf";
  n->shape = std::move(shape);
  n->data = std::move(data);
  n->requires_grad = requires_grad;
  Tensor t(std::move(n));
  detail::check_finite(t, "leaf");
  return t;
}

Tensor Tensor::scalar(double v) { return leaf({}, {v}); }

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<double> d(static_cast<size_t>(numel(shape)), 0.0);
  return leaf(std::move(shape), std::move(d), requires_grad);
}

Tensor Tensor::full(Shape shape, double v) {
  std::vector<double> d(static_cast<size_t>(numel(shape)), v);
  return leaf(std::move(shape), std::move(d));
}

Tensor Tensor::randn(Shape shape, std::mt19937_64& rng, double stddev, bool requires_grad) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> d(static_cast<size_t>(numel(shape)));
  for (double& x : d) x = dist(rng);
  return leaf(std::move(shape), std::move(d), requires_grad);
}

const Shape& Tensor::shape() const { return n_->shape; }
int64_t Tensor::size() const { return numel(n_->shape); }
int64_t Tensor::dim(int i) const { return n_->shape.at(static_cast<size_t>(i)); }
const std::vector<double>& Tensor::data() const { return n_->data; }

std::vector<double>& Tensor::mutable_data() {
  if (n_->op != "leaf") {
    throw AutodiffError("mutable_data: tensor is not a leaf (op=" + n_->op + ")");
  }
  return n_->data;
}

bool Tensor::requires_grad() const { return n_->requires_grad; }

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item: tensor has " + std::to_string(size()) + " elements");
  return n_->data[0];
}

Tensor Tensor::detach() const { return leaf(n_->shape, n_->data, false); }

const Tensor& GradMap::at(const Tensor& t) const {
  auto it = g_.find(t.node());
  if (it == g_.end()) throw AutodiffError("GradMap: no gradient recorded for tensor");
  return it->second;
}

namespace detail {

Tensor make_node(std::string op, Shape shape, std::vector<double> data,
                 std::vector<Tensor> parents,
                 std::function<std::vector<Tensor>(const Tensor&, const Tensor&)> backward) {
  auto n = std::make_shared<Node>();
  n->id = g_next_id.fetch_add(1);
  n->op = std::move(op);
  n->shape = std::move(shape);
  n->data = std::move(data);
  bool rg = false;
  for (const Tensor& p : parents) rg = rg || p.requires_grad();
  n->requires_grad = rg;
  n->parents = std::move(parents);
  n->backward = std::move(backward);
  Tensor t(std::move(n));
  check_finite(t, t.node()->op);
  return t;
}

void check_finite(const Tensor& t, const std::string& op) {
  for (double v : t.data()) {
    if (!std::isfinite(v)) {
      throw NumericError("non-finite value produced by op '" + op + "'");
    }
  }
}

}  // namespace detail

namespace {

// Deterministic iterative post-order over the grad-requiring subgraph.
void topo_order(Node* root, std::vector<Node*>& order) {
  std::unordered_map<Node*, int> state;  // 0=unseen 1=open 2=done
  std::vector<std::pair<Node*, size_t>> stack;
  stack.push_back({root, 0});
  state[root] = 1;
  while (!stack.empty()) {
    auto& [n, i] = stack.back();
    if (i < n->parents.size()) {
      Node* p = n->parents[i++].node();
      if (!p->requires_grad) continue;
      int& s = state[p];
      if (s == 1) throw AutodiffError("backward: cycle detected in graph");
      if (s == 0) {
        s = 1;
        stack.push_back({p, 0});
      }
    } else {
      state[n] = 2;
      order.push_back(n);
      stack.pop_back();
    }
  }
}

Tensor accumulate(const Tensor& a, const Tensor& b);

}  // namespace

GradMap backward(const Tensor& loss) {
  if (!loss.defined()) throw AutodiffError("backward: undefined tensor");
  if (loss.size() != 1) {
    throw AutodiffError("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
  }
  Node* root = loss.node();
  if (!root->requires_grad) {
    throw AutodiffError("backward: loss does not require grad");
  }
  if (root->backward_root_used) {
    throw AutodiffError("backward: graph already backwarded from this loss; "
                        "rebuild the graph before calling backward again");
  }
  root->backward_root_used = true;

  std::vector<Node*> order;
  topo_order(root, order);

  GradMap grads;
  grads.set(root, Tensor::full(root->shape, 1.0));

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    Tensor* gp = grads.find(n);
    if (gp == nullptr || !n->backward) continue;
    Tensor self(n->shared_from_this());
    std::vector<Tensor> pgrads = n->backward(self, *gp);
    if (pgrads.size() != n->parents.size()) {
      throw AutodiffError("backward rule of '" + n->op + "' returned wrong arity");
    }
    for (size_t i = 0; i < pgrads.size(); ++i) {
      Node* p = n->parents[i].node();
      if (!p->requires_grad || !pgrads[i].defined()) continue;
      if (Tensor* acc = grads.find(p)) {
        grads.set(p, accumulate(*acc, pgrads[i]));
      } else {
        grads.set(p, pgrads[i]);
      }
    }
  }
  return grads;
}

}  // namespace svs

// accumulate() needs the add primitive; defined after ops to avoid a cycle.
#include "svs/ops.hpp"

namespace svs {
namespace {
Tensor accumulate(const Tensor& a, const Tensor& b) { return add(a, b); }
}  // namespace

Tensor grad(const Tensor& out, const Tensor& wrt) {
  GradMap g = backward(out);
  if (!g.contains(wrt)) {
    throw AutodiffError("grad: target tensor not reachable from output");
  }
  return g.at(wrt);
}

}  // namespace svs
