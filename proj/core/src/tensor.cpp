#include "lte/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "lte/error.hpp"

namespace lte {

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace memory {
namespace {
std::atomic<std::int64_t> g_current{0};
std::atomic<std::int64_t> g_peak{0};
}  // namespace

void on_allocate(std::size_t bytes) noexcept {
  const auto now = g_current.fetch_add(static_cast<std::int64_t>(bytes)) + static_cast<std::int64_t>(bytes);
  auto peak = g_peak.load();
  while (now > peak && !g_peak.compare_exchange_weak(peak, now)) {
  }
}

void on_release(std::size_t bytes) noexcept { g_current.fetch_sub(static_cast<std::int64_t>(bytes)); }

std::int64_t current_bytes() noexcept { return g_current.load(); }
std::int64_t peak_bytes() noexcept { return g_peak.load(); }
void reset_peak() noexcept { g_peak.store(g_current.load()); }

}  // namespace memory

namespace detail {

float* TensorImpl::grad_buffer() {
  if (grad.empty()) grad.assign(data.size(), 0.0f);
  return grad.data();
}

}  // namespace detail

namespace {

thread_local bool t_grad_enabled = true;

std::shared_ptr<detail::TensorImpl> make_impl(Shape shape, bool requires_grad) {
  for (auto d : shape) {
    if (d < 1) throw InvalidArgument("tensor dimensions must be positive, got " + shape_str(shape));
  }
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->data.assign(static_cast<std::size_t>(shape_numel(shape)), 0.0f);
  impl->shape = std::move(shape);
  impl->requires_grad = requires_grad;
  return impl;
}

}  // namespace

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return Tensor(make_impl(std::move(shape), requires_grad)); }

Tensor Tensor::full(Shape shape, float value, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::fill(t.impl_->data.begin(), t.impl_->data.end(), value);
  return t;
}

Tensor Tensor::from_vector(Shape shape, std::span<const float> values, bool requires_grad) {
  if (shape_numel(shape) != static_cast<std::int64_t>(values.size())) {
    throw InvalidArgument("from_vector: " + std::to_string(values.size()) + " values do not fill shape " +
                          shape_str(shape));
  }
  Tensor t = zeros(std::move(shape), requires_grad);
  std::copy(values.begin(), values.end(), t.impl_->data.begin());
  return t;
}

Tensor Tensor::scalar(float value, bool requires_grad) {
  Tensor t = zeros({}, requires_grad);
  t.impl_->data[0] = value;
  return t;
}

std::int64_t Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) throw InvalidArgument("axis out of range for shape " + shape_str(shape()));
  return impl_->shape[static_cast<std::size_t>(axis)];
}

float Tensor::item() const {
  if (numel() != 1) throw InvalidArgument("item() on tensor of shape " + shape_str(shape()));
  return impl_->data[0];
}

void Tensor::set_requires_grad(bool value) {
  if (!is_leaf()) throw GraphError("requires_grad can only be changed on leaf tensors");
  impl_->requires_grad = value;
}

std::span<float> Tensor::mutable_grad() {
  float* g = impl_->grad_buffer();
  return {g, impl_->grad.size()};
}

void Tensor::zero_grad() {
  if (impl_) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0f);
}

Tensor Tensor::detach() const {
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = impl_->shape;
  impl->data = impl_->data;
  return Tensor(std::move(impl));
}

bool grad_enabled() noexcept { return t_grad_enabled; }

NoGradGuard::NoGradGuard() noexcept : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

void backward(const Tensor& loss) {
  if (!loss.defined()) throw InvalidArgument("backward on undefined tensor");
  auto root = loss.impl();
  if (root->data.size() != 1) {
    throw InvalidArgument("backward requires a scalar loss, got shape " + shape_str(root->shape));
  }
  if (root->backward_done) throw GraphError("backward already called on this loss; graph was released");
  if (!root->requires_grad) throw GraphError("loss does not require grad");

  // Post-order DFS yields a topological order with inputs before consumers.
  std::vector<detail::TensorImpl*> order;
  std::unordered_set<detail::TensorImpl*> seen;
  std::vector<std::pair<detail::TensorImpl*, std::size_t>> stack;
  stack.emplace_back(root.get(), 0);
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [impl, next] = stack.back();
    if (impl->graph_released) throw GraphError("backward through a released graph");
    const auto& node = impl->grad_fn;
    if (node && next < node->inputs.size()) {
      detail::TensorImpl* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
      continue;
    }
    order.push_back(impl);
    stack.pop_back();
  }

  root->grad_buffer()[0] += 1.0f;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::TensorImpl* impl = *it;
    if (!impl->grad_fn) continue;
    const std::span<const float> g(impl->grad_buffer(), impl->grad.size());
    impl->grad_fn->backward(g);
  }

  for (auto* impl : order) {
    if (impl->grad_fn) {
      impl->grad_fn.reset();
      impl->graph_released = true;
    }
  }
  root->backward_done = true;
}

}  // namespace lte
