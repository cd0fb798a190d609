#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lte {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Process-wide accounting of tensor storage. Every buffer owned by a tensor
// (data, grad, saved activations) goes through TrackingAllocator, so the peak
// reflects intermediate memory of a forward/backward pass.
namespace memory {

void on_allocate(std::size_t bytes) noexcept;
void on_release(std::size_t bytes) noexcept;

std::int64_t current_bytes() noexcept;
std::int64_t peak_bytes() noexcept;
// Sets the peak to the current level.
void reset_peak() noexcept;

template <class T>
struct TrackingAllocator {
  using value_type = T;

  TrackingAllocator() noexcept = default;
  template <class U>
  TrackingAllocator(const TrackingAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    T* p = std::allocator<T>{}.allocate(n);
    on_allocate(n * sizeof(T));
    return p;
  }
  void deallocate(T* p, std::size_t n) noexcept {
    on_release(n * sizeof(T));
    std::allocator<T>{}.deallocate(p, n);
  }

  template <class U>
  bool operator==(const TrackingAllocator<U>&) const noexcept { return true; }
};

}  // namespace memory

template <class T>
using TrackedVector = std::vector<T, memory::TrackingAllocator<T>>;

namespace detail {

struct Node;

struct TensorImpl {
  Shape shape;
  TrackedVector<float> data;
  TrackedVector<float> grad;  // empty until the first accumulation
  bool requires_grad = false;
  bool backward_done = false;
  bool graph_released = false;
  std::shared_ptr<Node> grad_fn;

  // Zero-filled on first use.
  float* grad_buffer();
};

struct Node {
  const char* name = "";
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  // Receives d(loss)/d(output) and accumulates into the grads of `inputs`
  // that require them.
  std::function<void(std::span<const float>)> backward;
};

}  // namespace detail

// Reference-semantics handle to a dense row-major float32 array that can take
// part in reverse-mode differentiation. Copies share storage.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, float value, bool requires_grad = false);
  static Tensor from_vector(Shape shape, std::span<const float> values, bool requires_grad = false);
  static Tensor from_vector(Shape shape, const std::vector<float>& values, bool requires_grad = false) {
    return from_vector(std::move(shape), std::span<const float>(values), requires_grad);
  }
  static Tensor scalar(float value, bool requires_grad = false);

  bool defined() const noexcept { return static_cast<bool>(impl_); }
  const Shape& shape() const { return impl_->shape; }
  int rank() const { return static_cast<int>(impl_->shape.size()); }
  std::int64_t dim(int axis) const;
  std::int64_t numel() const { return static_cast<std::int64_t>(impl_->data.size()); }

  std::span<float> data() { return {impl_->data.data(), impl_->data.size()}; }
  std::span<const float> data() const { return {impl_->data.data(), impl_->data.size()}; }
  std::vector<float> to_vector() const { return {impl_->data.begin(), impl_->data.end()}; }
  float item() const;

  bool requires_grad() const noexcept { return impl_ && impl_->requires_grad; }
  void set_requires_grad(bool value);
  bool is_leaf() const noexcept { return !impl_->grad_fn; }

  bool has_grad() const noexcept { return impl_ && !impl_->grad.empty(); }
  std::span<const float> grad() const { return {impl_->grad.data(), impl_->grad.size()}; }
  std::span<float> mutable_grad();
  void zero_grad();

  // Same values, no history.
  Tensor detach() const;

  const std::shared_ptr<detail::TensorImpl>& impl() const noexcept { return impl_; }

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Reverse pass from a scalar loss. Populates .grad on every requires_grad
// tensor reachable from `loss`, then releases the graph. A second call on the
// same loss throws GraphError.
void backward(const Tensor& loss);

bool grad_enabled() noexcept;

// Disables graph construction on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard() noexcept;
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace lte
