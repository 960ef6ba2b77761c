#include "lmol/numcore/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "lmol/error.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ')';
  return os.str();
}

namespace detail {

void TensorNode::ensure_grad() {
  if (grad.size() != data.size()) grad.assign(data.size(), real(0));
}

}  // namespace detail

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_string(shape));
  }
}

}  // namespace

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), real(0)); }

Tensor Tensor::full(Shape shape, real value) {
  check_shape(shape);
  auto node = std::make_shared<detail::TensorNode>();
  node->data.assign(shape_numel(shape), value);
  node->shape = std::move(shape);
  return Tensor(std::move(node));
}

Tensor Tensor::from(Shape shape, std::vector<real> values) {
  check_shape(shape);
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("tensor of shape " + shape_string(shape) + " cannot hold " +
                     std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<detail::TensorNode>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(real value) { return from({1}, {value}); }

Tensor Tensor::parameter(Shape shape, std::vector<real> values) {
  Tensor t = from(std::move(shape), std::move(values));
  t.set_requires_grad(true);
  return t;
}

const Shape& Tensor::shape() const {
  if (!node_) throw StateError("use of an undefined tensor");
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) throw ShapeError("axis out of range for shape " + shape_string(s));
  return s[axis];
}

std::size_t Tensor::numel() const { return shape_numel(shape()); }

std::span<const real> Tensor::data() const {
  shape();
  return node_->data;
}

std::span<real> Tensor::mutable_data() {
  shape();
  return node_->data;
}

std::span<const real> Tensor::grad() const {
  shape();
  return node_->grad;
}

std::span<real> Tensor::mutable_grad() {
  shape();
  node_->ensure_grad();
  return node_->grad;
}

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool on) {
  shape();
  node_->requires_grad = on;
  if (on) {
    node_->ensure_grad();
  } else {
    node_->grad.clear();
  }
}

void Tensor::zero_grad() {
  shape();
  std::fill(node_->grad.begin(), node_->grad.end(), real(0));
  node_->grad_touched = false;
}

real Tensor::item() const {
  if (numel() != 1) throw ShapeError("item() needs a single-element tensor, got " + shape_string(shape()));
  return node_->data[0];
}

real Tensor::at(std::size_t row, std::size_t col) const {
  const Shape& s = shape();
  if (s.size() != 2) throw ShapeError("at(row, col) needs a rank-2 tensor");
  if (row >= s[0] || col >= s[1]) throw IndexError("index out of range");
  return node_->data[row * s[1] + col];
}

Tensor Tensor::clone() const {
  auto node = std::make_shared<detail::TensorNode>(*node_);
  return Tensor(std::move(node));
}

Tensor Tensor::detach() const { return from(shape(), node_->data); }

}  // namespace lmol
