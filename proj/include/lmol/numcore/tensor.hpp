#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lmol/numcore/real.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

struct TensorNode {
  Shape shape;
  std::vector<real> data;
  std::vector<real> grad;  // empty until a gradient is allocated
  bool requires_grad = false;
  // Set when backward deposits into grad; cleared by zero_grad and by the
  // optimizer. Parameters that were not reached in a step are left alone.
  bool grad_touched = false;

  void ensure_grad();
};

}  // namespace detail

// Dense row-major array with an optional gradient. Copies share storage;
// use clone() for an independent copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, real value);
  static Tensor from(Shape shape, std::vector<real> values);
  static Tensor scalar(real value);
  // A leaf that requires a gradient; its grad buffer is allocated and zeroed.
  static Tensor parameter(Shape shape, std::vector<real> values);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const real> data() const;
  std::span<real> mutable_data();
  std::span<const real> grad() const;
  std::span<real> mutable_grad();
  bool has_grad() const;

  bool requires_grad() const;
  void set_requires_grad(bool on);
  void zero_grad();

  real item() const;
  real operator[](std::size_t flat) const { return data()[flat]; }
  real at(std::size_t row, std::size_t col) const;

  Tensor clone() const;
  Tensor detach() const;

  bool same_storage(const Tensor& other) const noexcept { return node_ == other.node_; }
  const std::shared_ptr<detail::TensorNode>& node() const noexcept { return node_; }
  explicit Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::TensorNode> node_;
};

}  // namespace lmol
