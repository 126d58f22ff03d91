#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace camfuse {

// Dense row-major tensor of 64-bit floats. Rank and extents live in
// `shape`; data is laid out with the last axis contiguous.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_[axis]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // Checked accessors for the common low ranks.
    double& at2(std::size_t i, std::size_t j);
    double at2(std::size_t i, std::size_t j) const;
    double& at3(std::size_t c, std::size_t i, std::size_t j);
    double at3(std::size_t c, std::size_t i, std::size_t j) const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    double min_value() const;
    double max_value() const;
    double sum() const;
    bool all_finite() const;

  private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);
std::string shape_to_string(const std::vector<std::size_t>& shape);

// Throws ShapeError naming `what` when the shapes differ.
void require_shape(const Tensor& t, const std::vector<std::size_t>& expected,
                   const std::string& what);

}  // namespace camfuse
