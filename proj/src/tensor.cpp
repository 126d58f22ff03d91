#include "camfuse/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "camfuse/errors.hpp"

namespace camfuse {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_to_string(const std::vector<std::size_t>& shape) {
    std::ostringstream out;
    out << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out << ", ";
        out << shape[i];
    }
    out << "]";
    return out.str();
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

double& Tensor::at2(std::size_t i, std::size_t j) {
    return data_[i * shape_[1] + j];
}

double Tensor::at2(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
}

double& Tensor::at3(std::size_t c, std::size_t i, std::size_t j) {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
}

double Tensor::at3(std::size_t c, std::size_t i, std::size_t j) const {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
}

double Tensor::min_value() const {
    if (data_.empty()) throw ValueError("min_value: empty tensor");
    return *std::min_element(data_.begin(), data_.end());
}

double Tensor::max_value() const {
    if (data_.empty()) throw ValueError("max_value: empty tensor");
    return *std::max_element(data_.begin(), data_.end());
}

double Tensor::sum() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
}

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
}

void require_shape(const Tensor& t, const std::vector<std::size_t>& expected,
                   const std::string& what) {
    if (t.shape() != expected) {
        throw ShapeError(what + ": expected shape " + shape_to_string(expected) +
                         ", got " + shape_to_string(t.shape()));
    }
}

}  // namespace camfuse
