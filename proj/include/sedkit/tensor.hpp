#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sedkit/rng.hpp"

namespace sedkit {

// Dense row-major N-dimensional array. The layout convention for 4D feature
// maps throughout the library is [batch, channel, frequency, time].
// float is the inference scalar type; double is used on gradient-check paths.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> dims, T fill = T(0)) : dims_(std::move(dims)) {
        validate_dims();
        data_.assign(count(), fill);
        recompute_strides();
    }

    static Tensor from_data(std::vector<int> dims, std::vector<T> data) {
        Tensor t;
        t.dims_ = std::move(dims);
        t.validate_dims();
        if (data.size() != t.count())
            throw std::invalid_argument("Tensor::from_data: dims/data size mismatch");
        t.data_ = std::move(data);
        t.recompute_strides();
        return t;
    }

    static Tensor random_uniform(std::vector<int> dims, Rng& rng, double lo, double hi) {
        Tensor t(std::move(dims));
        for (auto& v : t.data_) v = static_cast<T>(rng.uniform(lo, hi));
        return t;
    }

    int ndim() const { return static_cast<int>(dims_.size()); }
    int dim(int axis) const { return dims_.at(static_cast<std::size_t>(axis)); }
    const std::vector<int>& dims() const { return dims_; }
    std::size_t numel() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& vec() { return data_; }
    const std::vector<T>& vec() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::size_t stride(int axis) const { return strides_.at(static_cast<std::size_t>(axis)); }

    std::size_t offset(int i0) const { return static_cast<std::size_t>(i0); }
    std::size_t offset(int i0, int i1) const {
        return static_cast<std::size_t>(i0) * strides_[0] + static_cast<std::size_t>(i1);
    }
    std::size_t offset(int i0, int i1, int i2) const {
        return static_cast<std::size_t>(i0) * strides_[0] + static_cast<std::size_t>(i1) * strides_[1] +
               static_cast<std::size_t>(i2);
    }
    std::size_t offset(int i0, int i1, int i2, int i3) const {
        return static_cast<std::size_t>(i0) * strides_[0] + static_cast<std::size_t>(i1) * strides_[1] +
               static_cast<std::size_t>(i2) * strides_[2] + static_cast<std::size_t>(i3);
    }

    T& at(int i0) { return data_[offset(i0)]; }
    T& at(int i0, int i1) { return data_[offset(i0, i1)]; }
    T& at(int i0, int i1, int i2) { return data_[offset(i0, i1, i2)]; }
    T& at(int i0, int i1, int i2, int i3) { return data_[offset(i0, i1, i2, i3)]; }
    const T& at(int i0) const { return data_[offset(i0)]; }
    const T& at(int i0, int i1) const { return data_[offset(i0, i1)]; }
    const T& at(int i0, int i1, int i2) const { return data_[offset(i0, i1, i2)]; }
    const T& at(int i0, int i1, int i2, int i3) const { return data_[offset(i0, i1, i2, i3)]; }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    bool same_shape(const Tensor& other) const { return dims_ == other.dims_; }

    bool all_finite() const {
        for (const T v : data_)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    template <typename U>
    Tensor<U> cast() const {
        std::vector<U> out(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
        return Tensor<U>::from_data(dims_, std::move(out));
    }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < dims_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(dims_[i]);
        }
        return s + "]";
    }

private:
    std::size_t count() const {
        std::size_t n = 1;
        for (int d : dims_) n *= static_cast<std::size_t>(d);
        return dims_.empty() ? 0 : n;
    }

    void validate_dims() const {
        if (dims_.empty()) throw std::invalid_argument("Tensor: rank must be >= 1");
        for (int d : dims_)
            if (d <= 0) throw std::invalid_argument("Tensor: extents must be positive");
    }

    // strides_[a] = elements to skip per step along axis a; last axis stride 1
    // is implicit in the offset() overloads.
    void recompute_strides() {
        strides_.assign(dims_.size(), 1);
        for (int a = static_cast<int>(dims_.size()) - 2; a >= 0; --a)
            strides_[static_cast<std::size_t>(a)] =
                strides_[static_cast<std::size_t>(a) + 1] * static_cast<std::size_t>(dims_[static_cast<std::size_t>(a) + 1]);
    }

    std::vector<int> dims_;
    std::vector<std::size_t> strides_;
    std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

template <typename T>
void ensure_finite(const Tensor<T>& t, const char* what) {
    if (!t.all_finite()) throw std::invalid_argument(std::string(what) + ": non-finite values");
}

template <typename T>
void ensure_shape(const Tensor<T>& t, const std::vector<int>& dims, const char* what) {
    if (t.dims() != dims)
        throw std::invalid_argument(std::string(what) + ": unexpected shape " + t.shape_str());
}

}  // namespace sedkit
