#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace codim {

/// Largest ambient dimension supported by the fixed-capacity vector type.
inline constexpr int kMaxDim = 8;

/// Small fixed-capacity real vector. Used for points in R^n, parameters in
/// R^d and normal offsets in R^{n-d}; never allocates.
class Vec {
 public:
  Vec() = default;
  explicit Vec(int size, double fill = 0.0) : size_(size) {
    assert(size >= 0 && size <= kMaxDim);
    std::fill_n(data_.begin(), size, fill);
  }
  Vec(std::initializer_list<double> values) : size_(static_cast<int>(values.size())) {
    assert(size_ <= kMaxDim);
    std::copy(values.begin(), values.end(), data_.begin());
  }
  explicit Vec(std::span<const double> values) : size_(static_cast<int>(values.size())) {
    assert(size_ <= kMaxDim);
    std::copy(values.begin(), values.end(), data_.begin());
  }

  int size() const { return size_; }
  double& operator[](int i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int i) const { return data_[static_cast<size_t>(i)]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<const double> span() const { return {data_.data(), static_cast<size_t>(size_)}; }
  std::vector<double> to_vector() const { return {data_.begin(), data_.begin() + size_}; }

  /// Components [first, first+count).
  Vec slice(int first, int count) const {
    Vec out(count);
    for (int i = 0; i < count; ++i) out[i] = data_[static_cast<size_t>(first + i)];
    return out;
  }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < size_; ++i) data_[i] += o[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < size_; ++i) data_[i] -= o[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < size_; ++i) data_[i] *= s;
    return *this;
  }
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.size_ != b.size_) return false;
    for (int i = 0; i < a.size_; ++i)
      if (a[i] != b[i]) return false;
    return true;
  }

 private:
  std::array<double, kMaxDim> data_{};
  int size_ = 0;
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

/// Concatenate a parameter point and a normal offset into a point of R^n.
inline Vec concat(const Vec& head, const Vec& tail) {
  Vec out(head.size() + tail.size());
  for (int i = 0; i < head.size(); ++i) out[i] = head[i];
  for (int i = 0; i < tail.size(); ++i) out[head.size() + i] = tail[i];
  return out;
}

// Error hierarchy. Every failure mode named by a module contract has its own
// type so callers (and the runner) can react to it specifically.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Query point lies outside the sampled window of a boundary.
class OutOfWindowError : public Error {
 public:
  using Error::Error;
};

/// Evaluation at a point of the boundary where the quantity is singular.
class SingularPointError : public Error {
 public:
  using Error::Error;
};

/// An adaptive procedure stopped before reaching its tolerance.
class ToleranceError : public Error {
 public:
  ToleranceError(const std::string& what, double achieved_estimate)
      : Error(what), achieved_estimate_(achieved_estimate) {}
  double achieved_estimate() const { return achieved_estimate_; }

 private:
  double achieved_estimate_;
};

/// Not enough grid cells or quadrature nodes to evaluate at the requested scale.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Grid classification is inconsistent with the boundary distance.
class ClassificationError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Partition cells too narrow for the mollification width of their indicators.
class PartitionError : public Error {
 public:
  using Error::Error;
};

/// Ratio functional with a zero denominator.
class UndefinedRatioError : public Error {
 public:
  using Error::Error;
};

}  // namespace codim
