#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace acok {

/// Grid function on the uniform periodic grid x_i = -X + i*dx, dx = 2X/N.
class Field1D {
 public:
  Field1D() = default;
  Field1D(std::vector<double> values, double half_width);

  static Field1D zeros(std::size_t n, double half_width);
  static Field1D constant(std::size_t n, double half_width, double value);
  static Field1D sample(std::size_t n, double half_width,
                        const std::function<double(double)>& fn);

  std::size_t size() const noexcept { return values_.size(); }
  double half_width() const noexcept { return half_width_; }
  double length() const noexcept { return 2.0 * half_width_; }
  double dx() const noexcept { return length() / static_cast<double>(values_.size()); }
  double x(std::size_t i) const noexcept { return -half_width_ + static_cast<double>(i) * dx(); }
  std::vector<double> coordinates() const;

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  bool same_grid(const Field1D& other) const noexcept {
    return size() == other.size() && half_width_ == other.half_width_;
  }

  /// Discrete mean (1/N) sum u_i.
  double mean() const;
  /// Midpoint-rule integral sum u_i * dx.
  double integral() const;
  /// Grid 2-norm sqrt(sum u_i^2).
  double norm() const;

  bool operator==(const Field1D&) const = default;

 private:
  std::vector<double> values_;
  double half_width_ = 1.0;
};

/// Throws std::invalid_argument unless both fields live on the same grid.
void require_same_grid(const Field1D& a, const Field1D& b, const char* what);

}  // namespace acok
