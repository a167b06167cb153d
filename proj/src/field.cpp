#include "acok/field.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace acok {

Field1D::Field1D(std::vector<double> values, double half_width)
    : values_(std::move(values)), half_width_(half_width) {
  if (!(half_width_ > 0.0)) {
    throw std::invalid_argument("Field1D: half_width must be positive");
  }
  if (values_.size() < 4 || values_.size() % 2 != 0) {
    throw std::invalid_argument("Field1D: grid size must be even and >= 4, got " +
                                std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("Field1D: non-finite value");
  }
}

Field1D Field1D::zeros(std::size_t n, double half_width) {
  return Field1D(std::vector<double>(n, 0.0), half_width);
}

Field1D Field1D::constant(std::size_t n, double half_width, double value) {
  return Field1D(std::vector<double>(n, value), half_width);
}

Field1D Field1D::sample(std::size_t n, double half_width,
                        const std::function<double(double)>& fn) {
  Field1D field = zeros(n, half_width);
  for (std::size_t i = 0; i < n; ++i) field.values_[i] = fn(field.x(i));
  return field;
}

std::vector<double> Field1D::coordinates() const {
  std::vector<double> xs(size());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = x(i);
  return xs;
}

double Field1D::mean() const {
  double sum = 0.0;
  for (double v : values_) sum += v;
  return sum / static_cast<double>(values_.size());
}

double Field1D::integral() const {
  double sum = 0.0;
  for (double v : values_) sum += v;
  return sum * dx();
}

double Field1D::norm() const {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return std::sqrt(sum);
}

void require_same_grid(const Field1D& a, const Field1D& b, const char* what) {
  if (!a.same_grid(b)) {
    throw std::invalid_argument(std::string(what) + ": fields live on different grids (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                                " points)");
  }
}

}  // namespace acok
