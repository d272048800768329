#include "edgeflow/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace edgeflow {

Tensor::Tensor(std::vector<int64_t> shape, double fill)
    : shape_(std::move(shape)) {
  int64_t n = 1;
  for (int64_t d : shape_) {
    if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
    n *= d;
  }
  data_.assign(static_cast<size_t>(n), fill);
}

Tensor Tensor::scalar(double v) {
  Tensor t(std::vector<int64_t>{});
  t.data_.assign(1, v);
  return t;
}

Tensor Tensor::vector(std::vector<double> values) {
  Tensor t;
  t.shape_ = {static_cast<int64_t>(values.size())};
  t.data_ = std::move(values);
  return t;
}

Tensor Tensor::matrix(int64_t rows, int64_t cols, double fill) {
  return Tensor({rows, cols}, fill);
}

int64_t Tensor::rows() const {
  if (shape_.size() != 2) throw std::logic_error("rows(): not a matrix");
  return shape_[0];
}

int64_t Tensor::cols() const {
  if (shape_.size() != 2) throw std::logic_error("cols(): not a matrix");
  return shape_[1];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::string Tensor::shape_str() const {
  std::ostringstream out;
  out << "[";
  for (size_t i = 0; i < shape_.size(); ++i)
    out << (i ? "," : "") << shape_[i];
  out << "]";
  return out.str();
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double Rng::uniform() {
  // 53-bit mantissa draw
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform(), u2 = uniform();
  while (u1 <= 1e-300) u1 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

int64_t Rng::uniform_int(int64_t n) {
  if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
  // modulo bias is irrelevant for n << 2^64
  return static_cast<int64_t>(engine_() % static_cast<uint64_t>(n));
}

std::string Rng::save_state() const {
  std::ostringstream out;
  out << engine_ << " " << (have_spare_ ? 1 : 0) << " ";
  out.precision(17);
  out << spare_;
  return out.str();
}

void Rng::load_state(const std::string& state) {
  std::istringstream in(state);
  int spare_flag = 0;
  in >> engine_ >> spare_flag >> spare_;
  if (!in) throw std::runtime_error("Rng: corrupt state string");
  have_spare_ = spare_flag != 0;
}

}  // namespace edgeflow
