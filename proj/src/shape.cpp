#include "gaugetc/shape.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>

namespace gaugetc {

Shape::Shape(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) {
    throw std::invalid_argument("shape: order must be at least 1");
  }
  offsets_.reserve(dims_.size());
  for (size_t k = 0; k < dims_.size(); ++k) {
    const int r = dims_[k];
    if (r < 1) {
      std::ostringstream msg;
      msg << "shape: mode " << k + 1 << " has non-positive size " << r;
      throw std::invalid_argument(msg.str());
    }
    offsets_.push_back(sum_);
    sum_ += r;
    if (count_ > std::numeric_limits<int64_t>::max() / r) {
      throw std::invalid_argument("shape: entry count overflows 64-bit range");
    }
    count_ *= r;
  }
}

bool Shape::contains(const EntryIndex& x) const {
  if (static_cast<int>(x.coords.size()) != order()) return false;
  for (int k = 0; k < order(); ++k) {
    const int c = x.coords[static_cast<size_t>(k)];
    if (c < 0 || c >= dim(k)) return false;
  }
  return true;
}

void Shape::require_contains(const EntryIndex& x) const {
  if (static_cast<int>(x.coords.size()) != order()) {
    std::ostringstream msg;
    msg << "index has " << x.coords.size() << " coordinates, shape has order "
        << order();
    throw std::out_of_range(msg.str());
  }
  for (int k = 0; k < order(); ++k) {
    const int c = x.coords[static_cast<size_t>(k)];
    if (c < 0 || c >= dim(k)) {
      std::ostringstream msg;
      msg << "mode " << k + 1 << ": coordinate " << c << " outside [0, "
          << dim(k) << ")";
      throw std::out_of_range(msg.str());
    }
  }
}

int64_t Shape::flat_index(const EntryIndex& x) const {
  int64_t flat = 0;
  for (int k = 0; k < order(); ++k) {
    flat = flat * dim(k) + x.coords[static_cast<size_t>(k)];
  }
  return flat;
}

EntryIndex Shape::index_from_flat(int64_t flat) const {
  EntryIndex x;
  x.coords.assign(static_cast<size_t>(order()), 0);
  for (int k = order() - 1; k >= 0; --k) {
    x.coords[static_cast<size_t>(k)] = static_cast<int>(flat % dim(k));
    flat /= dim(k);
  }
  return x;
}

std::string Shape::to_string() const {
  std::ostringstream out;
  for (size_t k = 0; k < dims_.size(); ++k) {
    if (k > 0) out << "x";
    out << dims_[k];
  }
  return out.str();
}

}  // namespace gaugetc
