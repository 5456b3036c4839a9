#include "gaugetc/sign_vertex.hpp"

#include <sstream>
#include <stdexcept>

namespace gaugetc {

namespace {

void check_signs(const Shape& shape, const std::vector<int8_t>& flat) {
  if (static_cast<int>(flat.size()) != shape.sum_dims()) {
    std::ostringstream msg;
    msg << "sign vertex: expected " << shape.sum_dims() << " signs for shape "
        << shape.to_string() << ", got " << flat.size();
    throw std::invalid_argument(msg.str());
  }
  for (const int8_t s : flat) {
    if (s != 1 && s != -1) {
      throw std::invalid_argument("sign vertex: entries must be exactly -1 or +1");
    }
  }
}

}  // namespace

SignVertex::SignVertex(const Shape& shape, std::vector<int8_t> flat_signs)
    : shape_(shape), signs_(std::move(flat_signs)) {
  check_signs(shape_, signs_);
}

SignVertex::SignVertex(const Shape& shape,
                       const std::vector<std::vector<int8_t>>& per_mode)
    : shape_(shape) {
  if (static_cast<int>(per_mode.size()) != shape.order()) {
    throw std::invalid_argument("sign vertex: wrong number of modes");
  }
  signs_.reserve(static_cast<size_t>(shape.sum_dims()));
  for (int k = 0; k < shape.order(); ++k) {
    if (static_cast<int>(per_mode[static_cast<size_t>(k)].size()) != shape.dim(k)) {
      std::ostringstream msg;
      msg << "sign vertex: mode " << k + 1 << " has "
          << per_mode[static_cast<size_t>(k)].size() << " signs, expected "
          << shape.dim(k);
      throw std::invalid_argument(msg.str());
    }
    signs_.insert(signs_.end(), per_mode[static_cast<size_t>(k)].begin(),
                  per_mode[static_cast<size_t>(k)].end());
  }
  check_signs(shape_, signs_);
}

SignVertex SignVertex::all_plus(const Shape& shape) {
  return SignVertex(shape, std::vector<int8_t>(static_cast<size_t>(shape.sum_dims()), 1));
}

int SignVertex::entry(const EntryIndex& x) const {
  shape_.require_contains(x);
  int product = 1;
  for (int k = 0; k < shape_.order(); ++k) {
    product *= signs_[static_cast<size_t>(shape_.mode_offset(k) +
                                          x.coords[static_cast<size_t>(k)])];
  }
  return product;
}

std::vector<int8_t> SignVertex::project(std::span<const EntryIndex> indices) const {
  std::vector<int8_t> out;
  out.reserve(indices.size());
  for (const EntryIndex& x : indices) {
    out.push_back(static_cast<int8_t>(entry(x)));
  }
  return out;
}

SignVertex SignVertex::canonicalized() const {
  std::vector<int8_t> flat = signs_;
  for (int k = 1; k < shape_.order(); ++k) {
    const int offset = shape_.mode_offset(k);
    if (flat[static_cast<size_t>(offset)] == -1) {
      for (int j = 0; j < shape_.dim(k); ++j) {
        flat[static_cast<size_t>(offset + j)] =
            static_cast<int8_t>(-flat[static_cast<size_t>(offset + j)]);
      }
      for (int j = 0; j < shape_.dim(0); ++j) {
        flat[static_cast<size_t>(j)] = static_cast<int8_t>(-flat[static_cast<size_t>(j)]);
      }
    }
  }
  return SignVertex(shape_, std::move(flat));
}

bool SignVertex::is_canonical() const {
  for (int k = 1; k < shape_.order(); ++k) {
    if (signs_[static_cast<size_t>(shape_.mode_offset(k))] != 1) return false;
  }
  return true;
}

SignVertex SignVertex::negated() const {
  std::vector<int8_t> flat = signs_;
  for (int j = 0; j < shape_.dim(0); ++j) {
    flat[static_cast<size_t>(j)] = static_cast<int8_t>(-flat[static_cast<size_t>(j)]);
  }
  return SignVertex(shape_, std::move(flat));
}

}  // namespace gaugetc
