#include "gaugetc/dense.hpp"

#include <sstream>
#include <stdexcept>

namespace gaugetc {

std::vector<double> materialize_dense(
    const std::function<double(const EntryIndex&)>& fn, const Shape& shape,
    int64_t max_entries) {
  if (shape.entry_count() > max_entries) {
    std::ostringstream msg;
    msg << "materialize: shape " << shape.to_string() << " has "
        << shape.entry_count() << " entries, above the limit of " << max_entries;
    throw std::invalid_argument(msg.str());
  }
  std::vector<double> dense;
  dense.reserve(static_cast<size_t>(shape.entry_count()));
  EntryIndex x;
  x.coords.assign(static_cast<size_t>(shape.order()), 0);
  const int p = shape.order();
  while (true) {
    dense.push_back(fn(x));
    int k = p - 1;
    while (k >= 0) {
      if (++x.coords[static_cast<size_t>(k)] < shape.dim(k)) break;
      x.coords[static_cast<size_t>(k)] = 0;
      --k;
    }
    if (k < 0) break;
  }
  return dense;
}

}  // namespace gaugetc
