#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gaugetc/shape.hpp"

namespace gaugetc {

struct SampleRow {
  EntryIndex index;
  double value = 0.0;
};

/// Observed (index, value) pairs plus per-unique-index aggregates.
///
/// The unique indices are kept sorted by flat position. For every unique x
/// the multiplicity m_x and the mean observation ybar_x are precomputed, as
/// is the within-index sum of squares sum_i (y_i - ybar_{x_i})^2; the fit
/// objective and its gradient depend on the samples only through these.
/// Immutable after construction.
class SampleSet {
 public:
  static SampleSet ingest(const Shape& shape, const std::vector<SampleRow>& rows);

  const Shape& shape() const { return shape_; }
  int64_t sample_count() const { return static_cast<int64_t>(rows_.size()); }
  const std::vector<SampleRow>& rows() const { return rows_; }

  int64_t unique_count() const { return static_cast<int64_t>(unique_.size()); }
  const std::vector<EntryIndex>& unique_indices() const { return unique_; }
  const std::vector<int64_t>& unique_flat() const { return unique_flat_; }
  const std::vector<int64_t>& multiplicities() const { return mult_; }
  const std::vector<double>& means() const { return mean_; }
  double within_group_sse() const { return within_sse_; }

 private:
  SampleSet(Shape shape, std::vector<SampleRow> rows);

  Shape shape_;
  std::vector<SampleRow> rows_;
  std::vector<EntryIndex> unique_;
  std::vector<int64_t> unique_flat_;
  std::vector<int64_t> mult_;
  std::vector<double> mean_;
  double within_sse_ = 0.0;
};

/// CSV with header `x1,...,xp,y`, one-based coordinates, LF line endings.
SampleSet read_samples_csv(const Shape& shape, std::istream& in);
SampleSet read_samples_csv_file(const Shape& shape, const std::string& path);
void write_samples_csv(const Shape& shape, const std::vector<SampleRow>& rows,
                       std::ostream& out);
void write_samples_csv_file(const Shape& shape, const std::vector<SampleRow>& rows,
                            const std::string& path);

}  // namespace gaugetc
