#include "gaugetc/samples.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "gaugetc/numfmt.hpp"

namespace gaugetc {

SampleSet::SampleSet(Shape shape, std::vector<SampleRow> rows)
    : shape_(std::move(shape)), rows_(std::move(rows)) {}

SampleSet SampleSet::ingest(const Shape& shape, const std::vector<SampleRow>& rows) {
  if (rows.empty()) {
    throw std::invalid_argument("ingest: no sample rows");
  }
  for (size_t i = 0; i < rows.size(); ++i) {
    const SampleRow& row = rows[i];
    try {
      shape.require_contains(row.index);
    } catch (const std::out_of_range& err) {
      std::ostringstream msg;
      msg << "ingest: row " << i + 1 << ": " << err.what();
      throw std::invalid_argument(msg.str());
    }
    if (!std::isfinite(row.value)) {
      std::ostringstream msg;
      msg << "ingest: row " << i + 1 << ": non-finite value";
      throw std::invalid_argument(msg.str());
    }
  }

  SampleSet set(shape, rows);

  // m_x and sum of observations per unique index, sorted by flat position.
  std::map<int64_t, std::pair<int64_t, double>> groups;
  for (const SampleRow& row : set.rows_) {
    auto& group = groups[shape.flat_index(row.index)];
    group.first += 1;
    group.second += row.value;
  }
  set.unique_.reserve(groups.size());
  set.unique_flat_.reserve(groups.size());
  set.mult_.reserve(groups.size());
  set.mean_.reserve(groups.size());
  for (const auto& [flat, group] : groups) {
    set.unique_flat_.push_back(flat);
    set.unique_.push_back(shape.index_from_flat(flat));
    set.mult_.push_back(group.first);
    set.mean_.push_back(group.second / static_cast<double>(group.first));
  }
  double sse = 0.0;
  for (const SampleRow& row : set.rows_) {
    const int64_t flat = shape.flat_index(row.index);
    const auto pos = std::lower_bound(set.unique_flat_.begin(), set.unique_flat_.end(), flat) -
                     set.unique_flat_.begin();
    const double dev = row.value - set.mean_[static_cast<size_t>(pos)];
    sse += dev * dev;
  }
  set.within_sse_ = sse;
  return set;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string expected_header(const Shape& shape) {
  std::ostringstream out;
  for (int k = 0; k < shape.order(); ++k) out << "x" << k + 1 << ",";
  out << "y";
  return out.str();
}

}  // namespace

SampleSet read_samples_csv(const Shape& shape, std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("samples csv: empty input");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header(shape)) {
    throw std::invalid_argument("samples csv: line 1: expected header '" +
                                expected_header(shape) + "', got '" + line + "'");
  }
  std::vector<SampleRow> rows;
  int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != shape.order() + 1) {
      std::ostringstream msg;
      msg << "samples csv: line " << line_no << ": expected " << shape.order() + 1
          << " fields, got " << fields.size();
      throw std::invalid_argument(msg.str());
    }
    SampleRow row;
    row.index.coords.resize(static_cast<size_t>(shape.order()));
    for (int k = 0; k < shape.order(); ++k) {
      std::ostringstream what;
      what << "samples csv: line " << line_no << ": x" << k + 1;
      const int64_t one_based = parse_int(fields[static_cast<size_t>(k)], what.str());
      row.index.coords[static_cast<size_t>(k)] = static_cast<int>(one_based - 1);
    }
    {
      std::ostringstream what;
      what << "samples csv: line " << line_no << ": y";
      row.value = parse_double(fields[static_cast<size_t>(shape.order())], what.str());
    }
    try {
      shape.require_contains(row.index);
    } catch (const std::out_of_range& err) {
      std::ostringstream msg;
      msg << "samples csv: line " << line_no << ": " << err.what();
      throw std::invalid_argument(msg.str());
    }
    rows.push_back(std::move(row));
  }
  return SampleSet::ingest(shape, rows);
}

SampleSet read_samples_csv_file(const Shape& shape, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open samples csv '" + path + "'");
  }
  return read_samples_csv(shape, in);
}

void write_samples_csv(const Shape& shape, const std::vector<SampleRow>& rows,
                       std::ostream& out) {
  out << expected_header(shape) << "\n";
  for (const SampleRow& row : rows) {
    for (int k = 0; k < shape.order(); ++k) {
      out << row.index.coords[static_cast<size_t>(k)] + 1 << ",";
    }
    out << format_double(row.value) << "\n";
  }
}

void write_samples_csv_file(const Shape& shape, const std::vector<SampleRow>& rows,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write samples csv '" + path + "'");
  }
  write_samples_csv(shape, rows, out);
  if (!out.flush()) {
    throw std::runtime_error("write failed for samples csv '" + path + "'");
  }
}

}  // namespace gaugetc
