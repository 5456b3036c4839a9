#include "gaugetc/atomic_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gaugetc/dense.hpp"

namespace gaugetc {

namespace {
constexpr double kWeightSumSlack = 1e-9;
}

AtomicModel::AtomicModel(Shape shape, double lambda, std::vector<WeightedVertex> terms)
    : shape_(std::move(shape)), lambda_(lambda), terms_(std::move(terms)) {
  if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) {
    throw std::invalid_argument("atomic model: lambda must be a nonnegative real");
  }
  double sum = 0.0;
  for (size_t i = 0; i < terms_.size(); ++i) {
    const WeightedVertex& term = terms_[i];
    if (term.vertex.shape() != shape_) {
      throw std::invalid_argument("atomic model: term shape mismatch");
    }
    if (!(term.weight >= 0.0) || !std::isfinite(term.weight)) {
      throw std::invalid_argument("atomic model: weights must be nonnegative");
    }
    if (!term.vertex.is_canonical()) {
      throw std::invalid_argument("atomic model: vertices must be canonical");
    }
    sum += term.weight;
    for (size_t j = 0; j < i; ++j) {
      if (terms_[j].vertex == term.vertex) {
        throw std::invalid_argument("atomic model: duplicate vertex among terms");
      }
    }
  }
  if (sum > 1.0 + kWeightSumSlack) {
    std::ostringstream msg;
    msg << "atomic model: weights sum to " << sum << ", above 1";
    throw std::invalid_argument(msg.str());
  }
}

double AtomicModel::weight_sum() const {
  double sum = 0.0;
  for (const WeightedVertex& term : terms_) sum += term.weight;
  return sum;
}

double AtomicModel::entry(const EntryIndex& x) const {
  shape_.require_contains(x);
  double acc = 0.0;
  for (const WeightedVertex& term : terms_) {
    acc += term.weight * term.vertex.entry(x);
  }
  return lambda_ * acc;
}

std::vector<double> AtomicModel::project(std::span<const EntryIndex> indices) const {
  std::vector<double> out;
  out.reserve(indices.size());
  for (const EntryIndex& x : indices) out.push_back(entry(x));
  return out;
}

double inner_product(const AtomicModel& a, const AtomicModel& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("inner product: shape mismatch " + a.shape().to_string() +
                                " vs " + b.shape().to_string());
  }
  const Shape& shape = a.shape();
  const int p = shape.order();
  double acc = 0.0;
  for (const WeightedVertex& va : a.terms()) {
    for (const WeightedVertex& vb : b.terms()) {
      double prod = va.weight * vb.weight;
      for (int k = 0; k < p && prod != 0.0; ++k) {
        const int offset = shape.mode_offset(k);
        int64_t dot = 0;
        for (int j = 0; j < shape.dim(k); ++j) {
          dot += va.vertex.flat_signs()[static_cast<size_t>(offset + j)] *
                 vb.vertex.flat_signs()[static_cast<size_t>(offset + j)];
        }
        prod *= static_cast<double>(dot);
      }
      acc += prod;
    }
  }
  return a.lambda() * b.lambda() * acc;
}

std::vector<double> materialize_dense(const AtomicModel& model, int64_t max_entries) {
  return materialize_dense(
      [&](const EntryIndex& x) { return model.entry(x); }, model.shape(), max_entries);
}

namespace {

nlohmann::ordered_json model_json(const AtomicModel& model) {
  nlohmann::ordered_json out;
  out["shape"] = model.shape().dims();
  out["lambda"] = model.lambda();
  out["terms"] = nlohmann::ordered_json::array();
  for (const WeightedVertex& term : model.terms()) {
    nlohmann::ordered_json jt;
    jt["weight"] = term.weight;
    nlohmann::ordered_json signs = nlohmann::ordered_json::array();
    for (int k = 0; k < model.shape().order(); ++k) {
      std::vector<int> mode;
      mode.reserve(static_cast<size_t>(model.shape().dim(k)));
      for (int j = 0; j < model.shape().dim(k); ++j) {
        mode.push_back(term.vertex.sign(k, j));
      }
      signs.push_back(mode);
    }
    jt["signs"] = std::move(signs);
    out["terms"].push_back(std::move(jt));
  }
  return out;
}

}  // namespace

std::string model_to_json(const AtomicModel& model) {
  return model_json(model).dump(2) + "\n";
}

AtomicModel model_from_json(const std::string& text) {
  nlohmann::json in;
  try {
    in = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& err) {
    throw std::invalid_argument(std::string("model json: ") + err.what());
  }
  try {
    const Shape shape(in.at("shape").get<std::vector<int>>());
    const double lambda = in.at("lambda").get<double>();
    std::vector<WeightedVertex> terms;
    for (const auto& jt : in.at("terms")) {
      const double weight = jt.at("weight").get<double>();
      std::vector<std::vector<int8_t>> per_mode;
      for (const auto& mode : jt.at("signs")) {
        std::vector<int8_t> signs;
        for (const auto& s : mode) {
          const int v = s.get<int>();
          signs.push_back(static_cast<int8_t>(v));
        }
        per_mode.push_back(std::move(signs));
      }
      terms.push_back(WeightedVertex{weight, SignVertex(shape, per_mode)});
    }
    return AtomicModel(shape, lambda, std::move(terms));
  } catch (const nlohmann::json::exception& err) {
    throw std::invalid_argument(std::string("model json: ") + err.what());
  }
}

void save_model(const AtomicModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write model '" + path + "'");
  }
  out << model_to_json(model);
  if (!out.flush()) {
    throw std::runtime_error("write failed for model '" + path + "'");
  }
}

AtomicModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open model '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

}  // namespace gaugetc
