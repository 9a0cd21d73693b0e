#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "equicalib/dataset.hpp"
#include "equicalib/error.hpp"
#include "equicalib/metrics.hpp"

namespace equicalib::io {

using json = nlohmann::json;

inline constexpr const char* kDatasetFormat = "equicalib-dataset/1";
inline constexpr const char* kPredictionFormat = "equicalib-predictions/1";

namespace detail {

inline json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json point_json(const Point& p, bool as_rows) {
  if (!as_rows) return vector_json(p.row(0).transpose());
  json rows = json::array();
  for (Eigen::Index r = 0; r < p.rows(); ++r) rows.push_back(vector_json(p.row(r).transpose()));
  return rows;
}

[[noreturn]] inline void fail(std::size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

inline Vector parse_vector(const json& j, std::size_t line, const char* field) {
  if (!j.is_array()) fail(line, std::string(field) + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(line, std::string(field) + " must be an array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline Point parse_point(const json& j, std::size_t line) {
  if (!j.is_array() || j.empty()) fail(line, "point must be a nonempty array");
  if (!j[0].is_array()) return row_point(parse_vector(j, line, "point"));
  const Vector first = parse_vector(j[0], line, "point row");
  Point p(static_cast<Eigen::Index>(j.size()), first.size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = parse_vector(j[r], line, "point row");
    if (row.size() != first.size()) fail(line, "point rows differ in length");
    p.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return p;
}

inline json parse_line(const std::string& text, std::size_t line) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(line, std::string("malformed record (") + e.what() + ")");
  }
}

} // namespace detail

/// Line-delimited JSON: a header line with format/spec/seed, then one record
/// per sample. Doubles are written in shortest round-trip form.
inline void write_dataset(const WeightedDataset& ds, std::ostream& os) {
  ds.validate();
  json header{{"format", kDatasetFormat}, {"spec", ds.spec}, {"seed", ds.seed}, {"point_sets", ds.point_sets}};
  os << header.dump() << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    json rec;
    rec["point"] = detail::point_json(ds.points[i], ds.point_sets || ds.points[i].rows() != 1);
    if (ds.labels) rec["label"] = (*ds.labels)[i];
    if (ds.targets) rec["target"] = detail::vector_json((*ds.targets)[i]);
    rec["weight"] = ds.weights[i];
    if (ds.annotation_mean) rec["mean"] = detail::vector_json((*ds.annotation_mean)[i]);
    if (ds.annotation_variance) rec["variance"] = detail::vector_json((*ds.annotation_variance)[i]);
    if (ds.fiber) rec["fiber"] = (*ds.fiber)[i];
    os << rec.dump() << '\n';
  }
}

inline WeightedDataset read_dataset(std::istream& is) {
  WeightedDataset ds;
  std::string text;
  std::size_t line = 0;
  bool header = false;
  bool weights_complete = true;
  while (std::getline(is, text)) {
    ++line;
    if (text.empty()) continue;
    const json j = detail::parse_line(text, line);
    if (!j.is_object()) detail::fail(line, "record must be an object");
    if (!header) {
      if (!j.contains("format") || j["format"] != kDatasetFormat) detail::fail(line, "missing dataset header");
      ds.spec = j.value("spec", "");
      ds.seed = j.value("seed", std::uint64_t{0});
      ds.point_sets = j.value("point_sets", false);
      header = true;
      continue;
    }
    if (!j.contains("point")) detail::fail(line, "record lacks 'point'");
    ds.points.push_back(detail::parse_point(j["point"], line));
    const std::size_t i = ds.points.size() - 1;
    auto optional_field = [&](const char* key, auto& store, auto parse) {
      if (j.contains(key)) {
        if (!store) {
          if (i != 0) detail::fail(line, std::string("'") + key + "' present on some records only");
          store.emplace();
        }
        store->push_back(parse(j[key]));
      } else if (store) {
        detail::fail(line, std::string("'") + key + "' present on some records only");
      }
    };
    auto as_int = [&](const json& v) {
      if (!v.is_number_integer()) detail::fail(line, "expected an integer");
      return v.get<int>();
    };
    auto as_vec = [&](const json& v) { return detail::parse_vector(v, line, "vector field"); };
    optional_field("label", ds.labels, as_int);
    optional_field("target", ds.targets, as_vec);
    optional_field("mean", ds.annotation_mean, as_vec);
    optional_field("variance", ds.annotation_variance, as_vec);
    optional_field("fiber", ds.fiber, as_int);
    if (j.contains("weight")) {
      if (!j["weight"].is_number()) detail::fail(line, "weight must be a number");
      ds.weights.push_back(j["weight"].get<double>());
    } else {
      weights_complete = false;
    }
  }
  if (!header) throw DataError("line 1: empty dataset file");
  if (!weights_complete) throw DataError("weights absent");
  ds.validate();
  return ds;
}

inline void save_dataset(const WeightedDataset& ds, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write '" + path + "'");
  write_dataset(ds, os);
  if (!os) throw DataError("write failed for '" + path + "'");
}

inline WeightedDataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read '" + path + "'");
  return read_dataset(is);
}

/// Prediction records: {"label", "confidence"} for classifiers or
/// {"mean", "variance"} for regressors, each with an optional "weight".
struct Predictions {
  std::vector<ClassifierOutput> classes;
  std::vector<RegressorOutput> regressions;
  std::vector<double> weights; // empty when no record carries a weight

  [[nodiscard]] bool is_classifier() const noexcept { return !classes.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return classes.size() + regressions.size(); }
};

inline void write_predictions(const Predictions& p, std::ostream& os) {
  os << json{{"format", kPredictionFormat}}.dump() << '\n';
  for (std::size_t i = 0; i < p.size(); ++i) {
    json rec;
    if (p.is_classifier()) {
      rec["label"] = p.classes[i].label;
      rec["confidence"] = p.classes[i].confidence;
    } else {
      rec["mean"] = detail::vector_json(p.regressions[i].mean);
      rec["variance"] = detail::vector_json(p.regressions[i].variance);
    }
    if (!p.weights.empty()) rec["weight"] = p.weights[i];
    os << rec.dump() << '\n';
  }
}

inline Predictions read_predictions(std::istream& is) {
  Predictions p;
  std::string text;
  std::size_t line = 0;
  bool header = false;
  std::size_t weighted = 0;
  while (std::getline(is, text)) {
    ++line;
    if (text.empty()) continue;
    const json j = detail::parse_line(text, line);
    if (!j.is_object()) detail::fail(line, "record must be an object");
    if (!header) {
      if (!j.contains("format") || j["format"] != kPredictionFormat) detail::fail(line, "missing predictions header");
      header = true;
      continue;
    }
    const bool cls = j.contains("confidence");
    const bool reg = j.contains("mean") && j.contains("variance");
    if (cls == reg) detail::fail(line, "record needs either label/confidence or mean/variance");
    if ((cls && !p.regressions.empty()) || (reg && !p.classes.empty())) {
      detail::fail(line, "mixed classifier and regressor records");
    }
    if (cls) {
      if (!j.contains("label") || !j["label"].is_number_integer() || !j["confidence"].is_number()) {
        detail::fail(line, "classifier record needs integer label and numeric confidence");
      }
      p.classes.push_back({j["label"].get<int>(), j["confidence"].get<double>()});
    } else {
      RegressorOutput o{detail::parse_vector(j["mean"], line, "mean"), detail::parse_vector(j["variance"], line, "variance")};
      if (o.mean.size() != o.variance.size()) detail::fail(line, "mean/variance length mismatch");
      p.regressions.push_back(std::move(o));
    }
    if (j.contains("weight")) {
      if (!j["weight"].is_number()) detail::fail(line, "weight must be a number");
      p.weights.push_back(j["weight"].get<double>());
      ++weighted;
    }
  }
  if (!header) throw DataError("line 1: empty predictions file");
  if (weighted != 0 && weighted != p.size()) throw DataError("weights absent on some records");
  return p;
}

inline Predictions load_predictions(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read '" + path + "'");
  return read_predictions(is);
}

inline void save_predictions(const Predictions& p, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write '" + path + "'");
  write_predictions(p, os);
}

/// FNV-1a digest of a file's bytes, hex encoded.
inline std::string file_digest(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (is.read(buf, sizeof buf) || is.gcount() > 0) {
    for (std::streamsize i = 0; i < is.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << h;
  return os.str();
}

} // namespace equicalib::io
