#include "geoshap/result_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "geoshap/errors.hpp"
#include "geoshap/io.hpp"

namespace geoshap {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json number(double value) {
  if (!std::isfinite(value)) return nullptr;
  return value;
}

double to_double(const json& value) {
  if (value.is_null()) return kNaN;
  if (!value.is_number()) throw DataError("expected a number in result JSON");
  return value.get<double>();
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
  return out;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    out.push_back(std::move(row));
  }
  return out;
}

Vector vector_from(const json& value, Eigen::Index n, const char* name) {
  if (!value.is_array() || static_cast<Eigen::Index>(value.size()) != n) {
    throw DataError(std::string("result field '") + name + "' has the wrong length");
  }
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = to_double(value[i]);
  return out;
}

Matrix matrix_from(const json& value, Eigen::Index n, Eigen::Index k,
                   const char* name) {
  if (!value.is_array() || static_cast<Eigen::Index>(value.size()) != n) {
    throw DataError(std::string("result field '") + name + "' has the wrong shape");
  }
  Matrix out(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = value[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != k) {
      throw DataError(std::string("result field '") + name + "' has the wrong shape");
    }
    for (Eigen::Index j = 0; j < k; ++j) out(i, j) = to_double(row[j]);
  }
  return out;
}

const json& field(const json& doc, const char* name) {
  if (!doc.contains(name)) {
    throw DataError(std::string("result JSON lacks field '") + name + "'");
  }
  return doc[name];
}

void write_row(std::ostream& out, const std::vector<double>& values) {
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (c) out << ',';
    out << format_double(values[c]);
  }
  out << '\n';
}

void write_header(std::ostream& out, const std::vector<std::string>& header) {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out << ',';
    out << header[c];
  }
  out << '\n';
}

}  // namespace

void write_result_json(const GeoShapleyResult& result, std::ostream& out) {
  const auto& meta = result.metadata;
  json doc;
  doc["geoshapley_schema"] = kResultSchemaVersion;
  doc["metadata"] = {
      {"feature_names", meta.feature_names},
      {"geo_indices", meta.geo_indices},
      {"geo_names", meta.geo_names()},
      {"background", meta.background},
      {"predictor", meta.predictor},
      {"seed", meta.seed},
  };
  doc["n"] = result.size();
  doc["base_value"] = number(result.base_value);
  doc["prediction"] = vector_json(result.prediction);
  doc["phi_geo"] = vector_json(result.phi_geo);
  doc["phi_main"] = matrix_json(result.phi_main);
  doc["phi_geo_interaction"] = matrix_json(result.phi_geo_interaction);
  doc["reconstruction_residual"] = vector_json(result.reconstruction_residual);
  json explained = json::array();
  for (bool e : result.explained) explained.push_back(e);
  doc["explained"] = std::move(explained);
  doc["failures"] = result.failures;
  doc["instances"] = matrix_json(result.instances);
  out << doc.dump(1) << '\n';
}

GeoShapleyResult read_result_json(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(std::string("result JSON does not parse: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("geoshapley_schema")) {
    throw DataError("not a GeoShapley result file");
  }
  if (doc["geoshapley_schema"] != kResultSchemaVersion) {
    throw DataError("unsupported result schema version " +
                    doc["geoshapley_schema"].dump());
  }
  GeoShapleyResult result;
  try {
    const json& meta = field(doc, "metadata");
    result.metadata.feature_names =
        field(meta, "feature_names").get<std::vector<std::string>>();
    result.metadata.geo_indices = field(meta, "geo_indices").get<std::vector<int>>();
    result.metadata.background = field(meta, "background").get<std::string>();
    result.metadata.predictor = field(meta, "predictor").get<std::string>();
    result.metadata.seed = field(meta, "seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed result metadata: ") + e.what());
  }
  const Eigen::Index p =
      static_cast<Eigen::Index>(result.metadata.feature_names.size());
  const Eigen::Index k =
      p - static_cast<Eigen::Index>(result.metadata.geo_indices.size());
  const Eigen::Index n = field(doc, "prediction").size();

  result.base_value = to_double(field(doc, "base_value"));
  result.prediction = vector_from(doc["prediction"], n, "prediction");
  result.phi_geo = vector_from(field(doc, "phi_geo"), n, "phi_geo");
  result.phi_main = matrix_from(field(doc, "phi_main"), n, k, "phi_main");
  result.phi_geo_interaction = matrix_from(field(doc, "phi_geo_interaction"), n,
                                           k, "phi_geo_interaction");
  result.reconstruction_residual = vector_from(
      field(doc, "reconstruction_residual"), n, "reconstruction_residual");
  result.instances = matrix_from(field(doc, "instances"), n, p, "instances");
  try {
    result.explained = field(doc, "explained").get<std::vector<bool>>();
    result.failures = field(doc, "failures").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed result flags: ") + e.what());
  }
  if (static_cast<Eigen::Index>(result.explained.size()) != n ||
      static_cast<Eigen::Index>(result.failures.size()) != n) {
    throw DataError("result flags do not match the instance count");
  }
  return result;
}

GeoShapleyResult read_result_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open result file: " + path);
  return read_result_json(in);
}

std::vector<std::string> result_csv_header(const GeoShapleyResult& result) {
  std::vector<std::string> header{"prediction", "phi_geo"};
  const auto names = result.metadata.non_geo_names();
  for (const auto& name : names) header.push_back("phi_" + name);
  for (const auto& name : names) header.push_back("phi_geo_x_" + name);
  header.push_back("residual");
  return header;
}

void write_result_csv(const GeoShapleyResult& result, std::ostream& out) {
  write_header(out, result_csv_header(result));
  const int k = result.num_features();
  std::vector<double> row;
  for (int i = 0; i < result.size(); ++i) {
    row.assign({result.prediction[i], result.phi_geo[i]});
    for (int j = 0; j < k; ++j) row.push_back(result.phi_main(i, j));
    for (int j = 0; j < k; ++j) row.push_back(result.phi_geo_interaction(i, j));
    row.push_back(result.reconstruction_residual[i]);
    write_row(out, row);
  }
}

void write_bootstrap_csv(const BootstrapResult& ci,
                         const std::vector<std::string>& feature_names,
                         std::ostream& out) {
  const auto k = ci.phi_main_lo.cols();
  if (static_cast<Eigen::Index>(feature_names.size()) != k) {
    throw ConfigError("bootstrap feature names do not match the interval shape");
  }
  std::vector<std::string> header{"phi_geo_lo", "phi_geo_hi"};
  for (const auto& name : feature_names) {
    header.push_back("phi_" + name + "_lo");
    header.push_back("phi_" + name + "_hi");
  }
  for (const auto& name : feature_names) {
    header.push_back("phi_geo_x_" + name + "_lo");
    header.push_back("phi_geo_x_" + name + "_hi");
  }
  write_header(out, header);
  std::vector<double> row;
  for (Eigen::Index i = 0; i < ci.phi_geo_lo.size(); ++i) {
    row.assign({ci.phi_geo_lo[i], ci.phi_geo_hi[i]});
    for (Eigen::Index j = 0; j < k; ++j) {
      row.push_back(ci.phi_main_lo(i, j));
      row.push_back(ci.phi_main_hi(i, j));
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      row.push_back(ci.phi_geo_interaction_lo(i, j));
      row.push_back(ci.phi_geo_interaction_hi(i, j));
    }
    write_row(out, row);
  }
}

void write_masked_result_csv(const GeoShapleyResult& result,
                             const BootstrapResult& ci, std::ostream& out) {
  const int k = result.num_features();
  if (ci.phi_geo_lo.size() != result.size() || ci.phi_main_lo.cols() != k) {
    throw DataError("confidence intervals do not match the result shape");
  }
  auto masked = [&](const Vector& point, const Vector& lo, const Vector& hi) {
    Vector out = point;
    const auto keep = significance_mask(point, lo, hi);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      if (!keep[i]) out[i] = kNaN;
    }
    return out;
  };
  GeoShapleyResult copy = result;
  copy.phi_geo = masked(result.phi_geo, ci.phi_geo_lo, ci.phi_geo_hi);
  for (int j = 0; j < k; ++j) {
    copy.phi_main.col(j) = masked(result.phi_main.col(j), ci.phi_main_lo.col(j),
                                  ci.phi_main_hi.col(j));
    copy.phi_geo_interaction.col(j) =
        masked(result.phi_geo_interaction.col(j),
               ci.phi_geo_interaction_lo.col(j), ci.phi_geo_interaction_hi.col(j));
  }
  write_result_csv(copy, out);
}

}  // namespace geoshap
