#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "geoshap/explainer.hpp"
#include "geoshap/postprocess.hpp"

namespace geoshap {

inline constexpr int kResultSchemaVersion = 1;

// JSON document with "geoshapley_schema": 1, metadata, per-instance arrays
// and the raw instances. NaN (unexplained rows) is written as null.
void write_result_json(const GeoShapleyResult& result, std::ostream& out);
GeoShapleyResult read_result_json(std::istream& in);
GeoShapleyResult read_result_json_file(const std::string& path);

// Flat CSV, one row per instance:
//   prediction,phi_geo,phi_<name>...,phi_geo_x_<name>...,residual
void write_result_csv(const GeoShapleyResult& result, std::ostream& out);
std::vector<std::string> result_csv_header(const GeoShapleyResult& result);

// Interval bounds with _lo/_hi suffixed columns:
//   phi_geo_lo,phi_geo_hi,phi_<name>_lo,phi_<name>_hi,...
void write_bootstrap_csv(const BootstrapResult& ci,
                         const std::vector<std::string>& feature_names,
                         std::ostream& out);

// Result CSV where estimates whose interval covers zero are written as nan.
void write_masked_result_csv(const GeoShapleyResult& result,
                             const BootstrapResult& ci, std::ostream& out);

}  // namespace geoshap
