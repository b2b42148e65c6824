#pragma once

#include "gradmatch/datagen.hpp"
#include "gradmatch/likelihood.hpp"
#include "gradmatch/profiler.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

namespace gradmatch {

/// Input file does not match the documented schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// %.17g
std::string format_number(double x);

/// Serialises `j` like nlohmann's dump() but prints floats with 17
/// significant digits.
std::string dump_json(const nlohmann::ordered_json& j, int indent = 2);

std::string read_text_file(const std::filesystem::path& path);
/// Creates missing parent directories; throws std::runtime_error when the
/// file cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Header `t,y1[,y2]`, one row per time point.
std::string dataset_csv(const Dataset& data);
nlohmann::ordered_json dataset_meta(const Dataset& data);

/// `data.meta.json` for `data.csv`, `foo.meta.json` for `foo.csv`.
std::filesystem::path meta_path_for(const std::filesystem::path& csv);

void save_dataset(const Dataset& data, const std::filesystem::path& csv);

/// Parses the CSV body only; provenance fields stay empty.
Dataset parse_dataset_csv(const std::string& text);

/// Reads the CSV and, when present, its sidecar metadata.
Dataset load_dataset(const std::filesystem::path& csv);

/// Fine-grid spline values, header `t,y1[,y2]`.
std::string spline_csv(const SplineSystem& sys, const SplineState& spline);

/// n,w,<params>,sigma_d,sigma_m,delta_y,delta_theta,weight_flag
std::string trace_csv(const FitResult& result, const OdeModel& model);

nlohmann::ordered_json fit_json(const FitResult& result, const OdeModel& model,
                                  std::span<const double> theta0, const ProfilerOptions& opts);

/// `param_value,norm_loglik`
std::string slice_csv(const LoglikSurface& surface);
/// `p1,p2,norm_loglik`, p1 outer.
std::string grid_csv(const LoglikSurface& surface);

}  // namespace gradmatch
