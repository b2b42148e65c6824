#include "gradmatch/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gradmatch {

namespace {

using ordered_json = nlohmann::ordered_json;

void dump_value(const ordered_json& j, int indent, int depth, std::string& out) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case ordered_json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_number(x) : "null";
      return;
    }
    case ordered_json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Numeric arrays stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const auto& v) { return v.is_number(); });
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        dump_value(v, indent, depth + 1, out);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case ordered_json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += ordered_json(key).dump();
        out += indent < 0 ? ":" : ": ";
        dump_value(v, indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    default:
      out += j.dump();
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) parts.push_back(cell);
  if (!line.empty() && line.back() == sep) parts.emplace_back();
  return parts;
}

double parse_number(const std::string& cell, int line_no) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw SchemaError("line " + std::to_string(line_no) + ": '" + cell + "' is not a number");
  }
  return v;
}

std::string join_header(const std::string& first, int components) {
  std::string h = first;
  for (int k = 0; k < components; ++k) h += ",y" + std::to_string(k + 1);
  return h;
}

ordered_json vector_json(std::span<const double> v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(x);
  return a;
}

ordered_json ic_json(const InitialConditions& ic) {
  return {{"values", vector_json(ic.values)}, {"derivatives", vector_json(ic.derivatives)}};
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dump_json(const nlohmann::ordered_json& j, int indent) {
  std::string out;
  dump_value(j, indent, 0, out);
  out += '\n';
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string dataset_csv(const Dataset& data) {
  std::string out = join_header("t", data.components()) + "\n";
  for (int i = 0; i < data.n_times(); ++i) {
    out += format_number(data.times[static_cast<std::size_t>(i)]);
    for (int k = 0; k < data.components(); ++k) out += "," + format_number(data.values(i, k));
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json dataset_meta(const Dataset& data) {
  return {{"model", data.model},
          {"theta_true", vector_json(data.theta_true)},
          {"ic", ic_json(data.ic)},
          {"sigma", data.noise_sigma},
          {"seed", data.seed},
          {"generator", data.generator},
          {"t_span", vector_json(std::vector<double>{data.t_start, data.t_end})},
          {"n_points", data.n_times()}};
}

std::filesystem::path meta_path_for(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".meta.json");
  return p;
}

void save_dataset(const Dataset& data, const std::filesystem::path& csv) {
  write_text_file(csv, dataset_csv(data));
  write_text_file(meta_path_for(csv), dump_json(dataset_meta(data)));
}

Dataset parse_dataset_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("dataset CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, ',');
  const int k_count = static_cast<int>(header.size()) - 1;
  if (k_count < 1 || k_count > 2 || line != join_header("t", k_count)) {
    throw SchemaError("dataset CSV header must be 't,y1' or 't,y1,y2', got '" + line + "'");
  }
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (static_cast<int>(cells.size()) != k_count + 1) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(k_count + 1) + " fields");
    }
    times.push_back(parse_number(cells[0], line_no));
    std::vector<double> row;
    for (int k = 0; k < k_count; ++k) row.push_back(parse_number(cells[static_cast<std::size_t>(k + 1)], line_no));
    rows.push_back(std::move(row));
  }
  if (times.size() < 2) throw SchemaError("dataset CSV needs at least two rows");
  Dataset d;
  d.times = std::move(times);
  d.values.resize(static_cast<Eigen::Index>(rows.size()), k_count);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int k = 0; k < k_count; ++k) d.values(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
  }
  d.t_start = d.times.front();
  d.t_end = d.times.back();
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return d;
}

Dataset load_dataset(const std::filesystem::path& csv) {
  Dataset d = parse_dataset_csv(read_text_file(csv));
  const auto meta_path = meta_path_for(csv);
  if (!std::filesystem::exists(meta_path)) return d;
  try {
    const auto meta = nlohmann::json::parse(read_text_file(meta_path));
    d.model = meta.at("model").get<std::string>();
    d.theta_true = meta.at("theta_true").get<std::vector<double>>();
    d.ic.values = meta.at("ic").at("values").get<std::vector<double>>();
    d.ic.derivatives = meta.at("ic").at("derivatives").get<std::vector<double>>();
    d.noise_sigma = meta.at("sigma").get<double>();
    d.seed = meta.at("seed").get<std::uint64_t>();
    d.generator = meta.at("generator").get<std::string>();
    if (meta.at("n_points").get<int>() != d.n_times()) {
      throw SchemaError("metadata n_points disagrees with " + csv.string());
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(meta_path.string() + ": " + e.what());
  }
  return d;
}

std::string spline_csv(const SplineSystem& sys, const SplineState& spline) {
  const int k_count = static_cast<int>(spline.values.cols());
  std::string out = join_header("t", k_count) + "\n";
  for (int j = 0; j < sys.n_fine(); ++j) {
    out += format_number(sys.fine_grid[static_cast<std::size_t>(j)]);
    for (int k = 0; k < k_count; ++k) out += "," + format_number(spline.values(j, k));
    out += '\n';
  }
  return out;
}

std::string trace_csv(const FitResult& result, const OdeModel& model) {
  std::string out = "n,w";
  for (const auto& p : model.param_names) out += "," + p;
  out += ",sigma_d,sigma_m,delta_y,delta_theta,weight_flag\n";
  for (const auto& e : result.trace) {
    out += std::to_string(e.n) + "," + format_number(e.w);
    for (double t : e.theta_hat) out += "," + format_number(t);
    out += "," + format_number(e.sigma_d) + "," + format_number(e.sigma_m) + "," +
           format_number(e.delta_y) + "," + format_number(e.delta_theta) + "," +
           to_string(e.weight_flag) + "\n";
  }
  return out;
}

nlohmann::ordered_json fit_json(const FitResult& result, const OdeModel& model,
                                std::span<const double> theta0, const ProfilerOptions& opts) {
  ordered_json trace = ordered_json::array();
  for (const auto& e : result.trace) {
    trace.push_back({{"n", e.n},
                     {"w", e.w},
                     {"theta_hat", vector_json(e.theta_hat)},
                     {"sigma_d", e.sigma_d},
                     {"sigma_m", e.sigma_m},
                     {"delta_y", e.delta_y},
                     {"delta_theta", e.delta_theta},
                     {"weight_flag", to_string(e.weight_flag)}});
  }
  const auto& st = result.final_state;
  const auto m = static_cast<Eigen::Index>(st.spline.beta.size() / model.components);
  ordered_json beta = ordered_json::array();
  for (int k = 0; k < model.components; ++k) {
    const Vector block = st.spline.beta.segment(k * m, m);
    beta.push_back(vector_json(std::span<const double>(block.data(), static_cast<std::size_t>(m))));
  }
  ordered_json names = ordered_json::array();
  for (const auto& p : model.param_names) names.push_back(p);

  return {{"model", model.name},
          {"param_names", names},
          {"theta_hat", vector_json(result.theta_hat)},
          {"theta0", vector_json(theta0)},
          {"converged", result.converged},
          {"reason", result.reason},
          {"iterations", result.iterations},
          {"final_weight", st.w},
          {"sigma_d", st.sigma_d},
          {"sigma_m", st.sigma_m},
          {"initial_conditions", ic_json(result.initial_conditions)},
          {"settings",
           {{"n_basis", static_cast<int>(m)},
            {"n_fine", static_cast<int>(st.spline.values.rows())},
            {"penalty", to_string(opts.spline.penalty)},
            {"knots_at_breaks", opts.spline.knots_at_breaks},
            {"linear_terms", to_string(opts.linear_terms)},
            {"weight_rule", to_string(opts.weight_rule)},
            {"w_initial", opts.w_initial},
            {"tol_y", opts.tol_y},
            {"tol_theta", opts.tol_theta},
            {"n_max", opts.n_max},
            {"noise_variance", opts.noise_variance}}},
          {"beta", beta},
          {"trace", trace}};
}

std::string slice_csv(const LoglikSurface& surface) {
  if (surface.axes.size() != 1) throw std::invalid_argument("slice_csv needs a 1-D surface");
  std::string out = "param_value,norm_loglik\n";
  for (std::size_t i = 0; i < surface.axes[0].size(); ++i) {
    out += format_number(surface.axes[0][i]) + "," + format_number(surface.values[i]) + "\n";
  }
  return out;
}

std::string grid_csv(const LoglikSurface& surface) {
  if (surface.axes.size() != 2) throw std::invalid_argument("grid_csv needs a 2-D surface");
  std::string out = "p1,p2,norm_loglik\n";
  for (std::size_t i = 0; i < surface.axes[0].size(); ++i) {
    for (std::size_t j = 0; j < surface.axes[1].size(); ++j) {
      out += format_number(surface.axes[0][i]) + "," + format_number(surface.axes[1][j]) + "," +
             format_number(surface.at(i, j)) + "\n";
    }
  }
  return out;
}

}  // namespace gradmatch
