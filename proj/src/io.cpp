#include "sbmvar/io.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sbmvar {

namespace fs = std::filesystem;
using nlohmann::json;

int tcode_loss(int code) {
  switch (code) {
    case 1: return 0;
    case 2: return 1;
    case 5: return 1;
    case 6: return 2;
    default: throw std::invalid_argument("unsupported tcode " + std::to_string(code));
  }
}

VectorXd apply_tcode(const VectorXd& series, int code) {
  const int loss = tcode_loss(code);
  const int n = static_cast<int>(series.size());
  if (n < loss + 1)
    throw std::invalid_argument("series too short for tcode " + std::to_string(code));
  if (code == 1) return series;
  if (code == 2) return series.tail(n - 1) - series.head(n - 1);
  // log codes
  VectorXd logs(n);
  for (int i = 0; i < n; ++i) {
    if (series[i] <= 0.0)
      throw std::invalid_argument("non-positive value at index " + std::to_string(i) +
                                  " under log tcode " + std::to_string(code));
    logs[i] = std::log(series[i]);
  }
  VectorXd d1 = 100.0 * (logs.tail(n - 1) - logs.head(n - 1));
  if (code == 5) return d1;
  return d1.tail(n - 2) - d1.head(n - 2);  // code 6
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

TimeSeriesPanel load_panel(const std::string& csv_path,
                           const std::vector<VariableSpec>& variables) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + csv_path);
  std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2) throw std::runtime_error("need a date column plus series columns");

  std::vector<int> col_index;
  for (const VariableSpec& v : variables) {
    int found = -1;
    for (std::size_t c = 1; c < header.size(); ++c)
      if (header[c] == v.name) {
        found = static_cast<int>(c);
        break;
      }
    if (found < 0) throw std::runtime_error("missing column: " + v.name);
    col_index.push_back(found);
  }

  std::vector<std::string> dates;
  std::vector<std::vector<double>> raw(variables.size());
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() < header.size())
      throw std::runtime_error("short row at line " + std::to_string(line_no));
    dates.push_back(cells[0]);
    for (std::size_t v = 0; v < variables.size(); ++v) {
      const std::string& s = cells[col_index[v]];
      try {
        raw[v].push_back(std::stod(s));
      } catch (const std::exception&) {
        throw std::runtime_error("non-numeric cell '" + s + "' in column " +
                                 variables[v].name + " at line " + std::to_string(line_no));
      }
    }
  }
  const int t_raw = static_cast<int>(dates.size());
  if (t_raw == 0) throw std::runtime_error("no data rows in " + csv_path);

  int max_loss = 0;
  for (const VariableSpec& v : variables) max_loss = std::max(max_loss, tcode_loss(v.tcode));
  const int t_out = t_raw - max_loss;
  if (t_out < 1) throw std::runtime_error("sample exhausted by differencing");

  TimeSeriesPanel panel;
  panel.values.resize(t_out, static_cast<int>(variables.size()));
  for (std::size_t v = 0; v < variables.size(); ++v) {
    Eigen::Map<const VectorXd> col(raw[v].data(), t_raw);
    VectorXd tx = apply_tcode(col, variables[v].tcode);
    panel.values.col(static_cast<int>(v)) = tx.tail(t_out);
    panel.names.push_back(variables[v].name);
  }
  panel.dates.assign(dates.begin() + max_loss, dates.end());

  for (int t = 0; t < t_out; ++t)
    for (int j = 0; j < panel.values.cols(); ++j)
      if (!std::isfinite(panel.values(t, j)))
        throw std::runtime_error("non-finite cell in " + panel.names[j] + " at row " +
                                 std::to_string(t));
  panel.validate();
  return panel;
}

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
  throw std::runtime_error("config field '" + path + "': " + msg);
}

template <typename T>
T get_field(const json& j, const std::string& parent, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(parent + "." + key, e.what());
  }
}

GibbsPriorSpec parse_partition_prior(const json& j, const std::string& path) {
  std::string kind = get_field<std::string>(j, path, "kind", "GN");
  GibbsPriorKind k;
  try {
    k = gibbs_prior_kind_from_string(kind);
  } catch (const std::exception& e) {
    config_error(path + ".kind", e.what());
  }
  switch (k) {
    case GibbsPriorKind::Gnedin:
      return GibbsPriorSpec::gnedin(get_field<double>(j, path, "gamma", 0.5));
    case GibbsPriorKind::DirichletMultinomial:
      return GibbsPriorSpec::dirichlet_multinomial(get_field<double>(j, path, "beta", 1.0),
                                                   get_field<int>(j, path, "cap", 0));
    case GibbsPriorKind::DirichletProcess:
      return GibbsPriorSpec::dirichlet_process(get_field<double>(j, path, "alpha", 1.0));
    case GibbsPriorKind::PitmanYor:
    default:
      return GibbsPriorSpec::pitman_yor(get_field<double>(j, path, "alpha", 1.0),
                                        get_field<double>(j, path, "discount", 0.25));
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config parse error: ") + e.what());
  }

  RunConfig rc;
  if (j.contains("data")) {
    const json& d = j["data"];
    rc.data_path = get_field<std::string>(d, "data", "path", "");
    if (d.contains("variables")) {
      if (!d["variables"].is_array()) config_error("data.variables", "expected an array");
      int i = 0;
      for (const json& v : d["variables"]) {
        std::string p = "data.variables[" + std::to_string(i++) + "]";
        VariableSpec vs;
        if (!v.contains("name")) config_error(p + ".name", "required");
        vs.name = get_field<std::string>(v, p, "name", "");
        vs.tcode = get_field<int>(v, p, "tcode", 1);
        if (vs.tcode != 1 && vs.tcode != 2 && vs.tcode != 5 && vs.tcode != 6)
          config_error(p + ".tcode", "must be one of 1, 2, 5, 6");
        rc.variables.push_back(vs);
      }
    }
  }

  VarConfig defaults;
  const json m = j.contains("model") ? j["model"] : json::object();
  rc.var.lags = get_field<int>(m, "model", "lags", defaults.lags);
  rc.var.include_intercept =
      get_field<bool>(m, "model", "intercept", defaults.include_intercept);
  rc.var.n_draws = get_field<int>(m, "model", "draws", defaults.n_draws);
  rc.var.burn_in = get_field<int>(m, "model", "burn_in", defaults.burn_in);
  rc.var.thin = get_field<int>(m, "model", "thin", defaults.thin);
  rc.var.seed = get_field<std::uint64_t>(m, "model", "seed", defaults.seed);
  rc.var.spike_factor = get_field<double>(m, "model", "spike_factor", defaults.spike_factor);
  rc.var.slab_shape = get_field<double>(m, "model", "slab_shape", defaults.slab_shape);
  rc.var.slab_rate = get_field<double>(m, "model", "slab_rate", defaults.slab_rate);
  rc.var.edge_beta_a = get_field<double>(m, "model", "edge_beta_a", defaults.edge_beta_a);
  rc.var.edge_beta_b = get_field<double>(m, "model", "edge_beta_b", defaults.edge_beta_b);
  rc.var.fixed_inclusion_prob =
      get_field<double>(m, "model", "fixed_inclusion_prob", defaults.fixed_inclusion_prob);
  rc.var.store_full_logvol_paths = get_field<bool>(m, "model", "store_full_logvol_paths",
                                                   defaults.store_full_logvol_paths);
  std::string mode = get_field<std::string>(m, "model", "mode", "sbm");
  if (mode == "sbm")
    rc.var.mode = ShrinkageMode::Sbm;
  else if (mode == "ssvs")
    rc.var.mode = ShrinkageMode::SsvsFixed;
  else if (mode == "none")
    rc.var.mode = ShrinkageMode::NoShrinkage;
  else
    config_error("model.mode", "must be one of sbm, ssvs, none");
  if (m.contains("partition_prior"))
    rc.var.partition_prior = parse_partition_prior(m["partition_prior"], "model.partition_prior");

  if (j.contains("forecast")) {
    const json& f = j["forecast"];
    rc.eval_start = get_field<int>(f, "forecast", "eval_start", 0);
    rc.horizons = get_field<std::vector<int>>(f, "forecast", "horizons", rc.horizons);
    rc.focus_vars =
        get_field<std::vector<std::string>>(f, "forecast", "focus", rc.focus_vars);
  }
  if (j.contains("calibration"))
    rc.target_clusters =
        get_field<double>(j["calibration"], "calibration", "target_clusters", 0.0);

  try {
    rc.var.validate();
    rc.var.partition_prior.validate();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("config field 'model': ") + e.what());
  }
  return rc;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_hash(const VarConfig& c) {
  json j;  // nlohmann objects keep keys sorted: serialization is canonical
  j["lags"] = c.lags;
  j["intercept"] = c.include_intercept;
  j["draws"] = c.n_draws;
  j["burn_in"] = c.burn_in;
  j["thin"] = c.thin;
  j["seed"] = c.seed;
  j["spike_factor"] = c.spike_factor;
  j["precision_diag_rate"] = c.precision_diag_rate;
  j["slab_shape"] = c.slab_shape;
  j["slab_rate"] = c.slab_rate;
  j["edge_beta_a"] = c.edge_beta_a;
  j["edge_beta_b"] = c.edge_beta_b;
  j["mode"] = static_cast<int>(c.mode);
  j["fixed_inclusion_prob"] = c.fixed_inclusion_prob;
  j["randomize_sweep_order"] = c.randomize_sweep_order;
  j["prior_kind"] = to_string(c.partition_prior.kind);
  switch (c.partition_prior.kind) {
    case GibbsPriorKind::Gnedin: j["prior_gamma"] = c.partition_prior.gn_gamma; break;
    case GibbsPriorKind::DirichletMultinomial:
      j["prior_beta"] = c.partition_prior.dm_beta;
      j["prior_cap"] = c.partition_prior.dm_cap;
      break;
    case GibbsPriorKind::DirichletProcess:
      j["prior_alpha"] = c.partition_prior.dp_alpha;
      break;
    case GibbsPriorKind::PitmanYor:
      j["prior_alpha"] = c.partition_prior.py_alpha;
      j["prior_discount"] = c.partition_prior.py_discount;
      break;
  }
  std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

namespace {

void write_doubles(const fs::path& p, const std::vector<double>& v) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void write_ints(const fs::path& p, const std::vector<std::int32_t>& v) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(std::int32_t)));
}

std::vector<double> read_doubles(const fs::path& p, std::size_t n) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != n * sizeof(double))
    throw std::runtime_error("truncated file " + p.string());
  return v;
}

std::vector<std::int32_t> read_ints(const fs::path& p, std::size_t n) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::vector<std::int32_t> v(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(std::int32_t)));
  if (static_cast<std::size_t>(in.gcount()) != n * sizeof(std::int32_t))
    throw std::runtime_error("truncated file " + p.string());
  return v;
}

}  // namespace

void save_draw_store(const DrawStore& store, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path root(dir);
  const std::size_t n = store.draws.size();
  const int m = store.n_vars;
  if (n == 0) throw std::invalid_argument("save_draw_store: empty store");
  const int k = static_cast<int>(store.draws[0].coeffs_vec.size());
  const bool has_paths = store.draws[0].log_vol_path.has_value();
  const int path_rows =
      has_paths ? static_cast<int>(store.draws[0].log_vol_path->rows()) : 0;

  std::vector<double> coeffs, lvols, rho, svv, omega, paths;
  std::vector<std::int32_t> adj, z, pi_dim;
  std::vector<double> pi_data;
  for (const Draw& d : store.draws) {
    coeffs.insert(coeffs.end(), d.coeffs_vec.data(), d.coeffs_vec.data() + k);
    lvols.insert(lvols.end(), d.last_log_vols.data(), d.last_log_vols.data() + m);
    rho.insert(rho.end(), d.persistence.data(), d.persistence.data() + m);
    svv.insert(svv.end(), d.innovation_var.data(), d.innovation_var.data() + m);
    omega.insert(omega.end(), d.omega.data(), d.omega.data() + m * m);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) adj.push_back(d.adjacency(i, j));
    for (int i = 0; i < m; ++i) z.push_back(d.assignments[i]);
    const int h = static_cast<int>(d.edge_probs.rows());
    pi_dim.push_back(h);
    pi_data.insert(pi_data.end(), d.edge_probs.data(), d.edge_probs.data() + h * h);
    if (has_paths)
      paths.insert(paths.end(), d.log_vol_path->data(),
                   d.log_vol_path->data() + path_rows * m);
  }

  write_doubles(root / "coeffs.bin", coeffs);
  write_doubles(root / "last_log_vols.bin", lvols);
  write_doubles(root / "persistence.bin", rho);
  write_doubles(root / "innovation_var.bin", svv);
  write_doubles(root / "omega.bin", omega);
  write_ints(root / "adjacency.bin", adj);
  write_ints(root / "assignments.bin", z);
  write_ints(root / "edge_probs_dim.bin", pi_dim);
  write_doubles(root / "edge_probs.bin", pi_data);
  if (has_paths) write_doubles(root / "log_vol_paths.bin", paths);

  json manifest;
  manifest["n_draws"] = n;
  manifest["n_vars"] = m;
  manifest["n_lags"] = store.n_lags;
  manifest["has_intercept"] = store.has_intercept;
  manifest["n_coeffs"] = k;
  manifest["seed"] = store.seed;
  manifest["config_hash"] = store.config_hash;
  manifest["has_logvol_paths"] = has_paths;
  manifest["logvol_path_rows"] = path_rows;
  manifest["format_version"] = 1;
  std::ofstream mf(root / "manifest.json");
  mf << manifest.dump(2) << "\n";
}

DrawStore load_draw_store(const std::string& dir, const std::string& expected_config_hash) {
  const fs::path root(dir);
  std::ifstream mf(root / "manifest.json");
  if (!mf) throw std::runtime_error("cannot read manifest in " + dir);
  json manifest = json::parse(mf);

  DrawStore store;
  const std::size_t n = manifest.at("n_draws").get<std::size_t>();
  store.n_vars = manifest.at("n_vars").get<int>();
  store.n_lags = manifest.at("n_lags").get<int>();
  store.has_intercept = manifest.at("has_intercept").get<bool>();
  store.seed = manifest.at("seed").get<std::uint64_t>();
  store.config_hash = manifest.at("config_hash").get<std::string>();
  const int k = manifest.at("n_coeffs").get<int>();
  const bool has_paths = manifest.at("has_logvol_paths").get<bool>();
  const int path_rows = manifest.at("logvol_path_rows").get<int>();
  const int m = store.n_vars;

  if (!expected_config_hash.empty() && expected_config_hash != store.config_hash)
    std::cerr << "warning: config hash mismatch (stored " << store.config_hash
              << ", expected " << expected_config_hash << ")\n";

  auto coeffs = read_doubles(root / "coeffs.bin", n * k);
  auto lvols = read_doubles(root / "last_log_vols.bin", n * m);
  auto rho = read_doubles(root / "persistence.bin", n * m);
  auto svv = read_doubles(root / "innovation_var.bin", n * m);
  auto omega = read_doubles(root / "omega.bin", n * m * m);
  auto adj = read_ints(root / "adjacency.bin", n * m * m);
  auto z = read_ints(root / "assignments.bin", n * m);
  auto pi_dim = read_ints(root / "edge_probs_dim.bin", n);
  std::size_t pi_total = 0;
  for (std::int32_t h : pi_dim) pi_total += static_cast<std::size_t>(h) * h;
  auto pi_data = read_doubles(root / "edge_probs.bin", pi_total);
  std::vector<double> paths;
  if (has_paths) paths = read_doubles(root / "log_vol_paths.bin", n * path_rows * m);

  std::size_t pi_off = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Draw d;
    d.coeffs_vec = Eigen::Map<const VectorXd>(coeffs.data() + i * k, k);
    d.last_log_vols = Eigen::Map<const VectorXd>(lvols.data() + i * m, m);
    d.persistence = Eigen::Map<const VectorXd>(rho.data() + i * m, m);
    d.innovation_var = Eigen::Map<const VectorXd>(svv.data() + i * m, m);
    d.omega = Eigen::Map<const MatrixXd>(omega.data() + i * m * m, m, m);
    d.adjacency.resize(m, m);
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < m; ++r) d.adjacency(r, c) = adj[i * m * m + c * m + r];
    d.assignments.resize(m);
    for (int r = 0; r < m; ++r) d.assignments[r] = z[i * m + r];
    const int h = pi_dim[i];
    d.edge_probs = Eigen::Map<const MatrixXd>(pi_data.data() + pi_off, h, h);
    pi_off += static_cast<std::size_t>(h) * h;
    if (has_paths)
      d.log_vol_path =
          Eigen::Map<const MatrixXd>(paths.data() + i * path_rows * m, path_rows, m);
    store.draws.push_back(std::move(d));
  }
  return store;
}

}  // namespace sbmvar
