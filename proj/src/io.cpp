#include "chb/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chb/version.hpp"
#include "json.hpp"

namespace chb {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream os(path, std::ios::binary);
  require(os.good(), ErrorKind::io_error, "cannot open for writing: " + path);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), ErrorKind::io_error, "cannot open for reading: " + path);
  return is;
}

std::vector<double> parse_csv_row(const std::string& line, int expected,
                                  const std::string& path) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  require(int(out.size()) == expected, ErrorKind::io_error,
          "malformed CSV row in " + path);
  return out;
}

std::string step_name(const std::string& base, int k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04d.csv", base.c_str(), k);
  return buf;
}

json grid_json(const StructuredGrid& g) {
  return json{{"nx", g.nx}, {"ny", g.ny}, {"lx", g.lx}, {"ly", g.ly}};
}

}  // namespace

void write_scalar_csv(const std::string& path, const ScalarField& f) {
  std::ofstream os = open_out(path);
  os << "x,y,value\n";
  const StructuredGrid& g = *f.grid;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      os << format_double(g.x(i)) << ',' << format_double(g.y(j)) << ','
         << format_double(f.v[g.node(i, j)]) << '\n';
  require(os.good(), ErrorKind::io_error, "write failed: " + path);
}

ScalarField read_scalar_csv(const std::string& path, GridPtr grid) {
  std::ifstream is = open_in(path);
  std::string line;
  require(bool(std::getline(is, line)) && line.rfind("x,y,value", 0) == 0,
          ErrorKind::io_error, "missing scalar CSV header in " + path);
  ScalarField f(grid);
  int count = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    require(count < grid->num_nodes(), ErrorKind::io_error,
            "too many rows in " + path);
    f.v[count++] = parse_csv_row(line, 3, path)[2];
  }
  require(count == grid->num_nodes(), ErrorKind::io_error,
          "row count does not match grid in " + path);
  return f;
}

void write_vector_csv(const std::string& path, const VectorField2& f) {
  std::ofstream os = open_out(path);
  os << "x,y,vx,vy\n";
  const StructuredGrid& g = *f.grid;
  const int n = g.num_nodes();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      int id = g.node(i, j);
      os << format_double(g.x(i)) << ',' << format_double(g.y(j)) << ','
         << format_double(f.v[id]) << ',' << format_double(f.v[n + id]) << '\n';
    }
  require(os.good(), ErrorKind::io_error, "write failed: " + path);
}

VectorField2 read_vector_csv(const std::string& path, GridPtr grid) {
  std::ifstream is = open_in(path);
  std::string line;
  require(bool(std::getline(is, line)) && line.rfind("x,y,vx,vy", 0) == 0,
          ErrorKind::io_error, "missing vector CSV header in " + path);
  VectorField2 f(grid);
  const int n = grid->num_nodes();
  int count = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    require(count < n, ErrorKind::io_error, "too many rows in " + path);
    auto row = parse_csv_row(line, 4, path);
    f.v[count] = row[2];
    f.v[n + count] = row[3];
    ++count;
  }
  require(count == n, ErrorKind::io_error,
          "row count does not match grid in " + path);
  return f;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os = open_out(path);
  os << content;
  require(os.good(), ErrorKind::io_error, "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream is = open_in(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

bool path_exists(const std::string& path) { return fs::exists(path); }

void write_trajectory(const std::string& dir, const Trajectory& traj,
                      const std::string& kind) {
  fs::create_directories(dir);
  json manifest{{"kind", kind},
                {"grid", grid_json(*traj.grid)},
                {"dt", traj.dt},
                {"n_steps", traj.n_steps},
                {"fields", {"phi", "mu", "sigma", "vel", "p"}},
                {"max_div_residual", traj.max_div_residual},
                {"version", kVersion}};
  write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
  for (int k = 0; k <= traj.n_steps; ++k) {
    const StateSnapshot& s = traj.snaps[k];
    write_scalar_csv(dir + "/" + step_name("phi", k), s.phi);
    write_scalar_csv(dir + "/" + step_name("mu", k), s.mu);
    write_scalar_csv(dir + "/" + step_name("sigma", k), s.sigma);
    write_scalar_csv(dir + "/" + step_name("p", k), s.pressure);
    write_vector_csv(dir + "/" + step_name("vel", k), s.vel);
  }
  std::ostringstream os;
  os << "t,mass_phi,energy,vel_l2,sigma_min,sigma_max,div_residual\n";
  for (const SeriesRow& r : traj.series)
    os << format_double(r.t) << ',' << format_double(r.mass) << ','
       << format_double(r.energy) << ',' << format_double(r.vel_l2) << ','
       << format_double(r.sigma_min) << ',' << format_double(r.sigma_max) << ','
       << format_double(r.div_residual) << '\n';
  write_text_file(dir + "/series.csv", os.str());
}

void write_linearized(const std::string& dir, const LinearizedSolution& sol) {
  fs::create_directories(dir);
  json manifest{{"kind", "linearized"},
                {"grid", grid_json(*sol.grid)},
                {"dt", sol.dt},
                {"n_steps", sol.n_steps},
                {"fields", {"phi", "mu", "sigma", "vel", "p"}},
                {"version", kVersion}};
  write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
  for (int k = 0; k <= sol.n_steps; ++k) {
    const StateSnapshot& s = sol.snaps[k];
    write_scalar_csv(dir + "/" + step_name("phi", k), s.phi);
    write_scalar_csv(dir + "/" + step_name("mu", k), s.mu);
    write_scalar_csv(dir + "/" + step_name("sigma", k), s.sigma);
    write_scalar_csv(dir + "/" + step_name("p", k), s.pressure);
    write_vector_csv(dir + "/" + step_name("vel", k), s.vel);
  }
}

void write_costate(const std::string& dir, const CostateTrajectory& costate) {
  fs::create_directories(dir);
  json manifest{{"kind", "costate"},
                {"grid", grid_json(*costate.grid)},
                {"dt", costate.dt},
                {"n_steps", costate.n_steps},
                {"fields", {"phi_a", "tau", "rho", "w", "q"}},
                {"version", kVersion}};
  write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
  for (int k = 0; k <= costate.n_steps; ++k) {
    const CostateSnapshot& s = costate.snaps[k];
    write_scalar_csv(dir + "/" + step_name("phi_a", k), s.phi_a);
    write_scalar_csv(dir + "/" + step_name("tau", k), s.tau);
    write_scalar_csv(dir + "/" + step_name("rho", k), s.rho);
    write_scalar_csv(dir + "/" + step_name("q", k), s.q);
    write_vector_csv(dir + "/" + step_name("w", k), s.w);
  }
}

void write_control(const std::string& dir, const ControlField& u) {
  fs::create_directories(dir);
  json manifest{{"kind", "control"},
                {"grid", grid_json(*u.grid)},
                {"dt", u.dt},
                {"n_steps", u.n_steps},
                {"version", kVersion}};
  write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
  for (int s = 0; s < u.n_steps; ++s) {
    write_scalar_csv(dir + "/" + step_name("u", s),
                     ScalarField(u.grid, u.values[s]));
    write_scalar_csv(dir + "/" + step_name("lower", s),
                     ScalarField(u.grid, u.lower[s]));
    write_scalar_csv(dir + "/" + step_name("upper", s),
                     ScalarField(u.grid, u.upper[s]));
  }
}

ControlField read_control(const std::string& dir, GridPtr grid) {
  std::string mtext = read_text_file(dir + "/manifest.json");
  json manifest = json::parse(mtext);
  require(manifest.at("kind") == "control", ErrorKind::io_error,
          "not a control directory: " + dir);
  ControlField u;
  u.grid = grid;
  u.dt = manifest.at("dt").get<double>();
  u.n_steps = manifest.at("n_steps").get<int>();
  u.values.resize(u.n_steps);
  u.lower.resize(u.n_steps);
  u.upper.resize(u.n_steps);
  for (int s = 0; s < u.n_steps; ++s) {
    u.values[s] = read_scalar_csv(dir + "/" + step_name("u", s), grid).v;
    u.lower[s] = read_scalar_csv(dir + "/" + step_name("lower", s), grid).v;
    u.upper[s] = read_scalar_csv(dir + "/" + step_name("upper", s), grid).v;
  }
  u.validate();
  return u;
}

void write_history_csv(const std::string& path,
                       const std::vector<PGHistoryRow>& rows) {
  std::ostringstream os;
  os << "iter,cost,residual,step_length\n";
  for (const PGHistoryRow& r : rows)
    os << r.iter << ',' << format_double(r.cost) << ','
       << format_double(r.residual) << ',' << format_double(r.step) << '\n';
  write_text_file(path, os.str());
}

std::vector<PGHistoryRow> read_history_csv(const std::string& path) {
  std::ifstream is = open_in(path);
  std::string line;
  require(bool(std::getline(is, line)) &&
              line.rfind("iter,cost,residual,step_length", 0) == 0,
          ErrorKind::io_error, "missing history header in " + path);
  std::vector<PGHistoryRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto v = parse_csv_row(line, 4, path);
    rows.push_back({int(v[0]), v[1], v[2], v[3]});
  }
  return rows;
}

}  // namespace chb
