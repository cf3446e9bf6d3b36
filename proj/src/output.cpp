#include "qfgp/output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qfgp/error.hpp"

namespace qfgp {

namespace {

std::string cell_text(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return format_number(*d);
  if (const long long* i = std::get_if<long long>(&c)) return std::to_string(*i);
  const std::string& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + "\"";
}

nlohmann::json cell_json(const Cell& c) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, c);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw Error("io", "cannot write " + path.string());
}

std::string shortest(double x) { return nlohmann::json(x).dump(); }

std::string tolerances(const RunConfig& c) {
  const NumericsConfig& n = c.sim.numerics;
  std::ostringstream os;
  os << "rel_tol=" << shortest(n.integrator.rel_tol) << " abs_tol=" << shortest(n.integrator.abs_tol)
     << " omega_tol=" << shortest(n.omega_tol) << " n_theta=" << n.n_theta
     << " kernel_dt=" << shortest(n.kernel_dt)
     << " samples_per_cycle=" << n.integrator.samples_per_cycle;
  return os.str();
}

void push_coords(std::vector<Cell>& row, const SweepPoint& p) {
  for (const auto& [name, value] : p.coords) {
    if (const double* d = std::get_if<double>(&value)) {
      row.emplace_back(*d);
    } else {
      row.emplace_back(std::get<std::string>(value));
    }
  }
}

void push_phase_row(std::vector<Cell>& row, const PhaseRow& r) {
  row.emplace_back(static_cast<long long>(r.cycle));
  row.emplace_back(r.phi_g);
  row.emplace_back(r.phi_c);
  row.emplace_back(r.delta_phi);
  row.emplace_back(r.delta_phi_static);
  row.emplace_back(r.delta_phi_velocity);
  row.emplace_back(r.velocity_observable);
}

const std::vector<std::string> kPhaseColumns = {
    "N", "phi_g", "phi_c", "delta_phi", "delta_phi_static", "delta_phi_velocity",
    "velocity_observable"};

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string provenance_header(const Provenance& p) {
  std::ostringstream os;
  os << "# qfgp " << QFGP_VERSION << "\n";
  os << "# command: " << p.command << "\n";
  os << "# config_digest: " << config_digest(p.config) << "\n";
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", p.wall_time_s);
  os << "# wall_time_s: " << wall << "\n";
  os << "# tolerances: " << tolerances(p.config) << "\n";
  os << "# defaulted:";
  for (const auto& k : p.config.defaulted) os << ' ' << k;
  os << "\n";
  for (const auto& [k, v] : p.notes) os << "# " << k << ": " << v << "\n";
  os << "# config: " << canonical_text(p.config) << "\n";
  return os.str();
}

nlohmann::json provenance_json(const Provenance& p) {
  nlohmann::json notes = nlohmann::json::object();
  for (const auto& [k, v] : p.notes) notes[k] = v;
  return {{"version", QFGP_VERSION},
          {"command", p.command},
          {"config_digest", config_digest(p.config)},
          {"wall_time_s", p.wall_time_s},
          {"tolerances", tolerances(p.config)},
          {"defaulted", p.config.defaulted},
          {"notes", notes},
          {"config", canonical_json(p.config)}};
}

std::string csv_text(const Provenance& p, const Table& t) {
  std::ostringstream os;
  os << provenance_header(p);
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) os << ',';
    os << t.columns[i];
  }
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << cell_text(row[i]);
    }
    os << '\n';
  }
  return os.str();
}

nlohmann::json json_document(const Provenance& p, const Table& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const Cell& c : row) r.push_back(cell_json(c));
    rows.push_back(std::move(r));
  }
  return {{"provenance", provenance_json(p)}, {"columns", t.columns}, {"rows", rows}};
}

std::vector<std::filesystem::path> write_outputs(const Provenance& p, const std::string& stem,
                                                 const Table& t) {
  const std::filesystem::path dir = p.config.output.directory;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("io", "cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  if (p.config.output.csv) {
    written.push_back(dir / (stem + ".csv"));
    write_file(written.back(), csv_text(p, t));
  }
  if (p.config.output.json) {
    written.push_back(dir / (stem + ".json"));
    write_file(written.back(), json_document(p, t).dump(1) + "\n");
  }
  return written;
}

std::string data_section(const std::string& csv) {
  std::size_t pos = 0;
  while (pos < csv.size() && csv[pos] == '#') {
    const std::size_t nl = csv.find('\n', pos);
    if (nl == std::string::npos) return {};
    pos = nl + 1;
  }
  return csv.substr(pos);
}

std::string embedded_config(const std::string& csv) {
  static const std::string tag = "# config: ";
  const std::size_t at = csv.find(tag);
  if (at == std::string::npos) throw Error("io", "no embedded config in file");
  const std::size_t start = at + tag.size();
  return csv.substr(start, csv.find('\n', start) - start);
}

Table kernel_table(const KernelTable& k) {
  Table t;
  t.columns = {"t", "nu", "eta"};
  t.rows.reserve(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) t.rows.push_back({k.t[i], k.nu[i], k.eta[i]});
  return t;
}

Table trajectory_table(const Trajectory& traj, int stride) {
  Table t;
  t.columns = {"t", "cycle", "x", "y", "z", "purity", "re_rho_eg", "im_rho_eg"};
  for (std::size_t i = 0; i < traj.samples.size(); i += static_cast<std::size_t>(stride)) {
    const TrajectorySample& s = traj.samples[i];
    const BlochVector b = bloch_of(s.rho);
    const double cycle = static_cast<double>(i) / traj.samples_per_cycle;
    t.rows.push_back({s.t, cycle, b.x, b.y, b.z, s.purity, s.rho(0, 1).real(), s.rho(0, 1).imag()});
  }
  return t;
}

Table phase_table(const PhaseSeries& s) {
  Table t;
  t.columns = kPhaseColumns;
  for (const PhaseRow& r : s.rows) {
    std::vector<Cell> row;
    push_phase_row(row, r);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table sweep_table(const SweepResult& r, bool all_cycles) {
  Table t;
  t.columns.push_back("point");
  for (const SweepPoint& p : r.points) {
    for (const auto& [name, value] : p.coords) t.columns.push_back(name);
    break;
  }
  t.columns.insert(t.columns.end(), kPhaseColumns.begin(), kPhaseColumns.end());
  for (const SweepPoint& p : r.points) {
    if (!p.series || p.series->rows.empty()) continue;
    const std::size_t first = all_cycles ? 0 : p.series->rows.size() - 1;
    for (std::size_t k = first; k < p.series->rows.size(); ++k) {
      std::vector<Cell> row{static_cast<long long>(p.index)};
      push_coords(row, p);
      push_phase_row(row, p.series->rows[k]);
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

}  // namespace qfgp
