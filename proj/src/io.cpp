#include "ym/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ym/experiments.hpp"

namespace ym {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v, int line) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw ParseError(line, "invalid number '" + v + "' for key '" + key + "'");
  }
}

int parse_int(const std::string& key, const std::string& v, int line) {
  try {
    size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw ParseError(line, "invalid integer '" + v + "' for key '" + key + "'");
  }
}

std::vector<double> parse_list(const std::string& key, const std::string& v,
                               int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item, line));
  }
  if (out.empty()) throw ParseError(line, "empty list for key '" + key + "'");
  return out;
}

std::string outcome_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Blowup: return "Blowup";
    case OutcomeKind::Dispersion: return "Dispersion";
    default: return "Undetermined";
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

void write_json(const std::string& path, const json& j) {
  open_out(path) << j.dump(2) << "\n";
}

}  // namespace

ParseError::ParseError(int line_, const std::string& what)
    : std::runtime_error(line_ > 0 ? "line " + std::to_string(line_) + ": " +
                                         what
                                   : what),
      line(line_) {}

Command command_from_string(const std::string& s) {
  if (s == "evolve") return Command::Evolve;
  if (s == "bisect") return Command::Bisect;
  if (s == "sweep-subcritical") return Command::SweepSubcritical;
  if (s == "departure-scaling") return Command::DepartureScaling;
  if (s == "fit-lambda") return Command::FitLambda;
  if (s == "shoot") return Command::Shoot;
  if (s == "cone-energy") return Command::ConeEnergy;
  throw std::invalid_argument("unknown command '" + s + "'");
}

std::string to_string(Command c) {
  switch (c) {
    case Command::Evolve: return "evolve";
    case Command::Bisect: return "bisect";
    case Command::SweepSubcritical: return "sweep-subcritical";
    case Command::DepartureScaling: return "departure-scaling";
    case Command::FitLambda: return "fit-lambda";
    case Command::Shoot: return "shoot";
    case Command::ConeEnergy: return "cone-energy";
  }
  return "evolve";
}

void apply_setting(RunManifest& m, const std::string& key,
                   const std::string& value, int line) {
  EvolutionConfig& c = m.config;
  if (key == "command") {
    try {
      m.command = command_from_string(value);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line, e.what());
    }
  } else if (key == "output_dir") {
    if (value.empty()) throw ParseError(line, "empty output_dir");
    m.output_dir = value;
  } else if (key == "d") {
    const int d = parse_int(key, value, line);
    if (d < 4) throw ParseError(line, "d >= 4 required");
    c.d = Dimension{d};
  } else if (key == "A") {
    c.A = parse_double(key, value, line);
  } else if (key == "sigma") {
    c.sigma = parse_double(key, value, line);
  } else if (key == "R") {
    c.R = parse_double(key, value, line);
  } else if (key == "r_max") {
    c.r_max = parse_double(key, value, line);
  } else if (key == "dr0") {
    c.dr0 = parse_double(key, value, line);
  } else if (key == "cfl") {
    c.cfl = parse_double(key, value, line);
    if (c.cfl <= 0.0 || c.cfl >= 1.0)
      throw ParseError(line, "cfl must lie in (0, 1)");
  } else if (key == "ko_eps") {
    c.ko_eps = parse_double(key, value, line);
  } else if (key == "t_end") {
    c.t_end = parse_double(key, value, line);
  } else if (key == "blowup_factor") {
    c.blowup_factor = parse_double(key, value, line);
  } else if (key == "disperse_w_tol") {
    c.disperse_w_tol = parse_double(key, value, line);
  } else if (key == "disperse_energy_frac") {
    c.disperse_energy_frac = parse_double(key, value, line);
  } else if (key == "disperse_window") {
    c.disperse_window = parse_double(key, value, line);
  } else if (key == "max_depth") {
    c.mesh.max_depth = parse_int(key, value, line);
  } else if (key == "refine_threshold") {
    c.mesh.refine_threshold = parse_double(key, value, line);
  } else if (key == "points_per_scale") {
    c.mesh.points_per_scale = parse_int(key, value, line);
  } else if (key == "buffer_width") {
    c.mesh.buffer_width = parse_int(key, value, line);
  } else if (key == "regrid_interval") {
    c.mesh.regrid_interval = parse_int(key, value, line);
  } else if (key == "A_lo") {
    m.A_lo = parse_double(key, value, line);
  } else if (key == "A_hi") {
    m.A_hi = parse_double(key, value, line);
  } else if (key == "tol") {
    m.tol = parse_double(key, value, line);
    if (m.tol <= 0.0) throw ParseError(line, "tol must be positive");
  } else if (key == "A_star") {
    m.A_star = parse_double(key, value, line);
  } else if (key == "eps") {
    m.eps = parse_list(key, value, line);
  } else if (key == "departure_factor") {
    m.departure_factor = parse_double(key, value, line);
    if (m.departure_factor <= 1.0)
      throw ParseError(line, "departure_factor must exceed 1");
  } else if (key == "b_lo") {
    m.b_lo = parse_double(key, value, line);
  } else if (key == "b_hi") {
    m.b_hi = parse_double(key, value, line);
  } else {
    throw ParseError(line, "unknown key '" + key + "'");
  }
}

RunManifest parse_manifest(const std::string& text) {
  RunManifest m;
  std::stringstream ss(text);
  std::string raw;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    raw = trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos)
      throw ParseError(line, "expected 'key = value', got '" + raw + "'");
    apply_setting(m, trim(raw.substr(0, eq)), trim(raw.substr(eq + 1)), line);
  }
  try {
    m.config.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, e.what());
  }
  return m;
}

std::string manifest_text(const RunManifest& m) {
  const EvolutionConfig& c = m.config;
  std::ostringstream os;
  os << "command = " << to_string(m.command) << "\n"
     << "output_dir = " << m.output_dir << "\n"
     << "d = " << c.d.d << "\n"
     << "A = " << fmt(c.A) << "\n"
     << "sigma = " << fmt(c.sigma) << "\n"
     << "R = " << fmt(c.R) << "\n"
     << "r_max = " << fmt(c.r_max) << "\n"
     << "dr0 = " << fmt(c.dr0) << "\n"
     << "cfl = " << fmt(c.cfl) << "\n"
     << "ko_eps = " << fmt(c.ko_eps) << "\n"
     << "t_end = " << fmt(c.t_end) << "\n"
     << "blowup_factor = " << fmt(c.blowup_factor) << "\n"
     << "disperse_w_tol = " << fmt(c.disperse_w_tol) << "\n"
     << "disperse_energy_frac = " << fmt(c.disperse_energy_frac) << "\n"
     << "disperse_window = " << fmt(c.disperse_window) << "\n"
     << "max_depth = " << c.mesh.max_depth << "\n"
     << "refine_threshold = " << fmt(c.mesh.refine_threshold) << "\n"
     << "points_per_scale = " << c.mesh.points_per_scale << "\n"
     << "buffer_width = " << c.mesh.buffer_width << "\n"
     << "regrid_interval = " << c.mesh.regrid_interval << "\n"
     << "A_lo = " << fmt(m.A_lo) << "\n"
     << "A_hi = " << fmt(m.A_hi) << "\n"
     << "tol = " << fmt(m.tol) << "\n"
     << "A_star = " << fmt(m.A_star) << "\n";
  os << "eps = ";
  for (size_t i = 0; i < m.eps.size(); ++i)
    os << (i ? ", " : "") << fmt(m.eps[i]);
  os << "\n"
     << "departure_factor = " << fmt(m.departure_factor) << "\n"
     << "b_lo = " << fmt(m.b_lo) << "\n"
     << "b_hi = " << fmt(m.b_hi) << "\n";
  return os.str();
}

std::string read_schema(const std::string& path) {
  std::ifstream f(path);
  std::string first;
  if (!f || !std::getline(f, first))
    throw std::runtime_error("cannot read schema from " + path);
  const std::string tag = "# schema: ";
  if (first.rfind(tag, 0) != 0)
    throw std::runtime_error("missing schema header in " + path);
  return first.substr(tag.size());
}

void write_series_csv(const std::string& path,
                      const std::vector<DiagRow>& rows) {
  std::ofstream f = open_out(path);
  f << "# schema: ym.series v1\n";
  f << "t,tau,w_rr0,lambda,E_cone,E_total,flux_out,depth";
  const size_t nd = rows.empty() ? 0 : rows.front().dist.size();
  for (size_t k = 0; k < nd; ++k) f << ",dist" << k;
  f << "\n";
  for (const DiagRow& r : rows) {
    f << fmt(r.t) << "," << fmt(r.tau) << "," << fmt(r.w_rr0) << ","
      << fmt(r.lambda) << "," << fmt(r.E_cone) << "," << fmt(r.E_total) << ","
      << fmt(r.flux_out) << "," << r.depth;
    for (size_t k = 0; k < nd; ++k)
      f << "," << (k < r.dist.size() ? fmt(r.dist[k]) : "nan");
    f << "\n";
  }
}

void write_profile_csv(const std::string& path, const SelfSimilarProfile& p) {
  std::ofstream f = open_out(path);
  f << "# schema: ym.profile v1\n";
  f << "# b = " << fmt(p.b) << ", c = " << fmt(p.c) << ", W1 = " << fmt(p.W1)
    << ", residual = " << fmt(p.residual) << "\n";
  f << "eta,W,Wprime\n";
  for (long i = 0; i < p.table.eta.size(); ++i)
    f << fmt(p.table.eta(i)) << "," << fmt(p.table.w(i)) << ","
      << fmt(p.table.wp(i)) << "\n";
}

void write_rescaled_snapshot_csv(const std::string& path,
                                 const Snapshot& snap) {
  if (snap.lambda <= 0.0)
    throw std::invalid_argument("rescaled snapshot: scale undefined");
  std::ofstream f = open_out(path);
  f << "# schema: ym.rescaled v1\n";
  f << "# t = " << fmt(snap.t) << ", lambda = " << fmt(snap.lambda) << "\n";
  f << "eta,w\n";
  const int n = 257;
  for (int k = 0; k < n; ++k) {
    const double eta = 1e-3 * std::pow(1e3, (double)k / (n - 1));
    f << fmt(eta) << "," << fmt(sample_w(snap.levels, snap.lambda * eta))
      << "\n";
  }
}

void write_bracket_csv(const std::string& path,
                       const std::vector<std::pair<double, OutcomeKind>>& h) {
  std::ofstream f = open_out(path);
  f << "# schema: ym.bracket v1\n";
  f << "A,outcome\n";
  for (const auto& [A, k] : h) f << fmt(A) << "," << outcome_name(k) << "\n";
}

std::vector<std::string> emit_rescaled_snapshots(const EvolutionResult& run,
                                                 const std::string& out_dir) {
  std::vector<std::string> files;
  int idx = 0;
  for (const Snapshot& s : run.snapshots) {
    if (s.lambda <= 0.0) continue;  // scale not defined yet: skipped
    char name[32];
    std::snprintf(name, sizeof name, "rescaled_%04d.csv", idx++);
    const std::string path = out_dir + "/" + name;
    write_rescaled_snapshot_csv(path, s);
    files.push_back(path);
  }
  return files;
}

namespace {

json outcome_json(const Outcome& o) {
  return json{{"outcome", outcome_name(o.kind)},
              {"T_estimate", o.T_estimate},
              {"p", o.p},
              {"final_time", o.final_time},
              {"reason", o.reason}};
}

json fit_json(const ScalingFit& s) {
  return json{{"exponent", s.exponent}, {"amplitude", s.amplitude},
              {"residual", s.residual}, {"n_points", s.n_points},
              {"window", s.window},     {"caveat", s.caveat},
              {"reliable", s.reliable}};
}

OutcomeKind probe_amplitude(const EvolutionConfig& base, double A) {
  EvolutionConfig cfg = base;
  cfg.A = A;
  return classify_outcome(cfg).outcome.kind;
}

double resolve_A_star(const RunManifest& m, json& summary,
                      const std::string& out) {
  if (m.A_star > 0.0) return m.A_star;
  Bracket br = bisect_critical(
      [&](double A) { return probe_amplitude(m.config, A); }, m.A_lo, m.A_hi,
      m.tol);
  write_bracket_csv(out + "/bracket.csv", br.history);
  summary["bisection"] = {{"A_star", br.A_star()},
                         {"A_lo", br.A_lo},
                         {"A_hi", br.A_hi},
                         {"limited", br.limited},
                         {"probes", br.history.size()},
                         {"note", br.note}};
  return br.A_star();
}

}  // namespace

int run_manifest(const RunManifest& m) {
  std::string out = m.output_dir;
  if (const char* prefix = std::getenv("YMLAB_OUTPUT_PREFIX"))
    out = std::string(prefix) + "/" + out;
  std::filesystem::create_directories(out);
  open_out(out + "/manifest.txt") << manifest_text(m);

  json summary;
  summary["command"] = to_string(m.command);
  int status = 0;
  try {
    switch (m.command) {
      case Command::Evolve: {
        EvolutionResult res = classify_outcome(m.config);
        write_series_csv(out + "/series.csv", res.series);
        summary.update(outcome_json(res.outcome));
        summary["E0"] = res.E0;
        summary["snapshots"] =
            emit_rescaled_snapshots(res, out).size();
        if (res.outcome.reason.rfind("numerical breakdown", 0) == 0)
          status = 2;
        break;
      }
      case Command::FitLambda: {
        EvolutionResult res = classify_outcome(m.config);
        write_series_csv(out + "/series.csv", res.series);
        summary.update(outcome_json(res.outcome));
        ScalingFit a = anomalous_rate_fit(res.series, m.config.d);
        summary["rate_fit"] = fit_json(a);
        summary["alpha"] = a.exponent;
        break;
      }
      case Command::ConeEnergy: {
        EvolutionResult res = classify_outcome(m.config);
        write_series_csv(out + "/series.csv", res.series);
        summary.update(outcome_json(res.outcome));
        ConeEnergyLimit c = cone_energy_limit(res, m.config.d);
        summary["cone_energy"] = {{"defined", c.defined},
                                  {"limit", c.limit},
                                  {"decade_ratio", c.decade_ratio},
                                  {"kinetic_fraction", c.kinetic_fraction},
                                  {"to_zero", c.to_zero},
                                  {"low_confidence", c.low_confidence}};
        break;
      }
      case Command::Bisect: {
        Bracket br = bisect_critical(
            [&](double A) { return probe_amplitude(m.config, A); }, m.A_lo,
            m.A_hi, m.tol);
        write_bracket_csv(out + "/bracket.csv", br.history);
        summary["A_star"] = br.A_star();
        summary["A_lo"] = br.A_lo;
        summary["A_hi"] = br.A_hi;
        summary["limited"] = br.limited;
        summary["probes"] = br.history.size();
        summary["note"] = br.note;
        break;
      }
      case Command::SweepSubcritical: {
        const double As = resolve_A_star(m, summary, out);
        ScalingFit s = subcritical_sweep(m.eps, m.config, As);
        std::ofstream f = open_out(out + "/sweep.csv");
        f << "# schema: ym.scaling v1\neps,rho_max\n";
        for (long i = 0; i < s.x.size(); ++i)
          f << fmt(s.x(i)) << "," << fmt(s.y(i)) << "\n";
        summary["A_star"] = As;
        summary["fit"] = fit_json(s);
        break;
      }
      case Command::DepartureScaling: {
        const double As = resolve_A_star(m, summary, out);
        const Profile& w1 = excited_profile().table;
        const double Th = critical_horizon(m.config, As, w1);
        DepartureScaling d = departure_scaling(m.eps, m.config, As, Th, w1,
                                               m.departure_factor);
        std::ofstream f = open_out(out + "/departures.csv");
        f << "# schema: ym.departure v1\neps,t_star,min_dist,detected\n";
        for (const Departure& r : d.runs)
          f << fmt(r.eps) << "," << fmt(r.t_star) << "," << fmt(r.min_dist)
            << "," << (r.detected ? 1 : 0) << "\n";
        summary["A_star"] = As;
        summary["T_hat"] = Th;
        summary["factor"] = d.factor;
        summary["fit"] = fit_json(d.fit);
        break;
      }
      case Command::Shoot: {
        SimilarityODE ode{m.config.d};
        auto profiles = find_profiles(ode, m.b_lo, m.b_hi);
        json list = json::array();
        int idx = 0;
        for (const SelfSimilarProfile& p : profiles) {
          char name[32];
          std::snprintf(name, sizeof name, "profile_%d.csv", idx++);
          write_profile_csv(out + "/" + name, p);
          list.push_back({{"b", p.b},
                          {"c", p.c},
                          {"W1", p.W1},
                          {"residual", p.residual},
                          {"file", name}});
        }
        summary["profiles"] = list;
        break;
      }
    }
  } catch (const std::exception& e) {
    summary["error"] = e.what();
    status = 1;
  }
  summary["status"] = status;
  write_json(out + "/summary.json", summary);
  return status;
}

}  // namespace ym
