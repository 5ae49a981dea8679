#include "coneflow/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "coneflow/cli/sampling.hpp"
#include "coneflow/correspondence.hpp"
#include "coneflow/integrals.hpp"

namespace coneflow::cli {

using nlohmann::json;

namespace {

std::string num(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

json to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Span require_span(const RunConfig& cfg) {
  if (!cfg.span) throw ConfigError("span", "missing");
  return *cfg.span;
}

Backend single_backend(BackendChoice choice) {
  return choice == BackendChoice::Direct ? Backend::Direct : Backend::Lift;
}

std::vector<Backend> backends_of(BackendChoice choice) {
  if (choice == BackendChoice::Both) return {Backend::Direct, Backend::Lift};
  return {single_backend(choice)};
}

double state_gap(const TrajectorySample& a, const TrajectorySample& b) {
  return std::max((a.x - b.x).norm(), (a.v - b.v).norm());
}

json step_json(const StepStats& st) {
  return {{"accepted", st.accepted}, {"rejected", st.rejected}, {"rhs_evals", st.rhs_evals}};
}

void write_trace_csv(const Manifold& m, const Trajectory& traj, std::ostream& out) {
  const int dim = m.ambient_dim();
  const int n = m.n();
  const bool radial = traj.meta.backend == "radial";
  out << 's';
  for (int i = 1; i <= dim; ++i) out << ",x_" << i;
  for (int i = 1; i <= dim; ++i) out << ",v_" << i;
  out << ",t";
  for (int i = 1; i <= n; ++i) out << ",u_" << i;
  out << ",norm_sq,I\n";
  for (const TrajectorySample& smp : traj.samples) {
    out << num(smp.s);
    for (int i = 0; i < dim; ++i) out << ',' << num(smp.x[i]);
    for (int i = 0; i < dim; ++i) out << ',' << num(smp.v[i]);
    out << ',' << num(smp.t);
    for (int i = 0; i < n; ++i) out << ',' << num(smp.u[i]);
    out << ',' << num(smp.x.squaredNorm()) << ',' << num(radial ? 0.0 : integral_I({smp.x, smp.v}))
        << '\n';
  }
}

void write_trace_json(const Manifold& m, const Trajectory& traj, std::ostream& out) {
  const bool radial = traj.meta.backend == "radial";
  json rows = json::array();
  for (const TrajectorySample& smp : traj.samples) {
    rows.push_back({{"s", smp.s},
                    {"x", to_json(smp.x)},
                    {"v", to_json(smp.v)},
                    {"t", smp.t},
                    {"u", to_json(smp.u)},
                    {"norm_sq", smp.x.squaredNorm()},
                    {"I", radial ? 0.0 : integral_I({smp.x, smp.v})}});
  }
  json doc = {{"manifold", to_string(m.config().kind)},
              {"config_hash", m.config_hash()},
              {"backend", traj.meta.backend},
              {"samples", rows}};
  out << doc.dump(2) << '\n';
}

struct IntegralTrack {
  std::string name;
  double initial;
  std::vector<double> values;
};

json drift_json(const IntegralTrack& track) {
  double max_dev = 0.0, sum = 0.0;
  for (double value : track.values) {
    const double dev = std::abs(value - track.initial);
    max_dev = std::max(max_dev, dev);
    sum += dev;
  }
  const double mean = track.values.empty() ? 0.0 : sum / static_cast<double>(track.values.size());
  return {{"name", track.name}, {"initial", track.initial}, {"max_dev", max_dev},
          {"mean_dev", mean}};
}

// I and I^k along the samples of one trajectory. I^k of each sample is
// computed from that sample alone.
std::vector<IntegralTrack> track_integrals(const Manifold& m, const PhasePoint& p,
                                           const Trajectory& traj,
                                           const IntegratorSettings& settings) {
  const IntegralVector iv0 = integrals_I_vec(m, p, settings);
  std::vector<IntegralTrack> tracks;
  tracks.push_back({"I", integral_I(p), {}});
  for (Eigen::Index k = 0; k < iv0.values.size(); ++k) {
    tracks.push_back({"I^" + std::to_string(k + 1), iv0.values[k], {}});
  }
  const bool radial = traj.meta.backend == "radial";
  for (const TrajectorySample& smp : traj.samples) {
    const PhasePoint q{smp.x, smp.v};
    tracks[0].values.push_back(radial ? 0.0 : integral_I(q));
    const IntegralVector iv = integrals_I_vec(m, q, settings);
    for (Eigen::Index k = 0; k < iv.values.size(); ++k) {
      tracks[static_cast<std::size_t>(k) + 1].values.push_back(iv.values[k]);
    }
  }
  return tracks;
}

std::string sweep_header(const Manifold& m, bool both) {
  const int n = m.n();
  const int count = 2 * m.ambient_dim();
  std::string h = "index,status,t";
  for (int i = 1; i <= n; ++i) h += ",u_" + std::to_string(i);
  h += ",dt";
  for (int i = 1; i <= n; ++i) h += ",du_" + std::to_string(i);
  h += ",I";
  for (int k = 1; k <= count; ++k) h += ",I_" + std::to_string(k);
  h += ",max_I_drift";
  if (both) h += ",disagreement";
  return h;
}

std::string sweep_row(const Manifold& m, const RunConfig& cfg, int index,
                      const ConeChartState& st) {
  const bool both = cfg.backend == BackendChoice::Both;
  std::string row = std::to_string(index);
  std::string tail;
  std::string status = "ok";
  const int count = 2 * m.ambient_dim();
  try {
    const PhasePoint p = to_ambient(m, st);
    const double I0 = integral_I(p);
    const IntegralVector iv =
        integrals_I_vec(m, p, cfg.integrator, single_backend(cfg.backend));
    double drift = 0.0, gap = 0.0;
    std::vector<Trajectory> runs;
    for (Backend b : backends_of(cfg.backend)) {
      runs.push_back(sample_trajectory(m, p, *cfg.span, cfg.samples, b, cfg.integrator));
      for (const auto& smp : runs.back().samples) {
        drift = std::max(drift, std::abs(integral_I({smp.x, smp.v}) - I0));
      }
    }
    if (both) {
      for (std::size_t i = 0; i < runs[0].samples.size(); ++i) {
        gap = std::max(gap, state_gap(runs[0].samples[i], runs[1].samples[i]));
      }
    }
    tail += ',' + num(I0);
    for (Eigen::Index k = 0; k < iv.values.size(); ++k) tail += ',' + num(iv.values[k]);
    tail += ',' + num(drift);
    if (both) tail += ',' + num(gap);
  } catch (const Error& e) {
    status = std::string(to_string(e.code()));
    tail.clear();
    for (int k = 0; k < count + 2 + (both ? 1 : 0); ++k) tail += ",nan";
  }
  row += ',' + status + ',' + num(st.t);
  for (Eigen::Index i = 0; i < st.u.size(); ++i) row += ',' + num(st.u[i]);
  row += ',' + num(st.dt);
  for (Eigen::Index i = 0; i < st.du.size(); ++i) row += ',' + num(st.du[i]);
  return row + tail;
}

}  // namespace

int cmd_trace(const RunConfig& cfg, std::ostream& out) {
  if (cfg.backend == BackendChoice::Both) {
    throw ConfigError("backend", "trace writes one trajectory; choose direct or lift");
  }
  const Manifold m(cfg.manifold);
  const PhasePoint p = initial_phase(m, cfg);
  const Trajectory traj = sample_trajectory(m, p, require_span(cfg), cfg.samples,
                                            single_backend(cfg.backend), cfg.integrator);
  if (cfg.output.format == "json") {
    write_trace_json(m, traj, out);
  } else {
    write_trace_csv(m, traj, out);
  }
  return kOk;
}

int cmd_integrals(const RunConfig& cfg, std::ostream& out) {
  const Manifold m(cfg.manifold);
  const PhasePoint p = initial_phase(m, cfg);
  const int count = 2 * m.ambient_dim();
  const Classification cls = classify(p, cfg.integrator.tol_radial);
  if (cls.kind == GeodesicKind::Radial) {
    json doc = {{"I", 0.0},
                {"I_vec", to_json(Eigen::VectorXd::Zero(count))},
                {"note", "radial family"}};
    out << doc.dump(2) << '\n';
    return kOk;
  }
  const Backend backend = single_backend(cfg.backend);
  const JVector j = integrals_J(m, p, cfg.integrator, backend);
  const IntegralVector iv = integrals_I_vec(m, p, cfg.integrator, backend);
  const RecoveredIntegrals rec = recover(iv);
  const AsymptoticDirections dirs = asymptotic_directions(m, p, cfg.integrator);
  json doc = {{"I", cls.I_value},
              {"s0", tangency_parameter(p, cfg.integrator.tol_radial) + 0.0},
              {"J", to_json(j.values())},
              {"I_vec", to_json(iv.values)},
              {"recovered_I", rec.I},
              {"asymptotics", {{"plus", to_json(dirs.plus)}, {"minus", to_json(dirs.minus)}}}};
  out << doc.dump(2) << '\n';
  return std::abs(rec.I - cls.I_value) <= 1e-10 * cls.I_value ? kOk : kToleranceBreach;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const Manifold m(cfg.manifold);
  const PhasePoint p = initial_phase(m, cfg);
  const Span span = require_span(cfg);
  const auto started = std::chrono::steady_clock::now();

  bool pass = true;
  json runs = json::array();
  std::vector<Trajectory> trajs;
  for (Backend b : backends_of(cfg.backend)) {
    trajs.push_back(sample_trajectory(m, p, span, cfg.samples, b, cfg.integrator));
    const Trajectory& traj = trajs.back();
    json integrals = json::array();
    for (const IntegralTrack& track : track_integrals(m, p, traj, cfg.integrator)) {
      json entry = drift_json(track);
      const double limit = track.name == "I" ? cfg.thresholds.I : cfg.thresholds.I_vec;
      if (entry["max_dev"].get<double>() > limit) pass = false;
      integrals.push_back(std::move(entry));
    }
    runs.push_back({{"backend", traj.meta.backend},
                    {"integrals", std::move(integrals)},
                    {"steps", step_json(traj.meta.stats)}});
  }

  json doc = {{"manifold", to_string(m.config().kind)},
              {"config_hash", m.config_hash()},
              {"span", {span.a, span.b}},
              {"samples", cfg.samples},
              {"rtol", cfg.integrator.rtol},
              {"runs", std::move(runs)}};
  if (trajs.size() == 2) {
    double gap = 0.0;
    for (std::size_t i = 0; i < trajs[0].samples.size(); ++i) {
      gap = std::max(gap, state_gap(trajs[0].samples[i], trajs[1].samples[i]));
    }
    doc["backend_disagreement"] = gap;
    if (gap > cfg.thresholds.disagreement) pass = false;
  }
  doc["thresholds"] = {{"I", cfg.thresholds.I},
                       {"I_vec", cfg.thresholds.I_vec},
                       {"disagreement", cfg.thresholds.disagreement}};
  doc["runtime_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  doc["pass"] = pass;
  out << doc.dump(2) << '\n';
  return pass ? kOk : kToleranceBreach;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.has_seed) throw ConfigError("seed", "sweep needs a fixed seed");
  require_span(cfg);
  const Manifold m(cfg.manifold);

  SweepRng rng(cfg.seed);
  std::vector<ConeChartState> launches;
  launches.reserve(static_cast<std::size_t>(cfg.count));
  for (int i = 0; i < cfg.count; ++i) {
    launches.push_back(draw_launch(m, rng, cfg.integrator.tol_radial));
  }

  std::vector<std::string> rows(launches.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < launches.size(); i = next++) {
      rows[i] = sweep_row(m, cfg, static_cast<int>(i), launches[i]);
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t nthreads = std::min<std::size_t>(hw, launches.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  out << sweep_header(m, cfg.backend == BackendChoice::Both) << '\n';
  for (const std::string& row : rows) out << row << '\n';
  return kOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geodesic flow on cones over closed manifolds", "cone-flow"};
  app.require_subcommand(1);

  std::string config_path, out_path, backend;
  double rtol = 0.0;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"trace", "Write the sampled trajectory as CSV"},
      {"integrals", "Print I, s0, J, I_vec and asymptotic directions as JSON"},
      {"verify", "Drift report for I and I_vec along the trajectory"},
      {"sweep", "Integrals and drift for seeded random launches, as CSV"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_path, "Output file (default: stdout)");
    sub->add_option("--backend", backend, "direct, lift or both")
        ->check(CLI::IsMember({"direct", "lift", "both"}));
    sub->add_option("--rtol", rtol, "Relative tolerance")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    RunConfig cfg = load_config(config_path);
    if (!backend.empty()) cfg.backend = parse_backend(backend, "--backend");
    if (rtol > 0.0) cfg.integrator.rtol = rtol;
    if (!out_path.empty()) cfg.output.path = out_path;

    std::ostringstream buffer;
    int code = kOk;
    if (command == "trace") {
      code = cmd_trace(cfg, buffer);
    } else if (command == "integrals") {
      code = cmd_integrals(cfg, buffer);
    } else if (command == "verify") {
      code = cmd_verify(cfg, buffer);
    } else {
      code = cmd_sweep(cfg, buffer);
    }

    if (cfg.output.path.empty()) {
      out << buffer.str();
    } else {
      std::ofstream file(cfg.output.path, std::ios::binary);
      if (!file) throw ConfigError("output.path", "cannot write '" + cfg.output.path + "'");
      file << buffer.str();
    }
    if (code == kToleranceBreach) err << "cone-flow " << command << ": tolerance exceeded\n";
    return code;
  } catch (const ConfigError& e) {
    err << "cone-flow " << command << ": config error at " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << "cone-flow " << command << ": " << to_string(e.code()) << ": " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "cone-flow " << command << ": " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace coneflow::cli
