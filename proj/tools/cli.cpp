#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fama/analytic.hpp"
#include "fama/correlation.hpp"
#include "fama/error.hpp"
#include "fama/montecarlo.hpp"

#ifndef FAMA_VERSION
#define FAMA_VERSION "0.0.0"
#endif

namespace fama::cli {
namespace {

using json = nlohmann::ordered_json;
using analytic::Method;
using analytic::OutageEstimate;
using analytic::SystemConfig;
using correlation::BlockStructure;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

// Flags shared by the op and gain commands; defaults follow the Fig. 1 setup.
struct ModelFlags {
  int U = 5;
  int m = 2;
  std::vector<int> m_int;
  double gamma_db = -3.0;
  int N = 100;
  double W = 1.0;
  double delta = correlation::kDefaultDelta;
  double rho_th = correlation::kDefaultRhoTh;
  std::string model = "jakes";
  double mu = 0.0;
  std::string mode = "slow";
  std::string method = "quad";
  int n_I = analytic::kDefaultQuadratureOrder;
  int n_J = analytic::kDefaultQuadratureOrder;
  double rel_tol = 1e-8;
  std::string trials = "1e5";
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string mc_model = "approx";
};

struct OutputFlags {
  std::string format = "csv";
  std::string out;
  std::string manifest;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--U", f.U, "users U (one desired link, U - 1 interferers)");
  cmd->add_option("--m", f.m, "desired-link fading order m");
  cmd->add_option("--m-int", f.m_int, "interferer fading orders (U - 1 values; default all m)");
  cmd->add_option("--gamma-db", f.gamma_db, "SIR threshold in dB");
  cmd->add_option("--N", f.N, "number of ports N");
  cmd->add_option("--W", f.W, "normalized aperture W");
  cmd->add_option("--delta", f.delta, "intra-block correlation delta");
  cmd->add_option("--rho-th", f.rho_th, "eigenvalue threshold rho_th");
  cmd->add_option("--model", f.model, "correlation model")->check(CLI::IsMember({"jakes", "constant"}));
  cmd->add_option("--mu", f.mu, "constant model: correlation mu (0 takes delta from the aperture mean)");
  cmd->add_option("--mode", f.mode, "FAMA mode")->check(CLI::IsMember({"slow", "fast"}));
  cmd->add_option("--method", f.method, "evaluation method")->check(CLI::IsMember({"exact", "quad", "ub", "mc"}));
  cmd->add_option("--nI", f.n_I, "quadrature nodes, desired axis");
  cmd->add_option("--nJ", f.n_J, "quadrature nodes, interference axis");
  cmd->add_option("--rel-tol", f.rel_tol, "exact-integral relative tolerance");
  cmd->add_option("--trials", f.trials, "Monte Carlo trials (1e6 accepted)");
  cmd->add_option("--seed", f.seed, "Monte Carlo seed");
  cmd->add_option("--threads", f.threads, "worker threads (default FAMA_THREADS or all cores)");
  cmd->add_option("--mc-model", f.mc_model, "fast-mode Monte Carlo interference model")
      ->check(CLI::IsMember({"approx", "composite"}));
}

void add_output_flags(CLI::App* cmd, OutputFlags& f, bool tabular) {
  if (tabular) cmd->add_option("--format", f.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", f.out, "write output to FILE (manifest goes to FILE.manifest.json)");
  cmd->add_option("--manifest", f.manifest, "manifest path (default FILE.manifest.json with --out)");
}

json model_json(const ModelFlags& f) {
  json j;
  j["U"] = f.U;
  j["m"] = f.m;
  j["m_int"] = f.m_int;
  j["gamma_db"] = f.gamma_db;
  j["N"] = f.N;
  j["W"] = f.W;
  j["delta"] = f.delta;
  j["rho_th"] = f.rho_th;
  j["model"] = f.model;
  j["mu"] = f.mu;
  j["mode"] = f.mode;
  j["method"] = f.method;
  j["n_I"] = f.n_I;
  j["n_J"] = f.n_J;
  j["rel_tol"] = f.rel_tol;
  j["trials"] = parse_count(f.trials);
  j["seed"] = f.seed;
  j["mc_model"] = f.mc_model;
  return j;
}

correlation::CorrelationModel parse_model(const std::string& name) {
  return name == "constant" ? correlation::CorrelationModel::constant : correlation::CorrelationModel::jakes;
}

BlockStructure resolve(const ModelFlags& f, int N, double W) {
  correlation::CorrelationSpec spec{parse_model(f.model), N, W, f.mu};
  return correlation::resolve_blocks(spec, f.delta, f.rho_th);
}

SystemConfig make_config(const ModelFlags& f, int U, double gamma_db, int N, double W) {
  auto cfg = SystemConfig::uniform(U, f.m, analytic::db_to_linear(gamma_db), N, W);
  if (!f.m_int.empty()) {
    detail::require(static_cast<int>(f.m_int.size()) == U - 1,
                    "--m-int needs exactly U - 1 = " + std::to_string(U - 1) + " values");
    cfg.interferer_orders = f.m_int;
  }
  cfg.validate();
  return cfg;
}

montecarlo::McSettings mc_settings(const ModelFlags& f) {
  montecarlo::McSettings s;
  s.trials = parse_count(f.trials);
  s.seed = f.seed;
  s.threads = f.threads;
  if (f.mode == "slow") {
    s.mode = montecarlo::Mode::slow;
  } else {
    s.mode = f.mc_model == "composite" ? montecarlo::Mode::fast_composite : montecarlo::Mode::fast_nakagami_approx;
  }
  return s;
}

OutageEstimate evaluate(const ModelFlags& f, const SystemConfig& cfg, const BlockStructure& blocks) {
  const Method method = analytic::method_from_string(f.method);
  if (method == Method::monte_carlo) return montecarlo::estimate_op(cfg, blocks, mc_settings(f));
  analytic::FastOptions opts;
  opts.exact.rel_tol = f.rel_tol;
  opts.n_I = f.n_I;
  opts.n_J = f.n_J;
  return f.mode == "slow" ? analytic::op_slow(cfg, blocks, method, opts) : analytic::op_fast(cfg, blocks, method, opts);
}

// Runs jobs 0..count-1 on up to `threads` workers; failures are rethrown in
// job order so the reported error does not depend on scheduling.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> failures(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : failures)
    if (e) std::rethrow_exception(e);
}

int as_int(double v, const std::string& what) {
  detail::require(std::abs(v - std::round(v)) < 1e-9, what + " must be an integer, got " + fmt(v));
  return static_cast<int>(std::lround(v));
}

struct OpRow {
  std::string axis;
  double value = 0.0;
  OutageEstimate est;
  int B = 0;
  double delta = 0.0;
};

std::string render_op(const std::vector<OpRow>& rows, const std::string& format) {
  std::ostringstream os;
  if (format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"sweep_param", r.axis}, {"value", r.value}, {"p_out", r.est.value},
                     {"method", analytic::to_string(r.est.method)}, {"error", r.est.error}, {"B", r.B},
                     {"delta", r.delta}});
    }
    os << arr.dump(2) << '\n';
    return os.str();
  }
  os << "sweep_param,value,p_out,method,error,B,delta\n";
  for (const auto& r : rows) {
    os << r.axis << ',' << fmt(r.value) << ',' << fmt(r.est.value) << ',' << analytic::to_string(r.est.method) << ','
       << fmt(r.est.error) << ',' << r.B << ',' << fmt(r.delta) << '\n';
  }
  return os.str();
}

std::string cmd_op(const ModelFlags& f, const std::string& sweep, const std::string& format) {
  const Grid grid = sweep.empty() ? Grid{"gamma-db", {f.gamma_db}} : parse_sweep(sweep);
  const auto& axis = grid.axis;
  detail::require(axis == "gamma-db" || axis == "N" || axis == "W" || axis == "U",
                  "--sweep axis must be one of gamma-db, N, W, U (got '" + axis + "')");

  std::vector<OpRow> rows(grid.values.size());
  std::vector<SystemConfig> cfgs;
  std::vector<BlockStructure> blocks;
  for (double v : grid.values) {
    const int N = axis == "N" ? as_int(v, "N") : f.N;
    const double W = axis == "W" ? v : f.W;
    const int U = axis == "U" ? as_int(v, "U") : f.U;
    const double g = axis == "gamma-db" ? v : f.gamma_db;
    cfgs.push_back(make_config(f, U, g, N, W));
    blocks.push_back(resolve(f, N, W));
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].axis = axis;
    rows[i].value = grid.values[i];
    rows[i].B = blocks[i].count();
    rows[i].delta = blocks[i].delta;
  }

  const unsigned threads = f.threads == 0 ? montecarlo::default_thread_count() : f.threads;
  if (f.method == "mc") {
    if (axis == "gamma-db") {
      // One trial set serves every threshold; identical to per-point runs
      // because each point would reuse the same seed.
      std::vector<double> gammas;
      for (const auto& c : cfgs) gammas.push_back(c.gamma);
      const auto est = montecarlo::estimate_op_curve(cfgs.front(), blocks.front(), mc_settings(f), gammas);
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i].est = est[i];
    } else {
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i].est = evaluate(f, cfgs[i], blocks[i]);
    }
  } else {
    parallel_for(rows.size(), threads, [&](std::size_t i) { rows[i].est = evaluate(f, cfgs[i], blocks[i]); });
  }
  return render_op(rows, format);
}

struct GainRow {
  int U = 0;
  int M = 0;
  std::string mode;
  double exact = 0.0;
  double approx = 0.0;
};

std::string cmd_gain(const ModelFlags& f, const std::string& u_sweep, const std::vector<std::string>& pools,
                     const std::string& format, std::ostream& err) {
  const Grid grid = u_sweep.empty() ? Grid{"U", {static_cast<double>(f.U)}} : parse_sweep("U=" + u_sweep);
  std::vector<int> users;
  for (double v : grid.values) users.push_back(as_int(v, "U"));

  const std::vector<std::string> pool_tokens = pools.empty() ? std::vector<std::string>{"U"} : pools;
  std::vector<int> fixed_pools;  // -1 stands for M = U
  for (const auto& t : pool_tokens) {
    if (t == "U") {
      fixed_pools.push_back(-1);
    } else {
      const auto n = parse_count(t);
      fixed_pools.push_back(static_cast<int>(n));
    }
  }

  std::vector<SystemConfig> cfgs;
  std::vector<BlockStructure> blocks;
  const auto shared_blocks = resolve(f, f.N, f.W);
  for (int U : users) {
    cfgs.push_back(make_config(f, U, f.gamma_db, f.N, f.W));
    blocks.push_back(shared_blocks);
  }
  std::vector<double> p(users.size());
  const unsigned threads = f.threads == 0 ? montecarlo::default_thread_count() : f.threads;
  if (f.method == "mc") {
    for (std::size_t i = 0; i < users.size(); ++i) p[i] = evaluate(f, cfgs[i], blocks[i]).value;
  } else {
    parallel_for(users.size(), threads, [&](std::size_t i) { p[i] = evaluate(f, cfgs[i], blocks[i]).value; });
  }

  std::vector<GainRow> rows;
  int rejected = 0;
  for (std::size_t i = 0; i < users.size(); ++i) {
    const int U = users[i];
    std::vector<int> seen;
    for (int pool : fixed_pools) {
      const int M = pool < 0 ? U : pool;
      if (M < U) {
        ++rejected;
        continue;
      }
      if (std::find(seen.begin(), seen.end(), M) != seen.end()) continue;
      seen.push_back(M);
      rows.push_back({U, M, f.mode, analytic::ofama_gain(U, M, p[i]), analytic::ofama_gain_approx(U, M, p[i])});
    }
  }
  if (rejected > 0) err << "gain: skipped " << rejected << " row(s) with M < U\n";

  std::ostringstream os;
  if (format == "json") {
    json arr = json::array();
    for (const auto& r : rows)
      arr.push_back({{"U", r.U}, {"M", r.M}, {"mode", r.mode}, {"gain_exact", r.exact}, {"gain_approx", r.approx}});
    os << arr.dump(2) << '\n';
  } else {
    os << "U,M,mode,gain_exact,gain_approx\n";
    for (const auto& r : rows) os << r.U << ',' << r.M << ',' << r.mode << ',' << fmt(r.exact) << ',' << fmt(r.approx) << '\n';
  }
  return os.str();
}

std::string cmd_blocks(int N, double W, double delta, double rho_th, const std::string& model, double mu) {
  correlation::CorrelationSpec spec{parse_model(model), N, W, mu};
  const auto b = correlation::resolve_blocks(spec, delta, rho_th);
  json j;
  j["B"] = b.count();
  j["lengths"] = b.lengths;
  j["delta"] = b.delta;
  j["rho_th"] = b.rho_th;
  j["eigenvalues_used"] = b.eigenvalues_used;
  return j.dump(2) + "\n";
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

// Drops --out / --manifest so a replay renders to memory.
std::vector<std::string> strip_output_flags(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a == "--out" || a == "--manifest") {
      ++i;
      continue;
    }
    if (a.rfind("--out=", 0) == 0 || a.rfind("--manifest=", 0) == 0) continue;
    kept.push_back(a);
  }
  return kept;
}

struct Outcome {
  std::string text;
  json parameters;
  std::uint64_t seed = 0;
};

int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool allow_replay) {
  CLI::App app{"Outage probability and multiplexing gain of FAMA under block-correlated Nakagami-m fading", "fama"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FAMA_VERSION);

  ModelFlags model;
  OutputFlags output;

  int b_N = 100;
  double b_W = 1.0;
  double b_delta = correlation::kDefaultDelta;
  double b_rho = correlation::kDefaultRhoTh;
  std::string b_model = "jakes";
  double b_mu = 0.0;
  auto* blocks_cmd = app.add_subcommand("blocks", "block structure of the port correlation matrix (JSON)");
  blocks_cmd->add_option("--N", b_N, "number of ports N");
  blocks_cmd->add_option("--W", b_W, "normalized aperture W");
  blocks_cmd->add_option("--delta", b_delta, "intra-block correlation delta");
  blocks_cmd->add_option("--rho-th", b_rho, "eigenvalue threshold rho_th");
  blocks_cmd->add_option("--model", b_model, "correlation model")->check(CLI::IsMember({"jakes", "constant"}));
  blocks_cmd->add_option("--mu", b_mu, "constant model correlation mu");
  add_output_flags(blocks_cmd, output, false);

  std::string sweep;
  auto* op_cmd = app.add_subcommand("op", "outage probability over a parameter sweep");
  add_model_flags(op_cmd, model);
  op_cmd->add_option("--sweep", sweep, "axis=start:stop:step over gamma-db, N, W or U (inclusive)");
  add_output_flags(op_cmd, output, true);

  std::string u_sweep;
  std::vector<std::string> pools;
  auto* gain_cmd = app.add_subcommand("gain", "FAMA and O-FAMA multiplexing gain over U");
  add_model_flags(gain_cmd, model);
  gain_cmd->add_option("--U-sweep", u_sweep, "start:stop:step over U (inclusive)");
  gain_cmd->add_option("--M", pools, "user pool sizes M (repeatable; 'U' means M = U)");
  add_output_flags(gain_cmd, output, true);

  std::string manifest_path;
  CLI::App* replay_cmd = nullptr;
  if (allow_replay) {
    replay_cmd = app.add_subcommand("replay", "re-run a manifest and check the output digest");
    replay_cmd->add_option("manifest", manifest_path, "manifest JSON")->required();
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << FAMA_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "fama: " << e.what() << '\n';
    for (auto* sub : app.get_subcommands()) err << sub->help();
    return kExitDomain;
  }

  if (replay_cmd != nullptr && replay_cmd->parsed()) {
    std::ifstream f(manifest_path);
    if (!f) {
      err << "fama: cannot read manifest '" << manifest_path << "'\n";
      return kExitFailure;
    }
    const json manifest = json::parse(f);
    const auto recorded = manifest.at("argv").get<std::vector<std::string>>();
    std::ostringstream text;
    const int rc = execute(strip_output_flags(recorded), text, err, false);
    if (rc != kExitOk) return rc;
    const std::string got = digest(text.str());
    const std::string want = manifest.at("output_digest").get<std::string>();
    if (got != want) {
      err << "fama: replay digest " << got << " differs from manifest " << want << '\n';
      return kExitFailure;
    }
    out << "replay ok " << got << '\n';
    return kExitOk;
  }

  Outcome outcome;
  std::string command;
  if (blocks_cmd->parsed()) {
    command = "blocks";
    outcome.text = cmd_blocks(b_N, b_W, b_delta, b_rho, b_model, b_mu);
    outcome.parameters = {{"N", b_N}, {"W", b_W}, {"delta", b_delta}, {"rho_th", b_rho}, {"model", b_model}, {"mu", b_mu}};
  } else if (op_cmd->parsed()) {
    command = "op";
    outcome.text = cmd_op(model, sweep, output.format);
    outcome.parameters = model_json(model);
    outcome.parameters["sweep"] = sweep;
    outcome.seed = model.seed;
  } else {
    command = "gain";
    outcome.text = cmd_gain(model, u_sweep, pools, output.format, err);
    outcome.parameters = model_json(model);
    outcome.parameters["U_sweep"] = u_sweep;
    outcome.parameters["M"] = pools;
    outcome.seed = model.seed;
  }
  outcome.parameters["format"] = output.format;

  if (output.out.empty()) {
    out << outcome.text;
  } else {
    write_file(output.out, outcome.text);
  }
  std::string manifest_out = output.manifest;
  if (manifest_out.empty() && !output.out.empty()) manifest_out = output.out + ".manifest.json";
  if (!manifest_out.empty()) {
    json m;
    m["tool"] = "fama";
    m["version"] = FAMA_VERSION;
    m["command"] = command;
    m["argv"] = args;
    m["parameters"] = outcome.parameters;
    m["seed"] = outcome.seed;
    m["timestamp"] = utc_timestamp();
    m["output"] = output.out.empty() ? "-" : output.out;
    m["output_digest"] = digest(outcome.text);
    write_file(manifest_out, m.dump(2) + "\n");
  }
  return kExitOk;
}

}  // namespace

std::string digest(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Grid parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  detail::require(eq != std::string::npos && eq > 0, "sweep must look like axis=start:stop:step, got '" + text + "'");
  Grid grid;
  grid.axis = text.substr(0, eq);
  const std::string range = text.substr(eq + 1);

  std::vector<double> parts;
  std::size_t pos = 0;
  while (true) {
    const auto colon = range.find(':', pos);
    const std::string piece = range.substr(pos, colon == std::string::npos ? std::string::npos : colon - pos);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(piece, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    detail::require(used == piece.size() && !piece.empty() && std::isfinite(v), "sweep: bad number '" + piece + "'");
    parts.push_back(v);
    if (colon == std::string::npos) break;
    pos = colon + 1;
  }
  if (parts.size() == 1) {
    grid.values = {parts[0]};
    return grid;
  }
  detail::require(parts.size() == 3, "sweep: need start:stop:step, got '" + range + "'");
  const double start = parts[0];
  const double stop = parts[1];
  const double step = parts[2];
  detail::require(step != 0.0 && (stop - start) / step >= -1e-9, "sweep: step does not move from start to stop");
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  detail::require(count <= 100000, "sweep: too many points");
  for (long i = 0; i < count; ++i) {
    const double v = start + static_cast<double>(i) * step;
    // Snap values that should be integers or round decimals to kill drift.
    grid.values.push_back(std::abs(v) < 1e-12 ? 0.0 : std::round(v * 1e9) / 1e9);
  }
  return grid;
}

std::uint64_t parse_count(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  detail::require(used == text.size() && !text.empty(), "expected a count, got '" + text + "'");
  detail::require(std::isfinite(v) && v >= 1.0 && v <= 9007199254740992.0 && v == std::floor(v),
                  "count must be a positive integer, got '" + text + "'");
  return static_cast<std::uint64_t>(v);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return execute(args, out, err, true);
  } catch (const DomainError& e) {
    err << "fama: " << e.what() << '\n';
    return kExitDomain;
  } catch (const ConvergenceError& e) {
    err << "fama: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const nlohmann::json::exception& e) {
    err << "fama: manifest: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "fama: " << e.what() << '\n';
    return kExitFailure;
  }
}

int run_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace fama::cli
