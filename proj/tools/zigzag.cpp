// Command-line front end for the one-dimensional zig-zag sampler:
// event simulation, MSE replicate studies, drift certification, empirical
// rate probes and bound tables. Every run writes plot-ready CSV plus a
// manifest; CSV bodies are byte-identical across reruns with equal flags.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zigzag/config.hpp"
#include "zigzag/estimators.hpp"
#include "zigzag/experiments.hpp"
#include "zigzag/pdmp.hpp"
#include "zigzag/skeleton_io.hpp"
#include "zigzag/targets.hpp"
#include "zigzag/theory.hpp"
#include "zigzag/version.hpp"

namespace {

using zigzag::format_g17;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;

class ManifestWriter {
 public:
  ManifestWriter(std::string subcommand, std::string path)
      : path_(std::move(path)), start_(std::chrono::steady_clock::now()) {
    entries_.emplace_back("subcommand", std::move(subcommand));
    entries_.emplace_back("version", zigzag::kVersion);
  }

  void set(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
  }
  void set(const std::string& key, double value) { set(key, format_g17(value)); }
  void set(const std::string& key, std::uint64_t value) {
    set(key, std::to_string(value));
  }
  void artifact(const std::string& path) { artifacts_.push_back(path); }

  // Written last: the manifest's existence signals a completed run.
  void write() const {
    std::ofstream out(path_);
    if (!out) throw std::runtime_error("cannot write manifest: " + path_);
    out << "# run manifest\n";
    for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
    for (const auto& a : artifacts_) out << "artifact = " << a << "\n";
    const auto wall = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start_)
                          .count();
    out << "wall_clock_seconds = " << wall << "\n";
  }

 private:
  std::string path_;
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<std::string> artifacts_;
  std::chrono::steady_clock::time_point start_;
};

std::string sanitize_tag(std::string tag) {
  for (auto& c : tag)
    if (c == ':' || c == '/' || c == '.') c = '_';
  return tag;
}

void write_mse_csv(const std::string& path, const std::string& policy,
                   const zigzag::MseCurve& curve, std::uint64_t seed,
                   std::size_t replicates) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "# policy=" << policy << "\n";
  out << "# truth=" << format_g17(curve.truth) << "\n";
  out << "# replicates=" << replicates << "\n";
  out << "# seed=" << seed << "\n";
  out << "time,mse,stderr\n";
  for (std::size_t i = 0; i < curve.checkpoints.size(); ++i) {
    out << format_g17(curve.checkpoints[i]) << ',' << format_g17(curve.mse[i])
        << ',' << format_g17(curve.se[i]) << '\n';
  }
}

int cmd_simulate(const std::string& target_tag, const std::string& refresh_tag,
                 const std::string& start, double horizon, std::uint64_t seed,
                 std::uint64_t stream, const std::string& out_path) {
  ManifestWriter manifest("simulate", out_path + ".manifest");
  const zigzag::Target target = zigzag::make_target(target_tag);
  const zigzag::RefreshPolicy refresh = zigzag::make_refresh(refresh_tag);
  const zigzag::ZigZagState initial = zigzag::parse_start(start);
  if (!(horizon > 0.0)) throw std::domain_error("horizon must be > 0");

  zigzag::RngStream rng(seed, stream);
  const zigzag::Skeleton skel =
      zigzag::simulate(initial, horizon, target, refresh, rng);
  zigzag::write_skeleton_csv(out_path, skel,
                             {target_tag, refresh_tag, seed, stream});

  manifest.set("target", target_tag);
  manifest.set("refresh", refresh_tag);
  manifest.set("start", start);
  manifest.set("horizon", horizon);
  manifest.set("seed", seed);
  manifest.set("stream", stream);
  manifest.set("events", static_cast<std::uint64_t>(skel.events.size()));
  manifest.artifact(out_path);
  manifest.write();
  std::cout << "wrote " << out_path << " (" << skel.events.size() << " events)\n";
  return kExitOk;
}

int cmd_mse(const std::string& config_path, const std::string& out_dir,
            unsigned threads) {
  const auto kv = zigzag::KeyValueConfig::parse_file(config_path);
  auto file_cfg = zigzag::load_experiment_config(kv);
  if (threads > 0) file_cfg.base.threads = threads;

  ManifestWriter manifest("mse", out_dir + "/run_manifest.txt");
  manifest.set("config", config_path);
  manifest.set("target", file_cfg.base.target_tag);
  manifest.set("start", format_g17(file_cfg.base.initial.x) + "," +
                            (file_cfg.base.initial.theta > 0 ? "+1" : "-1"));
  manifest.set("horizon", file_cfg.base.horizon);
  manifest.set("replicates", static_cast<std::uint64_t>(file_cfg.base.replicates));
  manifest.set("threshold", file_cfg.base.query.threshold);
  manifest.set("seed", file_cfg.base.seed);

  for (std::size_t i = 0; i < file_cfg.refresh_tags.size(); ++i) {
    zigzag::ExperimentConfig cfg = file_cfg.base;
    cfg.refresh_tag = file_cfg.refresh_tags[i];
    // Separate seeds per policy keep the farms statistically unpaired.
    cfg.seed = file_cfg.base.seed + 1000003ULL * i;
    const auto curve = zigzag::run_mse(cfg);
    const std::string path =
        out_dir + "/mse_" + sanitize_tag(cfg.refresh_tag) + ".csv";
    write_mse_csv(path, cfg.refresh_tag, curve, cfg.seed, cfg.replicates);
    manifest.set("seed." + cfg.refresh_tag, cfg.seed);
    manifest.artifact(path);
    std::cout << cfg.refresh_tag << ": final mse=" << format_g17(curve.mse.back())
              << " se=" << format_g17(curve.se.back()) << " -> " << path << "\n";
  }
  manifest.write();
  return kExitOk;
}

int cmd_drift_check(const std::string& target_tag, const std::string& refresh_tag,
                    double k, std::optional<double> nu, double eta,
                    double delta_prime, std::optional<double> beta,
                    std::optional<double> delta, double r_max,
                    const std::string& csv_path) {
  const zigzag::Target target = zigzag::make_target(target_tag);
  const zigzag::RefreshPolicy refresh = zigzag::make_refresh(refresh_tag);
  zigzag::CertifyOptions options;
  options.eta = eta;
  options.delta_prime = delta_prime;
  options.nu = nu;
  options.grid.r_max = r_max;
  if (beta && delta) options.pinned_beta_delta = {{*beta, *delta}};
  else if (beta || delta)
    throw std::domain_error("--beta and --delta must be given together");

  const auto report = zigzag::certify_drift(target, refresh, k, options);

  std::cout << "drift certificate for target=" << target_tag
            << " refresh=" << refresh_tag << "\n"
            << "  certified:         " << (report.certified ? "yes" : "no") << "\n"
            << "  k=" << report.params.k << "  a=" << report.params.a
            << "  nu=" << report.params.nu << "\n";
  if (report.certified) {
    std::cout << "  beta=" << report.params.beta
              << "  delta=" << report.params.delta << "\n"
              << "  compact_radius:    " << report.compact_radius << "\n"
              << "  sup_ratio_outside: " << report.sup_ratio_outside << "\n"
              << "  c_margin:          " << report.c_margin << "\n"
              << "  K_inside:          " << report.K_inside << "\n";
  } else {
    std::cout << "  reason: " << report.diagnostic << "\n";
  }

  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + csv_path);
    out << "x,theta,ratio,bound\n";
    const auto params = report.certified
                            ? report.params
                            : zigzag::DriftParams::from_k(
                                  k, report.params.nu > k ? report.params.nu : k + 1.0,
                                  0.5, 0.5);
    for (double r : options.grid.radii()) {
      for (double x : {r, -r}) {
        for (int theta : {+1, -1}) {
          const auto ratio = zigzag::drift_ratio(x, theta, params, target, refresh);
          const auto bound = zigzag::drift_ratio_bound(x, theta, params, target, refresh);
          out << format_g17(x) << ',' << theta << ','
              << format_g17(ratio.value()) << ',' << format_g17(bound.value())
              << '\n';
        }
      }
    }
    std::cout << "  grid csv: " << csv_path << "\n";
  }
  return report.certified ? kExitOk : kExitRuntime;
}

int cmd_rate(const std::string& config_path, const std::string& out_path,
             const std::string& report_path, unsigned threads) {
  const auto kv = zigzag::KeyValueConfig::parse_file(config_path);
  auto file_cfg = zigzag::load_experiment_config(kv);
  zigzag::ExperimentConfig cfg = file_cfg.base;
  cfg.refresh_tag = file_cfg.refresh_tags.front();
  if (threads > 0) cfg.threads = threads;

  zigzag::RateOptions options;
  if (kv.has("rate", "thresholds"))
    options.thresholds = kv.get_double_list("rate", "thresholds");
  options.fit_t_lo = kv.get_double_or("rate", "fit_t_lo", 0.0);
  options.fit_t_hi = kv.get_double_or("rate", "fit_t_hi", 0.0);
  const double k = kv.get_double_or("rate", "k", 0.5);
  const double eta = kv.get_double_or("rate", "eta", 0.1);

  ManifestWriter manifest("rate", out_path + ".manifest");
  manifest.set("config", config_path);
  manifest.set("target", cfg.target_tag);
  manifest.set("refresh", cfg.refresh_tag);
  manifest.set("replicates", static_cast<std::uint64_t>(cfg.replicates));
  manifest.set("seed", cfg.seed);

  const auto report = zigzag::rate_slope(cfg, options);

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
  out << "# target=" << cfg.target_tag << "\n# refresh=" << cfg.refresh_tag
      << "\n# replicates=" << cfg.replicates << "\n# seed=" << cfg.seed << "\n";
  out << "time,D\n";
  for (std::size_t i = 0; i < report.times.size(); ++i)
    out << format_g17(report.times[i]) << ',' << format_g17(report.discrepancy[i])
        << '\n';

  // Certification + envelope fit for the same k, reported alongside.
  std::string cert_status = "not-attempted";
  double B = std::nan("");
  try {
    zigzag::CertifyOptions copts;
    copts.eta = eta;
    const zigzag::Target target = zigzag::make_target(cfg.target_tag);
    const zigzag::RefreshPolicy refresh = zigzag::make_refresh(cfg.refresh_tag);
    const auto cert = zigzag::certify_drift(target, refresh, k, copts);
    cert_status = cert.certified ? "certified" : "not-certified";
    if (cert.certified)
      B = zigzag::fit_B(report.times, report.discrepancy, cert.params,
                        cfg.initial, target);
  } catch (const std::exception& ex) {
    cert_status = std::string("error: ") + ex.what();
  }

  std::ofstream rout(report_path);
  if (!rout) throw std::runtime_error("cannot open for writing: " + report_path);
  rout << "slope = " << format_g17(report.slope) << "\n";
  rout << "ci_lo = " << format_g17(report.ci_lo) << "\n";
  rout << "ci_hi = " << format_g17(report.ci_hi) << "\n";
  rout << "points_used = " << report.points_used << "\n";
  rout << "inconclusive = " << (report.inconclusive ? "yes" : "no") << "\n";
  rout << "noise_floor = " << format_g17(report.noise_floor) << "\n";
  rout << "k = " << format_g17(k) << "\n";
  rout << "certification = " << cert_status << "\n";
  rout << "B = " << format_g17(B) << "\n";
  rout.close();

  manifest.artifact(out_path);
  manifest.artifact(report_path);
  manifest.write();

  if (report.inconclusive)
    std::cout << "rate fit inconclusive (" << report.points_used
              << " usable points)\n";
  else
    std::cout << "fitted slope " << report.slope << " [" << report.ci_lo << ", "
              << report.ci_hi << "] over " << report.points_used
              << " points; certification " << cert_status << ", B=" << B << "\n";
  return kExitOk;
}

int cmd_bounds(const std::vector<double>& k_values, double nu, double eta,
               double c, const std::vector<double>& t_values,
               const std::string& out_prefix) {
  if (!(nu > 0.0)) throw std::domain_error("--nu must be > 0");
  if (!(eta > 0.0)) throw std::domain_error("--eta must be > 0");

  ManifestWriter manifest("bounds", out_prefix + ".manifest");
  manifest.set("nu", nu);
  manifest.set("eta", eta);
  manifest.set("c", c);
  bool any_error = false;

  const std::string m_path = out_prefix + "_M.csv";
  {
    std::ofstream out(m_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + m_path);
    out << "k,M\n";
    for (double k : k_values) {
      try {
        out << format_g17(k) << ',' << format_g17(zigzag::refresh_threshold_M(k, nu, eta))
            << '\n';
      } catch (const std::exception&) {
        out << format_g17(k) << ",error\n";
        any_error = true;
      }
    }
  }

  const std::string h_path = out_prefix + "_hairer.csv";
  {
    // H_inv checkpoints for f(u) = c u^a with a tied to the median valid k.
    double k_ref = k_values.front();
    for (double k : k_values)
      if (k > 0.0 && k < nu) k_ref = k;
    const double a = k_ref / (1.0 + k_ref);
    const zigzag::HairerTransforms transforms(c, a);
    std::ofstream out(h_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + h_path);
    out << "# c=" << format_g17(c) << "\n# a=" << format_g17(a) << "\n";
    out << "t,H_inv,f_of_H_inv\n";
    for (double t : t_values)
      out << format_g17(t) << ',' << format_g17(transforms.H_inv(t)) << ','
          << format_g17(transforms.f_of_H_inv(t)) << '\n';
  }

  const std::string l_path = out_prefix + "_lower.csv";
  {
    const auto lb = zigzag::StudentTailLowerBound::compute(nu);
    std::ofstream out(l_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + l_path);
    out << "# C0=" << format_g17(lb.C0) << "\n# K=" << format_g17(lb.K) << "\n";
    out << "t,tv_lower\n";
    for (double t : t_values)
      if (t > lb.K)
        out << format_g17(t) << ',' << format_g17(lb.value(t)) << '\n';
  }

  manifest.artifact(m_path);
  manifest.artifact(h_path);
  manifest.artifact(l_path);
  manifest.write();
  std::cout << "wrote " << m_path << ", " << h_path << ", " << l_path << "\n";
  if (any_error) {
    std::cout << "some M(k) rows violated the precondition (marked 'error')\n";
    return kExitDomain;
  }
  return kExitOk;
}

std::vector<double> parse_grid_or_list(const std::string& text) {
  // Either "lo:hi:n" or a comma-separated list.
  const auto c1 = text.find(':');
  if (c1 != std::string::npos) {
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos)
      throw std::domain_error("grid must be lo:hi:n, got '" + text + "'");
    const double lo = std::stod(text.substr(0, c1));
    const double hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    const int n = std::stoi(text.substr(c2 + 1));
    if (n < 1 || !(hi >= lo)) throw std::domain_error("bad grid '" + text + "'");
    std::vector<double> out;
    for (int i = 0; i < n; ++i)
      out.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1.0));
    return out;
  }
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw std::domain_error("empty list '" + text + "'");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  // Accept "--start -5,+1" as well as "--start=-5,+1": a leading dash on
  // the value would otherwise be taken for an option name.
  std::vector<std::string> args;
  for (int i = 0; i < argc; ++i) args.emplace_back(argv[i]);
  for (std::size_t i = 1; i + 1 < args.size(); ++i) {
    if (args[i] == "--start" && args[i + 1].size() > 1 && args[i + 1][0] == '-' &&
        (std::isdigit(static_cast<unsigned char>(args[i + 1][1])) || args[i + 1][1] == '.')) {
      args[i] += "=" + args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i) + 1);
    }
  }
  std::vector<char*> argv2;
  argv2.reserve(args.size());
  for (auto& a : args) argv2.push_back(a.data());

  CLI::App app{"one-dimensional zig-zag sampler toolkit"};
  app.require_subcommand(1);

  // simulate
  std::string target_tag, refresh_tag = "zero", start = "0,+1";
  double horizon = 1e4;
  std::uint64_t seed = 0, stream = 0;
  std::string out_path = "skeleton.csv";
  auto* sim = app.add_subcommand("simulate", "simulate one path and write the skeleton CSV");
  sim->add_option("--target", target_tag, "target tag (student:<dof>|cauchy|gaussian|custom:<path>)")->required();
  sim->add_option("--refresh", refresh_tag, "refresh tag (zero|const:<g>|grad:<c>)");
  sim->add_option("--start", start, "initial state 'x,theta', e.g. -5,+1");
  sim->add_option("--horizon", horizon, "total simulated time");
  sim->add_option("--seed", seed, "rng seed");
  sim->add_option("--stream", stream, "rng stream id");
  sim->add_option("--out", out_path, "output CSV path");

  // mse
  std::string config_path, out_dir = ".";
  unsigned threads = 0;
  auto* mse = app.add_subcommand("mse", "replicate MSE study from a config file");
  mse->add_option("--config", config_path, "experiment config file")->required();
  mse->add_option("--out-dir", out_dir, "output directory");
  mse->add_option("--threads", threads, "worker threads (0 = auto)");

  // drift-check
  std::string dc_target, dc_refresh = "zero", dc_csv;
  double dc_k = 0.5, dc_eta = 0.1, dc_delta_prime = 0.01, dc_rmax = 1e6;
  std::optional<double> dc_nu, dc_beta, dc_delta;
  auto* dc = app.add_subcommand("drift-check", "numeric Foster-Lyapunov certificate");
  dc->add_option("--target", dc_target, "target tag")->required();
  dc->add_option("--refresh", dc_refresh, "refresh tag");
  dc->add_option("--k", dc_k, "polynomial order to certify")->required();
  dc->add_option("--nu", dc_nu, "tail index override");
  dc->add_option("--eta", dc_eta, "margin for the Remark-style candidate");
  dc->add_option("--delta-prime", dc_delta_prime, "tail-index slack");
  dc->add_option("--beta", dc_beta, "pin beta (with --delta)");
  dc->add_option("--delta", dc_delta, "pin delta (with --beta)");
  dc->add_option("--rmax", dc_rmax, "grid outer radius");
  dc->add_option("--csv", dc_csv, "write x,theta,ratio,bound grid CSV");

  // rate
  std::string rate_config, rate_out = "rate.csv", rate_report = "report.txt";
  unsigned rate_threads = 0;
  auto* rate = app.add_subcommand("rate", "empirical convergence-rate probe");
  rate->add_option("--config", rate_config, "experiment config file")->required();
  rate->add_option("--out", rate_out, "output CSV path");
  rate->add_option("--report", rate_report, "summary key-value report path");
  rate->add_option("--threads", rate_threads, "worker threads (0 = auto)");

  // bounds
  std::string bounds_k = "0.1:0.9:9", bounds_t, bounds_prefix = "bounds";
  double bounds_nu = 1.0, bounds_eta = 0.1, bounds_c = 1.0;
  auto* bounds = app.add_subcommand("bounds", "M(k) table, Hairer checkpoints, TV lower-bound curve");
  bounds->add_option("--k", bounds_k, "k grid: lo:hi:n or comma list");
  bounds->add_option("--nu", bounds_nu, "tail index")->required();
  bounds->add_option("--eta", bounds_eta, "margin eta");
  bounds->add_option("--c", bounds_c, "drift constant c for the transforms");
  bounds->add_option("--t", bounds_t, "time grid: lo:hi:n or comma list");
  bounds->add_option("--out-prefix", bounds_prefix, "output file prefix");

  try {
    app.parse(static_cast<int>(argv2.size()), argv2.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(target_tag, refresh_tag, start, horizon, seed, stream, out_path);
    if (mse->parsed()) return cmd_mse(config_path, out_dir, threads);
    if (dc->parsed())
      return cmd_drift_check(dc_target, dc_refresh, dc_k, dc_nu, dc_eta,
                             dc_delta_prime, dc_beta, dc_delta, dc_rmax, dc_csv);
    if (rate->parsed()) return cmd_rate(rate_config, rate_out, rate_report, rate_threads);
    if (bounds->parsed()) {
      std::vector<double> ks = parse_grid_or_list(bounds_k);
      std::vector<double> ts = bounds_t.empty()
                                   ? zigzag::log_checkpoints(1.0, 1e6, 25)
                                   : parse_grid_or_list(bounds_t);
      return cmd_bounds(ks, bounds_nu, bounds_eta, bounds_c, ts, bounds_prefix);
    }
  } catch (const std::domain_error& ex) {
    std::cerr << "domain error: " << ex.what() << "\n";
    return kExitDomain;
  } catch (const std::invalid_argument& ex) {
    std::cerr << "domain error: " << ex.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
