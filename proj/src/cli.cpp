#include "bincomp/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <optional>

#include "bincomp/bcd.hpp"
#include "bincomp/io.hpp"
#include "bincomp/mimo.hpp"
#include "bincomp/scd.hpp"
#include "bincomp/schur.hpp"

namespace bincomp::cli {

namespace {

using Json = nlohmann::ordered_json;

/// Tolerance flags shared by the decomposition commands. Each falls back to
/// its BINCOMP_* environment variable, then to the library default.
struct TolFlags {
  Tolerances tol;

  void attach(CLI::App* app) {
    app->add_option("--tol,--rank-tol", tol.rank_rel_tol, "relative rank tolerance")
        ->envname("BINCOMP_RANK_TOL")
        ->capture_default_str();
    app->add_option("--psd-tol", tol.psd_tol, "PSD tolerance")
        ->envname("BINCOMP_PSD_TOL")
        ->capture_default_str();
    app->add_option("--round-tol", tol.round_tol, "sign rounding tolerance")
        ->envname("BINCOMP_ROUND_TOL")
        ->capture_default_str();
  }
};

Json components_json(const IntMatrix& m) {
  Json arr = Json::array();
  for (Index j = 0; j < m.cols(); ++j) {
    Json col = Json::array();
    for (Index i = 0; i < m.rows(); ++i) col.push_back(m(i, j));
    arr.push_back(std::move(col));
  }
  return arr;
}

Json weights_json(const Vector& w) {
  Json arr = Json::array();
  for (Index i = 0; i < w.size(); ++i) arr.push_back(w(i));
  return arr;
}

Json solver_stats_json(const ScdDiagnostics& d) {
  Json iters = Json::array();
  for (const auto& it : d.iterations) {
    iters.push_back(Json{{"iteration", it.iteration},
                         {"rank", it.rank},
                         {"draws", it.draws},
                         {"vertex_objective", it.vertex_objective},
                         {"zeta", it.zeta},
                         {"sdp_residual", it.sdp_residual},
                         {"sdp_iterations", it.sdp_iterations},
                         {"diag_deviation", it.diag_deviation},
                         {"min_eig", it.min_eig}});
  }
  return Json{{"sdp_solves", d.sdp_solves},
              {"sdp_iterations", d.sdp_iterations},
              {"redraws", d.redraws},
              {"constraints_selected", d.constraints_selected},
              {"iterations", std::move(iters)}};
}

Json timings_json(const ScdDiagnostics* d, double total_ms) {
  Json t = Json::object();
  if (d) {
    for (const auto& [stage, ms] : d->timings_ms) t[stage] = ms;
  }
  t["total"] = total_ms;
  return t;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

Json base_report(const std::string& hash, const std::string& algorithm, std::uint64_t seed) {
  return Json{{"input_hash", hash},
              {"algorithm", algorithm},
              {"components", Json::array()},
              {"weights", Json::array()},
              {"residual_fro", nullptr},
              {"schur_certificate", false},
              {"seed", seed},
              {"timings_ms", Json::object()},
              {"solver_stats", Json::object()}};
}

void mark_failed(Json& report, const std::string& stage, const std::string& message) {
  report["status"] = "failed";
  report["failure_stage"] = stage;
  report["error"] = message;
}

void emit(const Json& report, const std::string& out_path, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    write_file(out_path, text);
  }
}

SymMatrix read_square(const std::string& path, std::string& hash) {
  const std::string bytes = read_file(path);
  hash = sha256_hex(bytes);
  const MatrixFile f = parse_matrix_csv(bytes);
  if (f.data.rows() != f.data.cols()) {
    throw Error(Errc::ShapeMismatch, "matrix is " + std::to_string(f.data.rows()) + "x" +
                                         std::to_string(f.data.cols()) + ", expected square");
  }
  return SymMatrix(f.data);
}

/// Dirichlet(1, ..., 1), redrawn while some weight is below 0.01.
Vector dirichlet_weights(Index r, Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vector w(r);
    for (Index i = 0; i < r; ++i) w(i) = -std::log1p(-rng.uniform());
    w /= w.sum();
    if (w.minCoeff() >= 0.01) return w;
  }
  throw Error(Errc::GenerationFailed, "no Dirichlet draw with every weight >= 0.01");
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::string kind = "sign";
  Index n = 0;
  Index r = 0;
  std::uint64_t seed = 0;
  std::string prefix;
};

int cmd_gen(const GenArgs& a, std::ostream& out, std::ostream& err) {
  Rng rng(a.seed);
  std::map<std::string, std::string> meta{
      {"n", std::to_string(a.n)}, {"r", std::to_string(a.r)}, {"kind", a.kind}};
  IntMatrix comps;
  Vector w;
  Matrix mix;
  try {
    if (a.kind == "sign") {
      SignMatrix s = random_schur_independent_signs(a.n, a.r, rng);
      ConvexWeights cw(dirichlet_weights(a.r, rng));
      canonicalize(s, cw);
      comps = s.entries();
      w = cw.values();
      mix = s.real() * w.asDiagonal() * s.real().transpose();
      mix.diagonal().setOnes();
    } else {
      BinaryMatrix z = random_binary_family_schur_independent(a.n, a.r, rng);
      ConvexWeights cw(dirichlet_weights(a.r, rng));
      canonicalize(z, cw);
      comps = z.entries();
      w = cw.values();
      mix = z.real() * w.asDiagonal() * z.real().transpose();
    }
  } catch (const Error& e) {
    err << "gen: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kUsageError;
  }
  const std::string p = a.prefix;
  write_file(p + "_components.csv", format_matrix_csv(comps, meta));
  write_file(p + "_weights.csv", format_matrix_csv(Matrix(w), meta));
  write_file(p + "_matrix.csv", format_matrix_csv(mix, meta));
  out << p << "_components.csv\n" << p << "_weights.csv\n" << p << "_matrix.csv\n";
  return kSuccess;
}

// ---------------------------------------------------------- check-schur

int cmd_check_schur(const std::string& input, const std::string& kind, const Tolerances& tol,
                    std::ostream& out, std::ostream& err) {
  IntMatrix m;
  try {
    m = to_int_matrix(read_matrix_csv(input).data);
  } catch (const Error& e) {
    err << "check-schur: " << e.what() << "\n";
    return kUsageError;
  }
  SchurRank rank;
  try {
    if (kind == "sign") {
      rank = schur_rank_signs(SignMatrix(m), tol);
    } else {
      rank = schur_rank_binary(BinaryMatrix(m), tol);
    }
  } catch (const std::invalid_argument& e) {
    err << "check-schur: " << e.what() << "\n";
    return kUsageError;
  }
  out << (rank.independent() ? "independent" : "not independent") << ": rank " << rank.achieved
      << " of " << rank.required << "\n";
  return rank.independent() ? kSuccess : kNegativeVerdict;
}

// ------------------------------------------------------------------ scd

struct DecompArgs {
  std::string input;
  std::string algorithm = "full";
  std::uint64_t seed = 0;
  std::string out_path;
  bool verbose = false;
  TolFlags tol;
};

void print_iteration(std::ostream& err, const ScdIterationRecord& it) {
  err << "iter " << it.iteration << " rank " << it.rank << " draws " << it.draws << " zeta "
      << it.zeta << " sdp_res " << it.sdp_residual << " diag_dev " << it.diag_deviation
      << " min_eig " << it.min_eig << "\n";
}

int cmd_scd(const DecompArgs& a, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  std::string hash;
  Json report = base_report("", a.algorithm == "compressed" ? "scd-compressed" : "scd-full", a.seed);
  std::optional<CorrelationMatrix> corr;
  try {
    const SymMatrix x = read_square(a.input, hash);
    report["input_hash"] = hash;
    corr.emplace(x, a.tol.tol);
  } catch (const Error& e) {
    mark_failed(report, "input", e.what());
    if (!hash.empty()) emit(report, a.out_path, out);
    err << "scd: " << e.what() << "\n";
    return kUsageError;
  }

  ScdOptions opts;
  opts.tol = a.tol.tol;
  if (a.verbose) opts.on_iteration = [&err](const ScdIterationRecord& it) { print_iteration(err, it); };
  Rng rng(a.seed);
  try {
    SignDecomposition d = a.algorithm == "compressed" ? scd_compressed(*corr, rng, opts)
                                                      : sign_component_decomposition(*corr, rng, opts);
    const VerificationReport v = verify_decomposition(*corr, d.components, d.weights, opts.tol);
    report["components"] = components_json(d.components.entries());
    report["weights"] = weights_json(d.weights.values());
    report["residual_fro"] = v.residual;
    report["schur_certificate"] = v.schur_independent;
    report["timings_ms"] = timings_json(&d.diagnostics, elapsed_ms(start));
    report["solver_stats"] = solver_stats_json(d.diagnostics);
    report["status"] = "ok";
  } catch (const DecompositionFailed& e) {
    mark_failed(report, e.stage(), e.what());
    report["timings_ms"] = timings_json(nullptr, elapsed_ms(start));
    emit(report, a.out_path, out);
    err << "scd: " << e.what() << "\n";
    return kDecompositionFailed;
  }
  emit(report, a.out_path, out);
  return kSuccess;
}

// ------------------------------------------------------------------ bcd

int cmd_bcd(const DecompArgs& a, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  std::string hash;
  Json report = base_report("", "bcd", a.seed);
  std::optional<PsdInput> h;
  try {
    const SymMatrix x = read_square(a.input, hash);
    report["input_hash"] = hash;
    h.emplace(x, a.tol.tol);
  } catch (const Error& e) {
    mark_failed(report, "input", e.what());
    if (!hash.empty()) emit(report, a.out_path, out);
    err << "bcd: " << e.what() << "\n";
    return kUsageError;
  }

  BcdOptions opts;
  opts.scd.tol = a.tol.tol;
  if (a.verbose) {
    opts.scd.on_iteration = [&err](const ScdIterationRecord& it) { print_iteration(err, it); };
  }
  Rng rng(a.seed);
  try {
    BinaryDecomposition d = binary_component_decomposition(*h, rng, opts);
    report["components"] = components_json(d.components.entries());
    report["weights"] = weights_json(d.weights.values());
    report["residual_fro"] = d.residual_fro;
    report["schur_certificate"] = d.schur_certificate;
    report["timings_ms"] = timings_json(&d.diagnostics, elapsed_ms(start));
    report["solver_stats"] = solver_stats_json(d.diagnostics);
    report["status"] = "ok";
  } catch (const DecompositionFailed& e) {
    mark_failed(report, e.stage(), e.what());
    report["timings_ms"] = timings_json(nullptr, elapsed_ms(start));
    emit(report, a.out_path, out);
    err << "bcd: " << e.what() << "\n";
    return kDecompositionFailed;
  }
  emit(report, a.out_path, out);
  return kSuccess;
}

// ----------------------------------------------------------------- mimo

struct MimoArgs {
  Index devices = 0;
  Index active = 1;
  std::string antennas = "exact";
  double noise = 0.2;
  std::uint64_t seed = 0;
  std::string out_path;
  TolFlags tol;
};

int cmd_mimo(const MimoArgs& a, std::ostream& out, std::ostream& err) {
  std::optional<Index> antennas;
  if (a.antennas != "exact") {
    try {
      std::size_t used = 0;
      const long long m = std::stoll(a.antennas, &used);
      if (used != a.antennas.size() || m < 1) throw std::invalid_argument("");
      antennas = static_cast<Index>(m);
    } catch (const std::exception&) {
      err << "mimo: --antennas takes a positive integer or 'exact'\n";
      return kUsageError;
    }
  }
  if (a.devices < 2 || a.active < 0 || a.active > a.devices || a.noise < 0.0) {
    err << "mimo: need devices >= 2, 0 <= active <= devices, noise >= 0\n";
    return kUsageError;
  }

  const auto start = std::chrono::steady_clock::now();
  Rng rng(a.seed);
  const PilotCodebook cb = assign_pilots(a.devices, rng);
  const ChannelScene scene = random_scene(cb, a.active, a.noise, antennas, rng);

  Json report{{"true_active", scene.active},
              {"detected", Json::array()},
              {"fading_true", scene.fading},
              {"fading_est", Json::array()},
              {"mode", antennas ? "empirical" : "exact"},
              {"n", cb.n},
              {"devices", a.devices},
              {"antennas", antennas ? Json(*antennas) : Json(nullptr)},
              {"noise", a.noise},
              {"seed", a.seed}};

  int code = kSuccess;
  try {
    const CovarianceObservation obs = simulate_covariance(cb, scene, rng);
    const Denoised dn = denoise_and_normalize(obs, a.tol.tol);
    report["noise_est"] = dn.noise;
    report["rank_est"] = dn.rank;
    ScdOptions opts = antennas ? empirical_options() : ScdOptions{};
    if (!antennas) opts.tol = a.tol.tol;
    const DetectionReport det = detect_active(dn.y_norm, dn.scale, cb, rng, opts);
    report["detected"] = det.detected;
    report["fading_est"] = det.fading_est;
    report["schur_certificate"] = det.schur_certificate;
    const bool exact = det.detected == scene.active;
    report["status"] = exact ? "ok" : "mismatch";
    code = exact ? kSuccess : kDetectionMismatch;
  } catch (const DecompositionFailed& e) {
    mark_failed(report, e.stage(), e.what());
    code = kDetectionMismatch;
  } catch (const Error& e) {
    mark_failed(report, std::string(to_string(e.code())), e.what());
    code = kDetectionMismatch;
  }
  report["timings_ms"] = timings_json(nullptr, elapsed_ms(start));
  emit(report, a.out_path, out);
  if (code != kSuccess) err << "mimo: detected set differs from the active set\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sign and binary component decompositions of low-rank matrices", "bincomp"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a Schur-independent fixture");
  g->add_option("--kind", gen.kind)->check(CLI::IsMember({"sign", "binary"}))->capture_default_str();
  g->add_option("--n", gen.n)->required()->check(CLI::PositiveNumber);
  g->add_option("--r", gen.r)->required()->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--out-prefix", gen.prefix)->required();

  std::string cs_input, cs_kind = "sign";
  TolFlags cs_tol;
  auto* cs = app.add_subcommand("check-schur", "test a component file for Schur independence");
  cs->add_option("--input", cs_input)->required();
  cs->add_option("--kind", cs_kind)->check(CLI::IsMember({"sign", "binary"}))->capture_default_str();
  cs_tol.attach(cs);

  DecompArgs scd;
  auto* s = app.add_subcommand("scd", "sign component decomposition");
  s->add_option("--input", scd.input)->required();
  s->add_option("--algorithm", scd.algorithm)
      ->check(CLI::IsMember({"full", "compressed"}))
      ->capture_default_str();
  s->add_option("--seed", scd.seed)->capture_default_str();
  s->add_option("--out", scd.out_path, "report path (stdout if omitted)");
  s->add_flag("--verbose", scd.verbose, "per-iteration trace on stderr");
  scd.tol.attach(s);

  DecompArgs bcd;
  auto* b = app.add_subcommand("bcd", "binary component decomposition");
  b->add_option("--input", bcd.input)->required();
  b->add_option("--seed", bcd.seed)->capture_default_str();
  b->add_option("--out", bcd.out_path, "report path (stdout if omitted)");
  b->add_flag("--verbose", bcd.verbose, "per-iteration trace on stderr");
  bcd.tol.attach(b);

  MimoArgs mimo;
  auto* m = app.add_subcommand("mimo", "simulate activity detection");
  m->add_option("--devices", mimo.devices)->required();
  m->add_option("--active", mimo.active)->capture_default_str();
  m->add_option("--antennas", mimo.antennas, "snapshot count or 'exact'")->capture_default_str();
  m->add_option("--noise", mimo.noise)->capture_default_str();
  m->add_option("--seed", mimo.seed)->capture_default_str();
  m->add_option("--out", mimo.out_path, "report path (stdout if omitted)");
  mimo.tol.attach(m);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*g) return cmd_gen(gen, out, err);
    if (*cs) {
      cs_tol.tol.validate();
      return cmd_check_schur(cs_input, cs_kind, cs_tol.tol, out, err);
    }
    if (*s) {
      scd.tol.tol.validate();
      return cmd_scd(scd, out, err);
    }
    if (*b) {
      bcd.tol.tol.validate();
      return cmd_bcd(bcd, out, err);
    }
    if (*m) {
      mimo.tol.tol.validate();
      return cmd_mimo(mimo, out, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace bincomp::cli
