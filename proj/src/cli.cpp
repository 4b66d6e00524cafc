#include "subdetect/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "subdetect/combinatorics.hpp"
#include "subdetect/matrix_io.hpp"
#include "subdetect/simulation.hpp"

namespace subdetect::cli {

namespace {

// Raised for flag problems found after CLI11 has parsed the command line.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Config {
  std::size_t N = 0;
  std::size_t M = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  double a = 0.0;
  std::string grid;
  std::string detector = "combined";
  std::string law;
  double theta0 = 0.0;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  std::size_t restarts = 1000;
  std::size_t max_iterations = 1000;
  std::size_t reps = 100;
  std::size_t samples = 100;
  double alpha = 0.01;
  double delta = kDefaultInflation;
  double eta = 0.25;
  double t0 = kDefaultHcStart;
  double c = kDefaultHcConstant;
  double H = 2.3262;
  double threshold = 0.0;
  std::string placement = "upper-left";
  std::string scale = "theta";
  unsigned workers = 1;
  bool exact = false;
  std::string input = "-";
  std::string output = "-";
};

// Which flags the user actually passed, by long name.
class Given {
public:
  explicit Given(const CLI::App* app) : app_(app) {}
  [[nodiscard]] bool operator()(const std::string& flag) const {
    const CLI::Option* opt = app_->get_option_no_throw("--" + flag);
    return opt != nullptr && opt->count() > 0;
  }

private:
  const CLI::App* app_;
};

void require(const Given& given, std::initializer_list<const char*> flags, const std::string& why) {
  for (const char* flag : flags) {
    if (!given(flag)) throw UsageError("--" + std::string(flag) + " is required " + why);
  }
}

// --- option registration ---------------------------------------------------

void add_dims(CLI::App* sub, Config& c) {
  sub->add_option("--N", c.N, "Matrix rows")->check(CLI::PositiveNumber);
  sub->add_option("--M", c.M, "Matrix columns")->check(CLI::PositiveNumber);
  sub->add_option("--n", c.n, "Submatrix rows")->check(CLI::PositiveNumber);
  sub->add_option("--m", c.m, "Submatrix columns")->check(CLI::PositiveNumber);
}

void add_noise(CLI::App* sub, Config& c) {
  sub->add_option("--law", c.law, "Null law: poisson, bernoulli, exponential, gaussian-variance");
  sub->add_option("--theta0", c.theta0, "Null parameter of --law");
  sub->add_option("--sigma", c.sigma, "Gaussian noise level");
}

void add_detector(CLI::App* sub, Config& c) {
  sub->add_option("--detector", c.detector,
                  "linear, scan, combined, adaptive, rectangle, hc, studentized, expfam, two-sided");
  sub->add_option("--restarts", c.restarts, "Alternating search restarts K");
  sub->add_option("--max-iterations", c.max_iterations, "Iteration cap per restart");
  sub->add_option("--delta", c.delta, "Scan threshold inflation");
  sub->add_option("--eta", c.eta, "Rectangle grid spacing");
  sub->add_option("--t0", c.t0, "Higher criticism start");
  sub->add_option("--c", c.c, "Higher criticism constant");
  sub->add_option("--H", c.H, "Linear test threshold");
  sub->add_flag("--exact", c.exact, "Enumerate all supports instead of alternating search");
}

void add_seed(CLI::App* sub, Config& c) { sub->add_option("--seed", c.seed, "Master seed (required for randomness)"); }
void add_workers(CLI::App* sub, Config& c) { sub->add_option("--workers", c.workers, "Worker threads, 0 = all"); }
void add_output(CLI::App* sub, Config& c) { sub->add_option("--output", c.output, "Output path, - for stdout"); }

// --- validation helpers ----------------------------------------------------

ProblemShape shape_of(const Config& c, const Given& given) {
  require(given, {"N", "M", "n", "m"}, "for this subcommand");
  return ProblemShape(c.N, c.M, c.n, c.m);
}

std::optional<LawDescriptor> law_of(const Config& c, const Given& given) {
  if (!given("law")) return std::nullopt;
  require(given, {"theta0"}, "with --law");
  return LawDescriptor(parse_law(c.law), c.theta0);
}

NoiseModel noise_of(const Config& c, const Given& given) {
  if (auto law = law_of(c, given)) {
    if (given("sigma")) throw UsageError("--sigma and --law are mutually exclusive");
    return *law;
  }
  if (!(c.sigma > 0.0) || !std::isfinite(c.sigma)) throw UsageError("--sigma must be a finite value > 0");
  return GaussianNoise{c.sigma};
}

bool needs_search_seed(DetectorKind kind, bool exact) {
  switch (kind) {
    case DetectorKind::linear:
    case DetectorKind::rectangle:
    case DetectorKind::high_criticism: return false;
    default: return !exact;
  }
}

bool needs_submatrix_shape(DetectorKind kind) {
  return kind != DetectorKind::linear && kind != DetectorKind::high_criticism && kind != DetectorKind::adaptive;
}

DetectorSpec detector_of(const Config& c, const Given& given, std::size_t N, std::size_t M) {
  DetectorSpec spec;
  spec.kind = parse_detector(c.detector);
  spec.H = c.H;
  spec.delta = c.delta;
  spec.eta = c.eta;
  spec.t0 = c.t0;
  spec.hc_c = c.c;
  spec.mode = c.exact ? ScanMode::exact : ScanMode::heuristic;
  spec.search.restarts = c.restarts;
  spec.search.max_iterations = c.max_iterations;
  spec.search.validate();
  if (!std::isfinite(c.H)) throw UsageError("--H must be finite");
  if (!(c.delta >= 0.0)) throw UsageError("--delta must be >= 0");
  if (spec.kind == DetectorKind::two_sided && !(c.delta > 0.0)) throw UsageError("--delta must be > 0 for two-sided");
  if (spec.kind == DetectorKind::rectangle && !(c.eta > 0.0 && c.eta < 1.0)) throw UsageError("--eta must lie in (0, 1)");
  if (spec.kind == DetectorKind::high_criticism) {
    if (!(c.t0 > 0.0)) throw UsageError("--t0 must be > 0");
    if (!(c.c > 2.0)) throw UsageError("--c must exceed 2");
  }
  if (spec.kind == DetectorKind::expfam) {
    spec.law = law_of(c, given);
    if (!spec.law) throw UsageError("--law is required for the expfam detector");
  }
  if (spec.kind == DetectorKind::adaptive) spec.grid = AdaptiveGrid::dyadic(N, M);
  if (needs_search_seed(spec.kind, c.exact) && !given("seed")) {
    throw UsageError("--seed is required: the " + std::string(to_string(spec.kind)) +
                     " detector uses randomised search (or pass --exact)");
  }
  return spec;
}

std::vector<double> amplitude_grid(const Config& c, const Given& given) {
  if (given("grid") == given("a")) throw UsageError("pass exactly one of --a and --grid");
  if (given("a")) return {c.a};
  std::vector<std::string> parts;
  std::stringstream ss(c.grid);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() != 3) throw UsageError("--grid must look like start:stop:steps");
  double start = 0.0;
  double stop = 0.0;
  try {
    start = parse_double(parts[0]);
    stop = parse_double(parts[1]);
  } catch (const DetectionError&) {
    throw UsageError("--grid endpoints must be numbers");
  }
  std::size_t steps = 0;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(parts[2], &used);
    if (used != parts[2].size() || v < 1) throw std::invalid_argument("steps");
    steps = static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw UsageError("--grid steps must be a positive integer");
  }
  if (steps == 1) {
    if (start != stop) throw UsageError("--grid with one step needs start == stop");
    return {start};
  }
  if (!(stop > start)) throw UsageError("--grid needs stop > start");
  std::vector<double> grid(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    grid[k] = start + (stop - start) * static_cast<double>(k) / static_cast<double>(steps - 1);
  }
  grid.back() = stop;
  return grid;
}

// --- output -----------------------------------------------------------------

template <typename Write>
void emit(const std::string& path, std::ostream& out, Write&& write) {
  if (path == "-") {
    write(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw DetectionError(ErrorKind::ParseError, "cannot open --output '" + path + "' for writing");
  write(file);
  if (!file) throw DetectionError(ErrorKind::ParseError, "failed writing --output '" + path + "'");
}

std::string index_list(const std::vector<std::size_t>& idx) {
  std::string s;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (k > 0) s += ' ';
    s += std::to_string(idx[k] + 1);
  }
  return s;
}

ObservationMatrix read_input(const std::string& path) {
  if (path == "-") return read_matrix_csv(std::cin);
  return read_matrix_csv(std::filesystem::path(path));
}

// --- subcommands ------------------------------------------------------------
//
// Each returns a thunk: building it validates flags (usage errors), running it
// touches data (data errors).

using Action = std::function<int(std::ostream&)>;

Action prepare_generate(const Config& c, const Given& given) {
  require(given, {"N", "M", "seed"}, "for generate");
  NoiseModel noise = noise_of(c, given);
  std::optional<ProblemShape> shape;
  if (given("a")) {
    shape = shape_of(c, given);
    if (!(c.a >= 0.0) || !std::isfinite(c.a)) throw UsageError("--a must be a finite value >= 0");
  } else if (given("n") || given("m")) {
    throw UsageError("--n/--m only make sense with --a");
  }
  if (c.scale != "theta" && c.scale != "canonical") throw UsageError("--scale must be theta or canonical");
  double theta1 = 0.0;
  if (const auto* law = std::get_if<LawDescriptor>(&noise); law && shape && c.a > 0.0) {
    theta1 = c.scale == "theta" ? law->theta0() + c.a : law->theta_for_canonical_shift(c.a);
    if (!law->in_domain(theta1)) throw UsageError("--a moves theta outside the parameter domain");
  }
  return [c, noise, shape, theta1](std::ostream& out) {
    ObservationMatrix Y = generate_null(c.N, c.M, noise, derive_seed(c.seed, 0, 0));
    if (shape && c.a > 0.0) {
      const auto support = SubmatrixSupport::block(0, c.n, 0, c.m);
      if (const auto* law = std::get_if<LawDescriptor>(&noise)) {
        Y = plant_law_signal(Y, *law, support, theta1, derive_seed(c.seed, 0, 1));
      } else {
        Y = plant_signal(Y, SignalSpec::constant(support, c.a));
      }
    }
    emit(c.output, out, [&](std::ostream& o) { write_matrix_csv(o, Y); });
    return kExitOk;
  };
}

Action prepare_detect(const Config& c, const Given& given) {
  const DetectorKind kind = parse_detector(c.detector);
  if (needs_submatrix_shape(kind)) require(given, {"n", "m"}, "for the " + std::string(to_string(kind)) + " detector");
  // N and M come from the matrix; validate only what is known now.
  if (given("n") && given("m")) (void)ProblemShape(std::max(c.n, c.N), std::max(c.m, c.M), c.n, c.m);
  if (given("threshold") && !std::isfinite(c.threshold)) throw UsageError("--threshold must be finite");
  const std::size_t probeN = std::max<std::size_t>({c.N, c.n, 4});
  const std::size_t probeM = std::max<std::size_t>({c.M, c.m, 4});
  (void)detector_of(c, given, probeN, probeM);

  return [c, given, kind](std::ostream& out) {
    const ObservationMatrix Y = read_input(c.input);
    if ((given("N") && c.N != Y.rows()) || (given("M") && c.M != Y.cols())) {
      std::ostringstream msg;
      msg << "input is " << Y.rows() << "x" << Y.cols() << " but --N/--M say " << c.N << "x" << c.M;
      throw DetectionError(ErrorKind::DimensionMismatch, msg.str());
    }
    const ProblemShape shape = needs_submatrix_shape(kind) ? ProblemShape(Y.rows(), Y.cols(), c.n, c.m)
                                                           : ProblemShape(Y.rows(), Y.cols(), 1, 1);
    DetectorSpec spec = detector_of(c, given, Y.rows(), Y.cols());
    if (given("threshold")) {
      spec.threshold_override = c.threshold;
      spec.threshold_source = "empirical";
    }
    const TestReport report = run_detector(spec, Y, shape, c.seed);
    out << report.detector_name << ',' << format_double(report.statistic) << ',' << format_double(report.threshold)
        << ',' << (report.reject ? 1 : 0) << ',' << report.threshold_source << ','
        << (report.located_support ? index_list(report.located_support->rows()) : "") << ','
        << (report.located_support ? index_list(report.located_support->cols()) : "") << '\n';
    return report.reject ? kExitReject : kExitOk;
  };
}

Action prepare_calibrate(const Config& c, const Given& given) {
  require(given, {"seed"}, "for calibrate");
  const ProblemShape shape = shape_of(c, given);
  const NoiseModel noise = noise_of(c, given);
  const DetectorSpec spec = detector_of(c, given, c.N, c.M);
  if (c.samples < 20) throw UsageError("--samples must be >= 20");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  return [c, shape, noise, spec](std::ostream& out) {
    const double t = calibrate_threshold(spec, shape, noise, c.samples, c.alpha, c.seed, c.workers);
    emit(c.output, out, [&](std::ostream& o) {
      o << "detector,N,M,n,m,alpha,samples,seed,threshold\n"
        << to_string(spec.kind) << ',' << c.N << ',' << c.M << ',' << c.n << ',' << c.m << ','
        << format_double(c.alpha) << ',' << c.samples << ',' << c.seed << ',' << format_double(t) << '\n';
    });
    return kExitOk;
  };
}

Action prepare_power(const Config& c, const Given& given) {
  require(given, {"seed"}, "for power");
  ExperimentPlan plan;
  plan.shape = shape_of(c, given);
  plan.amplitudes = amplitude_grid(c, given);
  plan.replications = c.reps;
  plan.calibration_samples = given("samples") ? c.samples : 0;
  plan.alpha_target = c.alpha;
  plan.seed = c.seed;
  plan.noise = noise_of(c, given);
  plan.detector = detector_of(c, given, c.N, c.M);
  plan.workers = c.workers;
  if (c.placement == "random") {
    plan.placement = Placement::random;
  } else if (c.placement != "upper-left") {
    throw UsageError("--placement must be upper-left or random");
  }
  if (std::holds_alternative<LawDescriptor>(plan.noise)) {
    if (c.scale == "theta") {
      plan.scale = AmplitudeScale::theta_shift;
    } else if (c.scale == "canonical") {
      plan.scale = AmplitudeScale::canonical_shift;
    } else {
      throw UsageError("--scale must be theta or canonical");
    }
  }
  if (plan.detector.kind == DetectorKind::two_sided) plan.sidedness = Sidedness::two_sided;
  plan.validate();
  return [c, plan](std::ostream& out) {
    const PowerCurve curve = estimate_power(plan);
    emit(c.output, out, [&](std::ostream& o) { write_power_csv(o, curve); });
    return kExitOk;
  };
}

Action prepare_boundary(const Config& c, const Given& given) {
  const ProblemShape shape = shape_of(c, given);
  const BoundaryReport b = detection_boundary(shape);
  return [shape, b](std::ostream& out) {
    out << "N,M,n,m,dense_term,sparse_term,a_star,regime\n"
        << shape.N() << ',' << shape.M() << ',' << shape.n() << ',' << shape.m() << ','
        << format_double(b.dense_term) << ',' << format_double(b.sparse_term) << ',' << format_double(b.a_star)
        << ',' << to_string(b.regime) << '\n';
    return kExitOk;
  };
}

Action prepare_oracle(const Config& c, const Given& given, std::ostream& err) {
  require(given, {"seed"}, "for oracle-compare");
  const ProblemShape shape = shape_of(c, given);
  check_enumeration_budget(shape, kDefaultEnumerationBudget);
  SearchConfig search;
  search.restarts = c.restarts;
  search.max_iterations = c.max_iterations;
  search.seed = derive_seed(c.seed, 1, 0);
  search.validate();
  return [c, shape, search, &err](std::ostream& out) {
    const auto rows = oracle_compare(shape, c.reps, search, c.seed, c.workers);
    std::size_t matched = 0;
    emit(c.output, out, [&](std::ostream& o) {
      o << "index,heuristic_score,exact_score,match\n";
      for (const auto& r : rows) {
        matched += r.matches() ? 1 : 0;
        o << r.index << ',' << format_double(r.heuristic_score) << ',' << format_double(r.exact_score) << ','
          << (r.matches() ? 1 : 0) << '\n';
      }
    });
    err << "matched " << matched << " of " << rows.size() << '\n';
    return kExitOk;
  };
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Detect an elevated-mean submatrix in a noisy matrix", "subdetect"};
  app.require_subcommand(1);

  CLI::App* generate = app.add_subcommand("generate", "Emit a seeded noise matrix as CSV, optionally with a planted block");
  add_dims(generate, c);
  add_noise(generate, c);
  add_seed(generate, c);
  add_output(generate, c);
  generate->add_option("--a", c.a, "Amplitude of the planted upper-left n x m block");
  generate->add_option("--scale", c.scale, "Law amplitudes: theta (theta0 + a) or canonical");

  CLI::App* calibrate = app.add_subcommand("calibrate", "Empirical null quantile of a detector's scan statistic");
  add_dims(calibrate, c);
  add_noise(calibrate, c);
  add_detector(calibrate, c);
  add_seed(calibrate, c);
  add_workers(calibrate, c);
  add_output(calibrate, c);
  calibrate->add_option("--samples", c.samples, "Null samples");
  calibrate->add_option("--alpha", c.alpha, "Target level");

  CLI::App* detect = app.add_subcommand("detect", "Run a detector on a matrix CSV; exit 3 on reject");
  add_dims(detect, c);
  add_noise(detect, c);
  add_detector(detect, c);
  add_seed(detect, c);
  detect->add_option("--input", c.input, "Matrix CSV, - for stdin");
  detect->add_option("--threshold", c.threshold, "Replace the scan-type threshold (e.g. a calibrated one)");

  CLI::App* power = app.add_subcommand("power", "Monte Carlo power curve as CSV");
  add_dims(power, c);
  add_noise(power, c);
  add_detector(power, c);
  add_seed(power, c);
  add_workers(power, c);
  add_output(power, c);
  power->add_option("--a", c.a, "Single amplitude");
  power->add_option("--grid", c.grid, "Amplitude grid start:stop:steps");
  power->add_option("--reps", c.reps, "Replications per amplitude")->check(CLI::PositiveNumber);
  power->add_option("--samples", c.samples, "Calibrate on this many null samples first");
  power->add_option("--alpha", c.alpha, "Calibration level");
  power->add_option("--placement", c.placement, "upper-left or random");
  power->add_option("--scale", c.scale, "Law amplitudes: theta (theta0 + a) or canonical");

  CLI::App* boundary = app.add_subcommand("boundary", "Print the detection boundary for a shape");
  add_dims(boundary, c);

  CLI::App* oracle = app.add_subcommand("oracle-compare", "Alternating search against exhaustive enumeration");
  add_dims(oracle, c);
  add_seed(oracle, c);
  add_workers(oracle, c);
  add_output(oracle, c);
  oracle->add_option("--restarts", c.restarts, "Alternating search restarts K");
  oracle->add_option("--max-iterations", c.max_iterations, "Iteration cap per restart");
  oracle->add_option("--reps", c.reps, "Number of matrices")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    (void)app.exit(e, out, err);
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const Given given(sub);
  Action action;
  try {
    const std::string name = sub->get_name();
    if (name == "generate") action = prepare_generate(c, given);
    else if (name == "detect") action = prepare_detect(c, given);
    else if (name == "calibrate") action = prepare_calibrate(c, given);
    else if (name == "power") action = prepare_power(c, given);
    else if (name == "boundary") action = prepare_boundary(c, given);
    else action = prepare_oracle(c, given, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DetectionError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    return action(out);
  } catch (const DetectionError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace subdetect::cli
