#include "geocat/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "geocat/closed_forms.hpp"
#include "geocat/oracle.hpp"
#include "geocat/simulator.hpp"

namespace geocat::cli {

namespace {

using Json = nlohmann::ordered_json;

double parse_plain(std::string_view text, std::string_view whole) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError("cannot parse '" + std::string(whole) + "' as a number");
  }
  return value;
}

Json number_or_inf(const MeanTime& t) {
  if (t.is_finite()) return t.value();
  return "inf";
}

Json nullable(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

Json range_json(const GridRange& r) { return Json{{"lo", r.lo}, {"hi", r.hi}, {"n", r.n}}; }

// Values shared by all subcommands; strings keep the user's exact spelling
// so the manifest reproduces the run.
struct Options {
  std::string model;
  std::string lambda_text;
  std::string p_text;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;

  // oracle
  std::string pmf_text;
  bool ctmc = false;
  double tol = 1e-10;
  std::size_t truncation = 2000;
  std::string closure = "reflecting";

  // simulate
  std::string level = "colony";
  std::uint64_t replicas = 100'000;
  std::uint64_t cap = kDefaultEventCap;
  std::string dump_path;

  // phase / critical
  std::string pair;
  std::string p_range_text;
  std::string out_path;
};

struct Context {
  std::vector<std::string> command;
  Options opt;
  std::ostream& out;
  std::ostream& err;
};

Json manifest(const Context& ctx, Json parameters) {
  std::string command;
  for (const auto& token : ctx.command) {
    if (!command.empty()) command += ' ';
    command += token;
  }
  Json m;
  m["command"] = command;
  m["parameters"] = std::move(parameters);
  m["seed"] = ctx.opt.seed ? Json(*ctx.opt.seed) : Json(nullptr);
  m["version"] = kVersion;
  return m;
}

Json runtime(double seconds, unsigned workers) {
  return Json{{"duration_s", seconds}, {"workers", workers}};
}

unsigned resolved_workers(unsigned requested) {
  return requested ? requested : std::max(1u, std::thread::hardware_concurrency());
}

std::ofstream open_output(const std::string& path) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  return file;
}

void finish_output(std::ofstream& file, const std::string& path) {
  file.flush();
  if (!file) throw IoError("failed writing '" + path + "'");
}

// eval ----------------------------------------------------------------------

int cmd_eval(Context& ctx) {
  const auto& o = ctx.opt;
  const Scheme scheme = Scheme::parse(o.model);
  const double lambda = parse_number(o.lambda_text);
  const double p = parse_number(o.p_text);
  const ModelParams params(lambda, p);

  Json rec;
  rec["model"] = scheme.code();
  rec["lambda"] = lambda;
  rec["p"] = p;
  rec["mean_time"] = number_or_inf(mean_time(params, scheme));
  rec["regime"] = regime_name(classify_regime(params, scheme));
  rec["threshold"] = survival_threshold(scheme, lambda);
  rec["manifest"] = manifest(ctx, {{"model", o.model}, {"lambda", o.lambda_text}, {"p", o.p_text}});
  ctx.out << rec.dump() << '\n';
  return kOk;
}

// oracle --------------------------------------------------------------------

std::vector<double> parse_pmf(const std::string& text) {
  std::vector<double> probs;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    probs.push_back(parse_number(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return probs;
}

Json quadrature_json(const QuadratureResult& q) {
  Json rec;
  rec["value"] = q.diverged ? Json("inf") : Json(q.value);
  rec["error_estimate"] = nullable(q.error_estimate);
  rec["diverged"] = q.diverged;
  rec["panels"] = q.panels;
  return rec;
}

int cmd_oracle(Context& ctx) {
  const auto& o = ctx.opt;
  Json rec;
  Json params;
  if (o.ctmc) {
    const double lambda = parse_number(o.lambda_text);
    const double p = parse_number(o.p_text);
    Closure closure = Closure::Reflecting;
    if (o.closure == "killing") {
      closure = Closure::Killing;
    } else if (o.closure != "reflecting") {
      throw ParseError("--closure must be 'reflecting' or 'killing'");
    }
    const double h1 = ctmc_hitting_time(ModelParams(lambda, p), {o.truncation, closure});
    rec["kind"] = "ctmc";
    rec["model"] = "a";
    rec["lambda"] = lambda;
    rec["p"] = p;
    rec["value"] = h1;
    rec["truncation"] = o.truncation;
    rec["closure"] = o.closure;
    params = {{"lambda", o.lambda_text}, {"p", o.p_text}, {"M", o.truncation}, {"closure", o.closure}};
  } else if (!o.pmf_text.empty()) {
    const OffspringLaw law(parse_pmf(o.pmf_text));
    rec["kind"] = "quadrature";
    rec["pmf"] = std::vector<double>(law.probs().begin(), law.probs().end());
    rec["offspring_mean"] = law.mean();
    rec.update(quadrature_json(narayan_mean_time(law, {o.tol})));
    rec["tol"] = o.tol;
    params = {{"pmf", o.pmf_text}, {"tol", o.tol}};
  } else {
    if (o.model.empty()) throw ParseError("oracle needs --model, --pmf or --ctmc");
    const Scheme scheme = Scheme::parse(o.model);
    const double lambda = parse_number(o.lambda_text);
    const double p = parse_number(o.p_text);
    const ModelParams mp(lambda, p);
    if (!scheme.disperses()) {
      throw DomainError("quadrature oracle applies to dispersion models; use --ctmc for model a");
    }
    const OffspringLaw law = offspring_law(mp, scheme);
    rec["kind"] = "quadrature";
    rec["model"] = scheme.code();
    rec["lambda"] = lambda;
    rec["p"] = p;
    rec["offspring_mean"] = law.mean();
    rec.update(quadrature_json(narayan_mean_time(law, {o.tol})));
    rec["tol"] = o.tol;
    params = {{"model", o.model}, {"lambda", o.lambda_text}, {"p", o.p_text}, {"tol", o.tol}};
  }
  rec["manifest"] = manifest(ctx, std::move(params));
  ctx.out << rec.dump() << '\n';
  return kOk;
}

// simulate ------------------------------------------------------------------

int cmd_simulate(Context& ctx) {
  const auto& o = ctx.opt;
  const auto start = std::chrono::steady_clock::now();
  const Scheme scheme = Scheme::parse(o.model);
  const double lambda = parse_number(o.lambda_text);
  const double p = parse_number(o.p_text);
  Level level = Level::Colony;
  if (o.level == "individual") {
    level = Level::Individual;
  } else if (o.level != "colony") {
    throw ParseError("--level must be 'individual' or 'colony'");
  }

  const ModelSpec model{ModelParams(lambda, p), scheme, level};
  SimConfig config;
  config.replicas = o.replicas;
  config.master_seed = *o.seed;
  config.event_cap = o.cap;
  config.workers = o.workers;
  config.keep_raw = !o.dump_path.empty();

  std::optional<std::ofstream> dump;
  if (!o.dump_path.empty()) dump = open_output(o.dump_path);

  SimEstimate est;
  try {
    est = estimate_mean(model, config);
  } catch (const EstimateUnavailable& e) {
    ctx.err << "error: " << e.what() << '\n';
    return kAllCensored;
  }
  if (dump) {
    write_samples_csv(*dump, est.raw);
    finish_output(*dump, o.dump_path);
  }

  const std::string level_name = scheme.disperses() ? o.level : "n/a";
  Json rec;
  rec["model"] = scheme.code();
  rec["lambda"] = lambda;
  rec["p"] = p;
  rec["level"] = level_name;
  rec["replicas"] = o.replicas;
  rec["mean"] = est.mean;
  rec["se"] = nullable(est.se);
  rec["n_completed"] = est.n_completed;
  rec["n_censored"] = est.n_censored;
  rec["censoring_flag"] = est.flagged();
  rec["manifest"] = manifest(ctx, {{"model", o.model},
                                   {"lambda", o.lambda_text},
                                   {"p", o.p_text},
                                   {"level", level_name},
                                   {"replicas", o.replicas},
                                   {"cap", o.cap},
                                   {"dump", o.dump_path}});
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  rec["runtime"] = runtime(elapsed.count(), resolved_workers(o.workers));
  ctx.out << rec.dump() << '\n';
  if (est.flagged()) {
    ctx.err << "warning: " << est.n_censored << " of " << o.replicas
            << " replicas hit the event cap and are excluded from the mean\n";
  }
  return kOk;
}

// phase / critical ----------------------------------------------------------

int cmd_phase(Context& ctx) {
  const auto& o = ctx.opt;
  const auto start = std::chrono::steady_clock::now();
  const ComparisonPair pair = parse_pair(o.pair);
  const GridRange lambdas = parse_range(o.lambda_text);
  const GridRange ps = parse_range(o.p_text);

  std::ofstream file = open_output(o.out_path);
  const auto cells = sweep_grid(pair, lambdas, ps, o.workers);
  write_phase_csv(file, cells);
  finish_output(file, o.out_path);

  std::map<std::string, std::size_t> counts;
  for (auto label : {RegionLabel::DispersionBetter, RegionLabel::NoDispersionBetter,
                     RegionLabel::BothInfinite, RegionLabel::OnlyDispersionFinite,
                     RegionLabel::OnlyNoDispersionFinite, RegionLabel::Boundary}) {
    counts[region_name(label)] = 0;
  }
  for (const auto& cell : cells) ++counts[region_name(cell.region)];

  Json rec;
  rec["pair"] = pair_name(pair);
  rec["out"] = o.out_path;
  rec["rows"] = cells.size();
  rec["regions"] = counts;
  rec["manifest"] = manifest(ctx, {{"pair", o.pair},
                                   {"lambda", range_json(lambdas)},
                                   {"p", range_json(ps)},
                                   {"out", o.out_path}});
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  rec["runtime"] = runtime(elapsed.count(), resolved_workers(o.workers));
  ctx.out << rec.dump() << '\n';
  return kOk;
}

int cmd_critical(Context& ctx) {
  const auto& o = ctx.opt;
  const ComparisonPair pair = parse_pair(o.pair);
  const double lambda = parse_number(o.lambda_text);
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  SearchInterval interval = default_interval(pair, lambda);
  if (!o.p_range_text.empty()) {
    const auto colon = o.p_range_text.find(':');
    if (colon == std::string::npos) throw ParseError("--p-range must be lo:hi");
    interval.lo = parse_number(std::string_view(o.p_range_text).substr(0, colon));
    interval.hi = parse_number(std::string_view(o.p_range_text).substr(colon + 1));
  }
  const auto roots = critical_points(pair, lambda, interval);
  ctx.out << Json(roots).dump() << '\n';
  ctx.err << manifest(ctx, {{"pair", o.pair},
                            {"lambda", o.lambda_text},
                            {"p_range", Json{interval.lo, interval.hi}}})
                 .dump()
          << '\n';
  return kOk;
}

// config files --------------------------------------------------------------

bool mentions(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Flat `key=value` lines; appended as `--key value` unless the flag is
// already on the command line.
std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ParseError("--config needs a path");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;

  std::ifstream file(path);
  if (!file) throw IoError("cannot read config file '" + path + "'");
  std::vector<std::string> extra;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(file, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(path + ":" + std::to_string(lineno) + ": empty key");
    if (mentions(args, key)) continue;
    if (key == "ctmc") {
      if (value == "true" || value == "1") extra.push_back("--ctmc");
      continue;
    }
    extra.push_back("--" + key);
    extra.push_back(value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

// Command line recorded in the manifest: everything except worker count,
// which never affects results.
std::vector<std::string> canonical_command(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--workers") {
      ++i;
      continue;
    }
    if (args[i].rfind("--workers=", 0) == 0) continue;
    kept.push_back(args[i]);
  }
  return kept;
}

}  // namespace

double parse_number(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_plain(text, text);
  const double num = parse_plain(text.substr(0, slash), text);
  const double den = parse_plain(text.substr(slash + 1), text);
  if (den == 0.0) throw ParseError("zero denominator in '" + std::string(text) + "'");
  return num / den;
}

GridRange parse_range(std::string_view text) {
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw ParseError("range '" + std::string(text) + "' is not lo:hi:n");
  GridRange range{parse_number(text.substr(0, c1)), parse_number(text.substr(c1 + 1, c2 - c1 - 1)), 0};
  const std::string_view count = text.substr(c2 + 1);
  std::size_t n = 0;
  const auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), n);
  if (count.empty() || ec != std::errc() || ptr != count.data() + count.size() || n < 2) {
    throw ParseError("range '" + std::string(text) + "' needs an integer point count >= 2");
  }
  if (range.hi < range.lo) throw ParseError("range '" + std::string(text) + "' has hi < lo");
  range.n = n;
  return range;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  try {
    args = apply_config(raw_args);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  }

  Context ctx{canonical_command(args), {}, out, err};
  Options& o = ctx.opt;

  CLI::App app{"Extinction times of growth models with geometric catastrophes", "geocat"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto add_seed = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--seed", o.seed, "Master seed (64-bit)");
    if (required) opt->required();
  };

  auto* eval = app.add_subcommand("eval", "Closed-form mean extinction time and regime");
  eval->add_option("--model", o.model, "a, o2, o3, i2 or i3")->required();
  eval->add_option("--lambda", o.lambda_text, "Birth rate (decimal or num/den)")->required();
  eval->add_option("--p", o.p_text, "Survival probability (decimal or num/den)")->required();
  add_seed(eval, false);

  auto* oracle = app.add_subcommand("oracle", "Quadrature or linear-system ground truth");
  oracle->add_option("--model", o.model, "o<d> or i<d>");
  oracle->add_option("--pmf", o.pmf_text, "Explicit offspring law p0,p1,...");
  oracle->add_flag("--ctmc", o.ctmc, "Truncated linear system for model a");
  oracle->add_option("--lambda", o.lambda_text, "Birth rate");
  oracle->add_option("--p", o.p_text, "Survival probability");
  oracle->add_option("--tol", o.tol, "Quadrature absolute tolerance")->check(CLI::PositiveNumber);
  oracle->add_option("--M", o.truncation, "CTMC truncation level");
  oracle->add_option("--closure", o.closure, "reflecting or killing");
  add_seed(oracle, false);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of the mean extinction time");
  simulate->add_option("--model", o.model, "a, o<d> or i<d>")->required();
  simulate->add_option("--lambda", o.lambda_text, "Birth rate")->required();
  simulate->add_option("--p", o.p_text, "Survival probability")->required();
  simulate->add_option("--level", o.level, "individual or colony");
  simulate->add_option("--replicas", o.replicas, "Number of replicas (>= 2)");
  simulate->add_option("--cap", o.cap, "Event cap per replica");
  simulate->add_option("--dump", o.dump_path, "Per-replica CSV output path");
  simulate->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
  add_seed(simulate, true);

  auto* phase = app.add_subcommand("phase", "Region map over a (lambda, p) grid");
  phase->add_option("--pair", o.pair, "a-o2, a-i2, a-o3 or a-i3")->required();
  phase->add_option("--lambda", o.lambda_text, "lo:hi:n")->required();
  phase->add_option("--p", o.p_text, "lo:hi:n")->required();
  phase->add_option("--out", o.out_path, "CSV output path")->required();
  phase->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
  add_seed(phase, false);

  auto* critical = app.add_subcommand("critical", "Values of p where both strategies tie");
  critical->add_option("--pair", o.pair, "a-o2, a-i2, a-o3 or a-i3")->required();
  critical->add_option("--lambda", o.lambda_text, "Birth rate")->required();
  critical->add_option("--p-range", o.p_range_text, "Search interval lo:hi");
  add_seed(critical, false);

  try {
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kParseError;
  }

  try {
    if (*eval) return cmd_eval(ctx);
    if (*oracle) return cmd_oracle(ctx);
    if (*simulate) return cmd_simulate(ctx);
    if (*phase) return cmd_phase(ctx);
    if (*critical) return cmd_critical(ctx);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return kParseError;
}

}  // namespace geocat::cli
