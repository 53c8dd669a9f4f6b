#pragma once

// Command-line front end. run_cli() is the whole program; tools/pucci.cpp
// only forwards argv and the standard streams.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pucci/bifurcation.hpp"
#include "pucci/core.hpp"
#include "pucci/crosscheck.hpp"
#include "pucci/error.hpp"
#include "pucci/integrate.hpp"
#include "pucci/spectrum.hpp"
#include "pucci/verify.hpp"

namespace pucci {

inline constexpr std::string_view kVersion = "0.1.0";

enum class ExitCode : int { Ok = 0, Usage = 1, Numerical = 2, VerifyFailed = 3 };

struct RunConfig {
  std::string command;
  std::optional<double> lambda_lo;
  std::optional<double> lambda_hi;
  std::optional<int> dim;
  std::string op = "max";
  int count = 5;
  std::string sign = "plus";
  int k = 1;
  int samples = kDefaultEigenSamples;
  std::string nonlinearity = "oddpower:c=-1,p=3";
  double alpha_min = 1e-4;
  double alpha_max = 1.0;
  int steps = 20;
  std::string suite = "all";
  std::uint64_t seed = 42;
  int n = 4000;
  std::string format = "csv";
  std::string out;
  std::string config;
  IntegratorConfig integrator;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "zero", "oddpower:c=-1,p=3", "lions:p=2".
inline Nonlinearity parse_nonlinearity(std::string_view text) {
  const auto colon = text.find(':');
  const std::string family(text.substr(0, colon));
  std::map<std::string, double> kv;
  if (colon != std::string_view::npos) {
    std::stringstream ss{std::string(text.substr(colon + 1))};
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError("--nonlinearity: expected key=value, got '" + item + "'");
      try {
        kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
      } catch (const std::exception&) {
        throw UsageError("--nonlinearity: bad number in '" + item + "'");
      }
    }
  }
  auto take = [&](const std::string& key, double fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const double v = it->second;
    kv.erase(it);
    return v;
  };
  Nonlinearity nl;
  if (family == "zero") {
    nl = Nonlinearity::zero();
  } else if (family == "oddpower") {
    const double c = take("c", -1.0);
    nl = Nonlinearity::odd_power(c, take("p", 3.0));
  } else if (family == "lions") {
    nl = Nonlinearity::lions_power(take("p", 2.0));
  } else {
    throw UsageError("--nonlinearity: unknown family '" + family + "' (zero, oddpower, lions)");
  }
  if (!kv.empty()) throw UsageError("--nonlinearity: unknown key '" + kv.begin()->first + "'");
  try {
    nl.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("--nonlinearity: ") + e.what());
  }
  return nl;
}

namespace detail {

inline std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::vector<std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open '" + path + "'");
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("--config: line " + std::to_string(lineno) + " is not key=value");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    args.push_back(trim(line.substr(0, eq)));
    args.push_back(trim(line.substr(eq + 1)));
  }
  return args;
}

struct Parsed {
  CLI::App app{"Half-spectrum and bifurcation branches of Pucci's extremal operators on the unit ball",
               "pucci"};
  CLI::App* spectrum = nullptr;
  CLI::App* eigen = nullptr;
  CLI::App* branch = nullptr;
  CLI::App* verify = nullptr;
};

inline void build(Parsed& p, RunConfig& rc) {
  CLI::App& app = p.app;
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  p.spectrum = app.add_subcommand("spectrum", "first K half-eigenvalues");
  p.eigen = app.add_subcommand("eigenfunction", "sampled eigenfunction phi^sign_k");
  p.branch = app.add_subcommand("branch", "bifurcation branch S^sign_k");
  p.verify = app.add_subcommand("verify", "property suites");

  for (CLI::App* sub : {p.spectrum, p.eigen, p.branch, p.verify}) {
    sub->add_option("--lambda", rc.lambda_lo, "lower ellipticity constant");
    sub->add_option("--Lambda", rc.lambda_hi, "upper ellipticity constant");
    sub->add_option("--dim", rc.dim, "space dimension N");
    sub->add_option("--operator", rc.op, "max (M+) or min (M-)")
        ->check(CLI::IsMember({"max", "min"}));
    sub->add_option("--format", rc.format)->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", rc.out, "output file (default stdout)");
    sub->add_option("--config", rc.config, "flat key=value file; explicit flags win");
    sub->add_option("--rel-tol", rc.integrator.rel_tol);
    sub->add_option("--abs-tol", rc.integrator.abs_tol);
    sub->add_option("--max-step", rc.integrator.max_step);
  }
  p.spectrum->add_option("--count", rc.count, "number of eigenvalues per sign");
  p.spectrum->add_option("--sign", rc.sign)->check(CLI::IsMember({"plus", "minus", "both"}));
  for (CLI::App* sub : {p.eigen, p.branch}) {
    sub->add_option("--sign", rc.sign)->check(CLI::IsMember({"plus", "minus"}));
    sub->add_option("--k", rc.k, "spectral index");
  }
  p.eigen->add_option("--samples", rc.samples, "number of equal intervals on [0,1]");
  p.branch->add_option("--nonlinearity", rc.nonlinearity, "zero | oddpower:c=..,p=.. | lions:p=..");
  p.branch->add_option("--alpha-min", rc.alpha_min);
  p.branch->add_option("--alpha-max", rc.alpha_max);
  p.branch->add_option("--steps", rc.steps);
  p.verify->add_option("--suite", rc.suite)->check(CLI::IsMember(
      {"interlacing", "gap", "monotonicity", "bounds", "maxprinciple", "crosscheck", "envelope",
       "all"}));
  p.verify->add_option("--seed", rc.seed);
  p.verify->add_option("--n", rc.n, "crosscheck grid intervals");
}

inline CLI::App* active(const Parsed& p) {
  for (CLI::App* sub : {p.spectrum, p.eigen, p.branch, p.verify}) {
    if (sub->parsed()) return sub;
  }
  return nullptr;
}

inline PucciParams require_params(const RunConfig& rc) {
  if (!rc.lambda_lo) throw UsageError("--lambda is required");
  if (!rc.lambda_hi) throw UsageError("--Lambda is required");
  if (!rc.dim) throw UsageError("--dim is required");
  if (!(*rc.lambda_lo > 0.0)) throw UsageError("--lambda must be positive");
  if (!(*rc.lambda_hi >= *rc.lambda_lo)) throw UsageError("--Lambda must be >= --lambda");
  if (*rc.dim < 1) throw UsageError("--dim must be >= 1");
  return make_params(*rc.lambda_lo, *rc.lambda_hi, *rc.dim,
                     rc.op == "min" ? Operator::MinOp : Operator::MaxOp);
}

inline void validate(const RunConfig& rc) {
  const auto& c = rc.integrator;
  if (!(c.rel_tol > 0.0 && c.rel_tol < 1.0)) throw UsageError("--rel-tol must lie in (0, 1)");
  if (!(c.abs_tol > 0.0 && c.abs_tol < 1.0)) throw UsageError("--abs-tol must lie in (0, 1)");
  if (!(c.max_step > 0.0)) throw UsageError("--max-step must be positive");
  if (rc.command == "spectrum" && rc.count < 1) throw UsageError("--count must be >= 1");
  if ((rc.command == "eigenfunction" || rc.command == "branch") && rc.k < 1) {
    throw UsageError("--k must be >= 1");
  }
  if (rc.command == "eigenfunction" && rc.samples < 1) throw UsageError("--samples must be >= 1");
  if (rc.command == "branch") {
    if (!(rc.alpha_min > 0.0)) throw UsageError("--alpha-min must be positive");
    if (!(rc.alpha_max > rc.alpha_min)) throw UsageError("--alpha-max must exceed --alpha-min");
    if (rc.steps < 2) throw UsageError("--steps must be >= 2");
  }
  if (rc.command == "verify" && rc.n < 16) throw UsageError("--n must be >= 16");
}

inline nlohmann::json meta_json(const RunConfig& rc, const std::optional<PucciParams>& p) {
  nlohmann::json meta;
  meta["command"] = rc.command;
  meta["version"] = std::string(kVersion);
  meta["seed"] = rc.seed;
  if (p) {
    meta["params"] = {{"lambda", p->lambda_lo},
                      {"Lambda", p->lambda_hi},
                      {"dim", p->dim},
                      {"operator", p->op == Operator::MaxOp ? "max" : "min"}};
  } else {
    meta["params"] = nullptr;
  }
  meta["tolerances"] = {{"rel_tol", rc.integrator.rel_tol},
                        {"abs_tol", rc.integrator.abs_tol},
                        {"max_step", rc.integrator.max_step}};
  return meta;
}

inline int run_spectrum(const RunConfig& rc, std::ostream& out) {
  const PucciParams p = require_params(rc);
  std::vector<HalfEigenvalue> rows;
  for (Sign s : {Sign::Plus, Sign::Minus}) {
    if (rc.sign != "both" && rc.sign != to_string(s)) continue;
    auto vals = half_eigenvalues(s, rc.count, p, rc.integrator);
    rows.insert(rows.end(), vals.begin(), vals.end());
  }
  if (rc.format == "json") {
    nlohmann::json j{{"meta", meta_json(rc, p)}, {"rows", nlohmann::json::array()}};
    for (const auto& h : rows) {
      j["rows"].push_back({{"sign", to_string(h.sign)},
                           {"k", h.k},
                           {"beta", h.beta},
                           {"mu", h.mu},
                           {"dw_at_beta", h.dw_at_beta}});
    }
    out << j.dump(2) << '\n';
    return 0;
  }
  out << "sign,k,beta,mu,dw_at_beta\n";
  for (const auto& h : rows) {
    out << to_string(h.sign) << ',' << h.k << ',' << g17(h.beta) << ',' << g17(h.mu) << ','
        << g17(h.dw_at_beta) << '\n';
  }
  return 0;
}

inline Sign parse_sign(const std::string& s) { return s == "minus" ? Sign::Minus : Sign::Plus; }

inline int run_eigenfunction(const RunConfig& rc, std::ostream& out) {
  const PucciParams p = require_params(rc);
  const Sign s = parse_sign(rc.sign);
  const auto vals = half_eigenvalues(s, rc.k, p, rc.integrator);
  const Eigenfunction ef = eigenfunction(vals.back(), rc.samples, p, rc.integrator);
  if (rc.format == "json") {
    nlohmann::json meta = meta_json(rc, p);
    meta["sign"] = to_string(s);
    meta["k"] = rc.k;
    meta["mu"] = ef.parent.mu;
    meta["boundary_derivative"] = ef.boundary_derivative;
    nlohmann::json j{{"meta", meta}, {"rows", nlohmann::json::array()}};
    for (const auto& e : ef.samples) j["rows"].push_back({{"r", e.r}, {"value", e.value}});
    out << j.dump(2) << '\n';
    return 0;
  }
  out << "# sign=" << to_string(s) << ",k=" << rc.k << ",mu=" << g17(ef.parent.mu)
      << ",boundary_derivative=" << g17(ef.boundary_derivative) << '\n';
  out << "r,value\n";
  for (const auto& e : ef.samples) out << g17(e.r) << ',' << g17(e.value) << '\n';
  return 0;
}

inline int run_branch(const RunConfig& rc, std::ostream& out) {
  const PucciParams p = require_params(rc);
  const Nonlinearity nl = parse_nonlinearity(rc.nonlinearity);
  const Branch br = trace_branch(rc.k, parse_sign(rc.sign), nl, rc.alpha_min, rc.alpha_max,
                                 rc.steps, p, rc.integrator);
  if (rc.format == "json") {
    nlohmann::json meta = meta_json(rc, p);
    meta["sign"] = to_string(br.sign);
    meta["k"] = br.k;
    meta["nonlinearity"] = nl.describe();
    meta["termination_reason"] = std::string(to_string(br.termination_reason));
    nlohmann::json j{{"meta", meta}, {"rows", nlohmann::json::array()}};
    for (const auto& b : br.points) {
      j["rows"].push_back({{"alpha", b.alpha},
                           {"mu", b.mu},
                           {"sup_norm", b.sup_norm},
                           {"nodal_count", b.nodal_count},
                           {"boundary_derivative", b.boundary_derivative}});
    }
    out << j.dump(2) << '\n';
    return 0;
  }
  out << "alpha,mu,sup_norm,nodal_count,boundary_derivative\n";
  for (const auto& b : br.points) {
    out << g17(b.alpha) << ',' << g17(b.mu) << ',' << g17(b.sup_norm) << ',' << b.nodal_count
        << ',' << g17(b.boundary_derivative) << '\n';
  }
  out << "# termination_reason=" << to_string(br.termination_reason) << '\n';
  return 0;
}

inline int run_verify(const RunConfig& rc, std::ostream& out) {
  VerifyOptions opt;
  opt.seed = rc.seed;
  opt.n = rc.n;
  opt.cfg = rc.integrator;
  std::optional<PucciParams> p;
  if (rc.lambda_lo || rc.lambda_hi || rc.dim) {
    p = require_params(rc);
    opt.params = std::vector<ParamSet>{{p->lambda_lo, p->lambda_hi, p->dim}};
  }
  const auto suite = parse_suite(rc.suite);
  if (!suite) throw UsageError("--suite: unknown suite '" + rc.suite + "'");
  const std::vector<Check> checks = run_suite(*suite, opt);
  const bool ok = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  if (rc.format == "json") {
    nlohmann::json meta = meta_json(rc, p);
    meta["suite"] = rc.suite;
    meta["n"] = rc.n;
    nlohmann::json j{{"meta", meta}, {"rows", nlohmann::json::array()}};
    for (const auto& c : checks) {
      j["rows"].push_back({{"suite", c.suite},
                           {"name", c.name},
                           {"pass", c.pass},
                           {"margin", c.margin},
                           {"detail", c.detail}});
    }
    out << j.dump(2) << '\n';
  } else {
    for (const auto& c : checks) out << format_check(c) << '\n';
  }
  return ok ? 0 : static_cast<int>(ExitCode::VerifyFailed);
}

}  // namespace detail

/// Exit codes: 0 success, 1 usage, 2 numerical failure, 3 verification failure.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  std::vector<std::string> args(argv + 1, argv + argc);
  // Returns an exit code when parsing ended the run (help, version, error).
  auto parse = [&](detail::Parsed& p) -> std::optional<int> {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
      p.app.parse(rev);
    } catch (const CLI::ParseError& e) {
      return p.app.exit(e, out, err) == 0 ? 0 : static_cast<int>(ExitCode::Usage);
    }
    return std::nullopt;
  };
  try {
    // The first pass only locates the subcommand and the config file.
    // Config entries are applied for options not given explicitly.
    {
      RunConfig probe;
      detail::Parsed first;
      detail::build(first, probe);
      if (auto code = parse(first)) return *code;
      if (!probe.config.empty()) {
        CLI::App* sub = detail::active(first);
        const auto extra = detail::read_config(probe.config);
        std::vector<std::string> merged{sub->get_name()};
        for (std::size_t i = 0; i < extra.size(); i += 2) {
          const std::string& key = extra[i];
          if (key == "config") throw UsageError("--config: nested config files are not supported");
          const CLI::Option* opt = sub->get_option_no_throw("--" + key);
          if (opt == nullptr) {
            throw UsageError("--config: '" + key + "' is not an option of " + sub->get_name());
          }
          if (opt->count() > 0) continue;
          merged.push_back("--" + key);
          merged.push_back(extra[i + 1]);
        }
        merged.insert(merged.end(), args.begin() + 1, args.end());
        args = std::move(merged);
      }
    }
    detail::Parsed parsed;
    detail::build(parsed, rc);
    if (auto code = parse(parsed)) return *code;
    rc.command = detail::active(parsed)->get_name();
    detail::validate(rc);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::Usage);
  }

  std::ofstream file;
  std::ostream* sink = &out;
  if (!rc.out.empty()) {
    file.open(rc.out, std::ios::binary);
    if (!file) {
      err << "error: --out: cannot open '" << rc.out << "'\n";
      return static_cast<int>(ExitCode::Usage);
    }
    sink = &file;
  }
  try {
    if (rc.command == "spectrum") return detail::run_spectrum(rc, *sink);
    if (rc.command == "eigenfunction") return detail::run_eigenfunction(rc, *sink);
    if (rc.command == "branch") return detail::run_branch(rc, *sink);
    return detail::run_verify(rc, *sink);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::Usage);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind() == ErrorKind::InvalidArgument ? ExitCode::Usage
                                                                   : ExitCode::Numerical);
  }
}

}  // namespace pucci
