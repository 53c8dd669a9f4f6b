#pragma once

// Property suites shared by the CLI `verify` subcommand and the acceptance
// tests. Every check reports a signed margin: >= 0 means the property holds
// with that much room (in the units named by the check).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pucci/core.hpp"
#include "pucci/crosscheck.hpp"
#include "pucci/error.hpp"
#include "pucci/integrate.hpp"
#include "pucci/spectrum.hpp"

namespace pucci {

enum class Suite { Interlacing, Gap, Monotonicity, Bounds, MaxPrinciple, Crosscheck, Envelope, All };

inline constexpr std::string_view kSuiteNames[] = {
    "interlacing", "gap", "monotonicity", "bounds", "maxprinciple", "crosscheck", "envelope", "all"};

[[nodiscard]] constexpr std::string_view to_string(Suite s) noexcept {
  return kSuiteNames[static_cast<int>(s)];
}

inline std::optional<Suite> parse_suite(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(Suite::All); ++i) {
    if (kSuiteNames[i] == name) return static_cast<Suite>(i);
  }
  return std::nullopt;
}

struct ParamSet {
  double lambda_lo;
  double lambda_hi;
  int dim;
};

/// (lambda, Lambda) in {(1,2),(1,5),(0.5,1)} x N in {2,3,5}.
inline std::vector<ParamSet> standard_grid() {
  std::vector<ParamSet> out;
  for (auto [l, L] : {std::pair{1.0, 2.0}, {1.0, 5.0}, {0.5, 1.0}}) {
    for (int n : {2, 3, 5}) out.push_back({l, L, n});
  }
  return out;
}

struct Check {
  std::string suite;
  std::string name;
  bool pass = false;
  double margin = 0.0;
  std::string detail;
};

struct VerifyOptions {
  // Replaces the per-suite default parameter sets when present.
  std::optional<std::vector<ParamSet>> params;
  std::uint64_t seed = 42;
  int n = 4000;        // crosscheck grid
  int trials = 100;    // maxprinciple trials per side and envelope fields
  IntegratorConfig cfg;
};

inline std::string describe(const ParamSet& p) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "lambda=%g,Lambda=%g,N=%d", p.lambda_lo, p.lambda_hi, p.dim);
  return buf;
}

inline std::string format_check(const Check& c) {
  char margin[40];
  std::snprintf(margin, sizeof margin, "%.6e", c.margin);
  std::string line = std::string(c.pass ? "PASS " : "FAIL ") + c.suite + " " + c.name +
                     " margin=" + margin;
  if (!c.detail.empty()) line += " (" + c.detail + ")";
  return line;
}

namespace detail {

inline std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

inline PucciParams to_params(const ParamSet& p) { return make_params(p.lambda_lo, p.lambda_hi, p.dim); }

inline double first_mu(Sign s, const PucciParams& p, const IntegratorConfig& cfg) {
  return half_eigenvalues(s, 1, p, cfg)[0].mu;
}

// First Dirichlet eigenvalue of -Laplacian on the unit ball in dimension N.
inline double laplacian_mu1(int dim, const IntegratorConfig& cfg) {
  return first_mu(Sign::Plus, make_params(1.0, 1.0, dim), cfg);
}

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

inline std::vector<Check> suite_interlacing(const VerifyOptions& opt) {
  std::vector<Check> out;
  constexpr int kPairs = 6;
  for (const ParamSet& ps : opt.params.value_or(standard_grid())) {
    const PucciParams p = detail::to_params(ps);
    const auto plus = half_eigenvalues(Sign::Plus, kPairs + 1, p, opt.cfg);
    const auto minus = half_eigenvalues(Sign::Minus, kPairs + 1, p, opt.cfg);
    const InterlacingReport rep = interlacing_report(plus, minus, p);
    Check c{"interlacing", describe(ps), rep.holds, rep.min_margin(), ""};
    c.detail = "k=1.." + std::to_string(kPairs) + ", first pair margin " +
               detail::fmt("%.6e", rep.first_pair_margin);
    if (rep.offending_k) c.detail += ", offending k=" + std::to_string(*rep.offending_k);
    out.push_back(std::move(c));
  }
  return out;
}

inline std::vector<Check> suite_gap(const VerifyOptions& opt) {
  std::vector<Check> out;
  for (const ParamSet& ps : opt.params.value_or(standard_grid())) {
    const PucciParams p = detail::to_params(ps);
    const auto [r1, r2] = gap_ratio(p, opt.cfg);
    Check c{"gap", describe(ps), false, r1 - r2, ""};
    c.detail = "ratio1=" + detail::fmt("%.10g", r1) + " ratio2=" + detail::fmt("%.10g", r2);
    if (ps.lambda_lo == ps.lambda_hi) {
      c.margin = -std::max(std::abs(r1 - 1.0), std::abs(r2 - 1.0));
      c.pass = c.margin >= -1e-10;
    } else {
      c.pass = c.margin >= -1e-10;
    }
    out.push_back(std::move(c));
  }
  return out;
}

inline std::vector<Check> suite_bounds(const VerifyOptions& opt) {
  std::vector<Check> out;
  for (const ParamSet& ps : opt.params.value_or(standard_grid())) {
    const PucciParams p = detail::to_params(ps);
    const double lap = detail::laplacian_mu1(ps.dim, opt.cfg);
    const double plus = detail::first_mu(Sign::Plus, p, opt.cfg);
    const double minus = detail::first_mu(Sign::Minus, p, opt.cfg);
    // Relative margins of mu+_1 <= lambda mu_1 and Lambda mu_1 <= mu-_1.
    const double upper = (ps.lambda_lo * lap - plus) / (ps.lambda_lo * lap);
    const double lower = (minus - ps.lambda_hi * lap) / (ps.lambda_hi * lap);
    out.push_back({"bounds", describe(ps) + " plus<=lambda*mu1", upper >= -1e-10, upper,
                   "mu+_1=" + detail::fmt("%.10g", plus) +
                       " lambda*mu1=" + detail::fmt("%.10g", ps.lambda_lo * lap)});
    out.push_back({"bounds", describe(ps) + " minus>=Lambda*mu1", lower >= -1e-10, lower,
                   "mu-_1=" + detail::fmt("%.10g", minus) +
                       " Lambda*mu1=" + detail::fmt("%.10g", ps.lambda_hi * lap)});
    const bool strict = ps.lambda_lo < ps.lambda_hi;
    const double first = minus - plus;
    out.push_back({"bounds", describe(ps) + (strict ? " plus<minus" : " plus<=minus"),
                   strict ? first > 0.0 : first >= -1e-10 * plus, first, ""});
  }
  return out;
}

/// lambda sweeps at k = 1 over {L/8, 2L/8, ..., L} and its 2x refinement.
inline std::vector<Check> suite_monotonicity(const VerifyOptions& opt) {
  std::vector<ParamSet> sets = opt.params.value_or(std::vector<ParamSet>{{0.25, 2.0, 3}});
  std::vector<Check> out;
  for (const ParamSet& ps : sets) {
    const double L = ps.lambda_hi;
    auto grid = [&](int per) {
      std::vector<double> g;
      for (int j = per; j <= 8 * per; ++j) g.push_back(L * j / (8.0 * per));
      return g;
    };
    const std::vector<double> coarse = grid(1);
    const std::vector<double> fine = grid(2);
    char tag[64];
    std::snprintf(tag, sizeof tag, "Lambda=%g,N=%d", L, ps.dim);
    for (Sign s : {Sign::Plus, Sign::Minus}) {
      const double dir = s == Sign::Plus ? 1.0 : -1.0;
      auto jumps = [&](const std::vector<double>& g, double& min_step) {
        const auto sw = lambda_sweep(s, 1, g, L, ps.dim, opt.cfg);
        double max_jump = 0.0;
        min_step = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < sw.size(); ++i) {
          const double d = sw[i].mu - sw[i - 1].mu;
          min_step = std::min(min_step, dir * d);
          max_jump = std::max(max_jump, std::abs(d));
        }
        return max_jump;
      };
      double step_c = 0.0;
      double step_f = 0.0;
      const double jc = jumps(coarse, step_c);
      const double jf = jumps(fine, step_f);
      const std::string what = s == Sign::Plus ? "nondecreasing" : "nonincreasing";
      const double step = std::min(step_c, step_f);
      out.push_back({"monotonicity", std::string(tag) + " mu" + (s == Sign::Plus ? "+" : "-") +
                                         "_1 " + what,
                     step >= 0.0, step, "min signed step over both grids"});
      const double ratio = jc / jf;
      out.push_back({"monotonicity",
                     std::string(tag) + " mu" + (s == Sign::Plus ? "+" : "-") + "_1 jump shrink",
                     ratio >= 1.8, ratio - 1.8,
                     "max jump " + detail::fmt("%.6g", jc) + " -> " + detail::fmt("%.6g", jf) +
                         ", factor " + detail::fmt("%.4f", ratio)});
    }
  }
  return out;
}

inline std::vector<Check> suite_maxprinciple(const VerifyOptions& opt) {
  std::vector<ParamSet> sets = opt.params.value_or(std::vector<ParamSet>{{1.0, 2.0, 3}});
  std::vector<Check> out;
  constexpr int kGridN = 1000;
  for (const ParamSet& ps : sets) {
    const PucciParams p = detail::to_params(ps);
    const GridProblem grid = make_grid(p, kGridN);
    const double plus = detail::first_mu(Sign::Plus, p, opt.cfg);
    const double minus = detail::first_mu(Sign::Minus, p, opt.cfg);
    std::mt19937_64 rng(opt.seed);
    auto random_g = [&](double sgn) {
      GridFunction g(grid.size());
      for (double& x : g) x = sgn * detail::uniform01(rng);
      g.back() = 0.0;
      return g;
    };
    struct Tally {
      int solved = 0;
      int violations = 0;
      double worst = std::numeric_limits<double>::infinity();  // min of tol - |wrong-signed part|
    };
    auto run = [&](double mu, double sgn) {
      Tally t;
      for (int j = 0; j < opt.trials; ++j) {
        const GridFunction g = random_g(sgn);
        const double tol = 1e-10 * detail::sup_norm(g);
        try {
          const TrialVerdict v = max_principle_trial(mu, g, grid);
          if (v.solved) {
            ++t.solved;
            const double slack = sgn > 0.0 ? tol - v.extreme : tol + v.extreme;
            t.worst = std::min(t.worst, slack);
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::Violation) throw;
          ++t.violations;
          t.worst = std::min(t.worst, -1.0);
        }
      }
      return t;
    };
    auto report = [&](const std::string& name, const Tally& t, bool need_solved) {
      const bool pass = t.violations == 0 && (!need_solved || t.solved == opt.trials);
      std::string detail = std::to_string(opt.trials - t.violations) + "/" +
                           std::to_string(opt.trials) + " trials without violation, " +
                           std::to_string(t.solved) + " solved";
      if (t.solved == 0) detail += "; no discrete solution exists for any trial";
      out.push_back({"maxprinciple", describe(ps) + " " + name, pass,
                     std::isfinite(t.worst) ? t.worst : 0.0, detail});
    };
    report("g>=0 mu=0.9mu+_1 => u<=0", run(0.9 * plus, 1.0), true);
    report("g<=0 mu=0.9mu-_1 => u>=0", run(0.9 * minus, -1.0), false);
    report("g<=0 mu=0.9mu+_1 => u>=0", run(0.9 * plus, -1.0), true);
  }
  return out;
}

namespace detail {

// Smallest observed order log2(e_j / e_{j+1}) over a doubling sequence.
inline double min_pairwise_order(const std::vector<double>& errors) {
  double order = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < errors.size(); ++j) {
    order = std::min(order, std::log2(errors[j] / errors[j + 1]));
  }
  return order;
}

}  // namespace detail

inline std::vector<Check> suite_crosscheck(const VerifyOptions& opt) {
  std::vector<ParamSet> sets =
      opt.params.value_or(std::vector<ParamSet>{{1.0, 2.0, 2}, {1.0, 2.0, 3}, {1.0, 5.0, 3}});
  std::vector<Check> out;
  for (const ParamSet& ps : sets) {
    const PucciParams p = detail::to_params(ps);
    for (Sign s : {Sign::Plus, Sign::Minus}) {
      const std::string who = describe(ps) + " mu" + (s == Sign::Plus ? "+" : "-") + "_1";
      const double shoot = detail::first_mu(s, p, opt.cfg);
      const double fd = first_half_eigenvalue_fd(s, make_grid(p, opt.n)).mu;
      const double rel = std::abs(fd - shoot) / shoot;
      out.push_back({"crosscheck", who + " n=" + std::to_string(opt.n), rel <= 5e-3, 5e-3 - rel,
                     "fd=" + detail::fmt("%.10g", fd) + " shooting=" + detail::fmt("%.10g", shoot) +
                         " rel=" + detail::fmt("%.3e", rel)});
      std::vector<double> errors;
      for (int n : {250, 500, 1000, 2000}) {
        errors.push_back(std::abs(first_half_eigenvalue_fd(s, make_grid(p, n)).mu - shoot));
      }
      const double order = detail::min_pairwise_order(errors);
      out.push_back({"crosscheck", who + " h-order", order >= 1.5, order - 1.5,
                     "min pairwise order " + detail::fmt("%.3f", order) + " over n=250..2000"});
    }
  }
  return out;
}

inline std::vector<Check> suite_envelope(const VerifyOptions& opt) {
  std::vector<ParamSet> sets = opt.params.value_or(std::vector<ParamSet>{{1.0, 2.0, 2}});
  std::vector<Check> out;
  constexpr int kGridN = 1000;
  constexpr double kTol = 1e-2;
  for (const ParamSet& ps : sets) {
    const PucciParams p = detail::to_params(ps);
    const GridProblem grid = make_grid(p, kGridN);
    const double plus = detail::first_mu(Sign::Plus, p, opt.cfg);
    const double minus = detail::first_mu(Sign::Minus, p, opt.cfg);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int j = 0; j < opt.trials; ++j) {
      const double mu = random_linear_eigenvalue(grid, opt.seed + static_cast<std::uint64_t>(j));
      lo = std::min(lo, mu);
      hi = std::max(hi, mu);
    }
    const double margin = std::min(lo - (plus - kTol), (minus + kTol) - hi);
    out.push_back({"envelope", describe(ps) + " random fields", margin >= 0.0, margin,
                   std::to_string(opt.trials) + " fields in [" + detail::fmt("%.8g", lo) + ", " +
                       detail::fmt("%.8g", hi) + "], envelope [" + detail::fmt("%.8g", plus) +
                       ", " + detail::fmt("%.8g", minus) + "]"});
    const double lap = detail::laplacian_mu1(ps.dim, opt.cfg);
    for (double c : {ps.lambda_lo, ps.lambda_hi}) {
      const double mu = linear_principal_eigenvalue(CoefficientField::constant(grid, c, c), grid);
      const double rel = std::abs(mu - c * lap) / (c * lap);
      out.push_back({"envelope", describe(ps) + " constant field " + detail::fmt("%g", c),
                     rel <= 1e-3, 1e-3 - rel,
                     "fd=" + detail::fmt("%.10g", mu) + " expected=" + detail::fmt("%.10g", c * lap)});
    }
  }
  return out;
}

inline std::vector<Check> run_suite(Suite suite, const VerifyOptions& opt) {
  switch (suite) {
    case Suite::Interlacing: return suite_interlacing(opt);
    case Suite::Gap: return suite_gap(opt);
    case Suite::Monotonicity: return suite_monotonicity(opt);
    case Suite::Bounds: return suite_bounds(opt);
    case Suite::MaxPrinciple: return suite_maxprinciple(opt);
    case Suite::Crosscheck: return suite_crosscheck(opt);
    case Suite::Envelope: return suite_envelope(opt);
    case Suite::All: break;
  }
  std::vector<Check> all;
  for (int i = 0; i < static_cast<int>(Suite::All); ++i) {
    auto part = run_suite(static_cast<Suite>(i), opt);
    all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return all;
}

}  // namespace pucci
