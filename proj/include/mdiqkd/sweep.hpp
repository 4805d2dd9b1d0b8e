#pragma once

// Distance sweeps, cutoff-distance search, source-intensity optimization,
// the three comparison studies (error-correction mode, dark count,
// detector efficiency), and the Monte Carlo self-check.  Everything here
// is deterministic: fixed iteration order, fixed float formatting, and
// seeded per-round RNG streams, so emitted artifacts are bytewise stable.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mdiqkd/keyrate.hpp"
#include "mdiqkd/optics.hpp"
#include "mdiqkd/params.hpp"
#include "mdiqkd/protocol.hpp"

namespace mdiqkd {

inline constexpr const char* kToolVersion = "mdiqkd 1.0.0";

// Separates clamp-zero rates from floating-point dust in cutoff searches.
inline constexpr double kPositiveRateThreshold = 1e-12;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class StudyKind { none, fe, dark, eta };

inline const char* to_string(StudyKind s) {
  switch (s) {
    case StudyKind::none: return "none";
    case StudyKind::fe: return "fe";
    case StudyKind::dark: return "dark";
    case StudyKind::eta: return "eta";
  }
  throw std::logic_error("to_string: bad StudyKind");
}

struct MuOptConfig {
  bool enabled = false;
  double lo = 0.01;
  double hi = 0.5;
  int steps = 50;
};

struct SweepConfig {
  double L_min = 0.0;
  double L_max = 200.0;
  double L_step = 1.0;
  ExperimentParams params;
  std::vector<EventType> types = {EventType::type1, EventType::type2};
  StudyKind study = StudyKind::none;
  std::vector<double> darks;    // dark-study scenario values
  std::vector<double> etas;     // eta-study scenario values
  std::vector<FeMode> fe_modes; // fe-study scenario values
  MuOptConfig mu_opt;
  std::uint64_t seed = 1;
  long mc_rounds = 0;
  std::string out_path;  // empty: stdout

  void validate() const {
    if (!(L_min >= 0.0)) throw std::domain_error("SweepConfig: L_min must be >= 0");
    if (!(L_step > 0.0)) throw std::domain_error("SweepConfig: L_step must be > 0");
    if (!(L_max >= L_min)) throw std::domain_error("SweepConfig: L_max must be >= L_min");
    params.validate();
    if (types.empty()) throw std::domain_error("SweepConfig: no event types selected");
    if (study == StudyKind::fe && fe_modes.empty())
      throw std::domain_error("SweepConfig: fe study needs a non-empty mode list");
    if (study == StudyKind::dark && darks.empty())
      throw std::domain_error("SweepConfig: dark study needs a non-empty value list");
    if (study == StudyKind::eta && etas.empty())
      throw std::domain_error("SweepConfig: eta study needs a non-empty value list");
    if (mu_opt.enabled) {
      if (!(mu_opt.lo > 0.0) || !(mu_opt.hi >= mu_opt.lo) || mu_opt.steps < 1)
        throw std::domain_error("SweepConfig: bad mu optimization grid");
    }
    if (mc_rounds < 0) throw std::domain_error("SweepConfig: mc_rounds must be >= 0");
  }
};

// Fills the scenario list of the chosen study when the caller left it
// empty: the comparisons the reference parameter set is usually run with.
inline void apply_study_defaults(SweepConfig& config) {
  if (config.study == StudyKind::fe && config.fe_modes.empty())
    config.fe_modes = {FeMode::enzer(), FeMode::fixed(1.33)};
  if (config.study == StudyKind::dark && config.darks.empty())
    config.darks = {8.5e-7, 8.5e-8};
  if (config.study == StudyKind::eta && config.etas.empty())
    config.etas = {0.045, 0.09};
}

// Inclusive km grid; the endpoint is kept when it lands on a step within
// rounding slack.  Indexing (not accumulation) keeps the grid exact.
inline std::vector<double> distance_grid(double L_min, double L_max, double L_step) {
  if (!(L_min >= 0.0) || !(L_step > 0.0) || !(L_max >= L_min))
    throw std::domain_error("distance_grid: need 0 <= L_min <= L_max and L_step > 0");
  const long n = static_cast<long>(std::floor((L_max - L_min) / L_step + 1e-9));
  std::vector<double> grid;
  grid.reserve(n + 1);
  for (long i = 0; i <= n; ++i) grid.push_back(L_min + i * L_step);
  return grid;
}

inline std::vector<KeyRatePoint> sweep_distance(const OpticsModel& model,
                                                const ExperimentParams& params,
                                                EventType type,
                                                const std::vector<double>& grid_km) {
  std::vector<KeyRatePoint> points;
  points.reserve(grid_km.size());
  for (double L : grid_km)
    points.push_back({L, type, key_rate_components(model.table(params, L), type)});
  return points;
}

// ---------- cutoff distance ----------

struct CutoffResult {
  double L_star = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double tolerance = 0.0;
  int evaluations = 0;
};

// Bisection on the largest positive-to-zero crossing of rate(L) over
// [lo, hi].  A coarse scan locates the last positive sample first, so an
// isolated revival inside the range moves the answer outward, never inward.
template <class RateFn>
CutoffResult find_positive_cutoff(RateFn&& rate, double lo, double hi, double tolerance,
                                  double threshold = kPositiveRateThreshold) {
  if (!(tolerance > 0.0)) throw std::domain_error("find_positive_cutoff: tolerance <= 0");
  if (!(hi > lo)) throw std::domain_error("find_positive_cutoff: empty range");
  int evals = 0;
  const auto positive = [&](double L) {
    ++evals;
    return rate(L) > threshold;
  };
  if (!positive(lo))
    throw std::domain_error("find_positive_cutoff: rate not positive at range start");
  if (positive(hi))
    throw std::domain_error("find_positive_cutoff: rate still positive at range end");

  constexpr int kScanIntervals = 256;
  double blo = lo, bhi = hi;
  for (int i = kScanIntervals - 1; i >= 1; --i) {
    const double x = lo + (hi - lo) * i / kScanIntervals;
    if (positive(x)) {
      blo = x;
      bhi = lo + (hi - lo) * (i + 1) / kScanIntervals;
      break;
    }
  }
  while (bhi - blo > tolerance) {
    const double mid = 0.5 * (blo + bhi);
    (positive(mid) ? blo : bhi) = mid;
  }
  return {0.5 * (blo + bhi), blo, bhi, tolerance, evals};
}

// Default search range generously covers the reference parameter set and a
// dark-count decade below it.
inline CutoffResult cutoff_distance(const OpticsModel& model, const ExperimentParams& params,
                                    EventType type, double tolerance_km = 0.1,
                                    double L_lo = 0.0, double L_hi = 500.0) {
  params.validate();
  return find_positive_cutoff(
      [&](double L) { return key_rate(model.table(params, L), type); }, L_lo, L_hi,
      tolerance_km);
}

inline CutoffResult cutoff_distance(const ExperimentParams& params, EventType type,
                                    double tolerance_km = 0.1, double L_lo = 0.0,
                                    double L_hi = 500.0) {
  return cutoff_distance(OpticsModel(params.n_max), params, type, tolerance_km, L_lo, L_hi);
}

// ---------- source-intensity optimization ----------

// Source intensity enters the table only through Poisson weights, so one
// computed table can be reweighted to any other intensity pair for free.
inline YieldTable reweighted_table(const YieldTable& base, double mu_a, double mu_b) {
  if (!(mu_a > 0.0) || !(mu_b > 0.0))
    throw std::domain_error("reweighted_table: intensities must be > 0");
  YieldTable t = base;
  t.params.mu_a = mu_a;
  t.params.mu_b = mu_b;
  for (EventType type : {EventType::type1, EventType::type2})
    for (int m = 0; m <= t.n_max; ++m)
      for (int n = 0; n <= t.n_max; ++n) {
        const double scale = poisson_weight(mu_a, m) * poisson_weight(mu_b, n) /
                             (poisson_weight(base.params.mu_a, m) *
                              poisson_weight(base.params.mu_b, n));
        t.at(type, m, n).Q = base.at(type, m, n).Q * scale;
      }
  t.params_hash = detail::fnv1a_hex(detail::params_line(t.params, t.L_km, t.n_max));
  return t;
}

struct MuOptResult {
  double mu_star = 0.0;
  double K_star = 0.0;
  bool all_zero = false;  // every grid point clamped to zero
};

// Grid argmax of K over symmetric intensities mu_a = mu_b = mu; ties break
// toward smaller mu.
inline MuOptResult optimize_mu(const OpticsModel& model, const ExperimentParams& params,
                               EventType type, double L_km, const MuOptConfig& grid) {
  if (!(grid.lo > 0.0) || !(grid.hi >= grid.lo) || grid.steps < 1)
    throw std::domain_error("optimize_mu: bad grid");
  ExperimentParams base = params;
  base.mu_a = base.mu_b = grid.lo;
  const YieldTable ref = model.table(base, L_km);
  MuOptResult best;
  best.mu_star = grid.lo;
  for (int i = 0; i < grid.steps; ++i) {
    const double mu =
        grid.steps == 1 ? grid.lo
                        : grid.lo + (grid.hi - grid.lo) * i / double(grid.steps - 1);
    const double K = key_rate(i == 0 ? ref : reweighted_table(ref, mu, mu), type);
    if (K > best.K_star) {
      best.K_star = K;
      best.mu_star = mu;
    }
  }
  best.all_zero = best.K_star == 0.0;
  return best;
}

// ---------- study artifacts ----------

namespace detail {

inline std::string config_header(const SweepConfig& c, const char* artifact) {
  std::string h;
  h += std::string("# mdiqkd ") + artifact + " v1\n";
  h += std::string("# tool: ") + kToolVersion + "\n";
  h += std::string("# study: ") + to_string(c.study) + "\n";
  h += "# base: " + params_line(c.params, 0.0, c.params.n_max) + "\n";
  h += "# grid: L_min=" + format_double(c.L_min) + " L_max=" + format_double(c.L_max) +
       " L_step=" + format_double(c.L_step) + "\n";
  h += "# types:";
  for (EventType t : c.types) h += std::string(" ") + to_string(t);
  h += "\n# scenarios:";
  if (c.study == StudyKind::none) h += " base";
  if (c.study == StudyKind::fe)
    for (const FeMode& m : c.fe_modes) h += " fe=" + m.label();
  if (c.study == StudyKind::dark)
    for (double d : c.darks) h += " dark=" + format_double(d);
  if (c.study == StudyKind::eta)
    for (double e : c.etas) h += " eta=" + format_double(e);
  h += "\n";
  h += "# mu_opt: ";
  if (c.mu_opt.enabled)
    h += "grid lo=" + format_double(c.mu_opt.lo) + " hi=" + format_double(c.mu_opt.hi) +
         " steps=" + std::to_string(c.mu_opt.steps);
  else
    h += "off mu=" + format_double(c.params.mu_a);
  h += "\n";
  h += "# seed: " + std::to_string(c.seed) + "\n";
  return h;
}

struct Scenario {
  std::string label;
  ExperimentParams params;
};

inline std::vector<Scenario> study_scenarios(const SweepConfig& c) {
  std::vector<Scenario> out;
  switch (c.study) {
    case StudyKind::none:
      out.push_back({"base", c.params});
      break;
    case StudyKind::fe:
      for (const FeMode& m : c.fe_modes) {
        Scenario s{"fe=" + m.label(), c.params};
        s.params.fe = m;
        out.push_back(std::move(s));
      }
      break;
    case StudyKind::dark:
      for (double d : c.darks) {
        Scenario s{"dark=" + format_double(d), c.params};
        s.params.dark = d;
        out.push_back(std::move(s));
      }
      break;
    case StudyKind::eta:
      for (double e : c.etas) {
        Scenario s{"eta=" + format_double(e), c.params};
        s.params.eta = e;
        out.push_back(std::move(s));
      }
      break;
  }
  return out;
}

}  // namespace detail

// Key rate versus distance for every (scenario, type); rows grouped by
// scenario, then type, then ascending L, so each curve family is one
// contiguous block.  Bytewise deterministic for a fixed config.
inline std::string run_study(const SweepConfig& config_in) {
  SweepConfig config = config_in;
  apply_study_defaults(config);
  config.validate();
  for (const auto& scenario : detail::study_scenarios(config)) scenario.params.validate();

  const auto grid = distance_grid(config.L_min, config.L_max, config.L_step);
  const OpticsModel model(config.params.n_max);
  std::string out = detail::config_header(config, "study");
  out += "# columns: L_km type K_bps scenario\n";
  for (const auto& scenario : detail::study_scenarios(config))
    for (EventType type : config.types)
      for (double L : grid) {
        const double K =
            config.mu_opt.enabled
                ? optimize_mu(model, scenario.params, type, L, config.mu_opt).K_star
                : key_rate(model.table(scenario.params, L), type);
        out += detail::format_double(L) + std::string(" ") + to_string(type) + " " +
               detail::format_double(K) + " " + scenario.label + "\n";
      }
  return out;
}

// Per-distance intensity optimization table (the --mu-opt surface when no
// study is selected): one row per (type, L) with the winning intensity.
inline std::string run_mu_table(const SweepConfig& config_in) {
  SweepConfig config = config_in;
  config.validate();
  if (!config.mu_opt.enabled)
    throw std::domain_error("run_mu_table: mu optimization grid not set");
  const auto grid = distance_grid(config.L_min, config.L_max, config.L_step);
  const OpticsModel model(config.params.n_max);
  std::string out = detail::config_header(config, "mu-table");
  out += "# columns: L_km type mu_star K_bps all_zero\n";
  for (EventType type : config.types)
    for (double L : grid) {
      const MuOptResult r = optimize_mu(model, config.params, type, L, config.mu_opt);
      out += detail::format_double(L) + std::string(" ") + to_string(type) + " " +
             detail::format_double(r.mu_star) + " " + detail::format_double(r.K_star) +
             " " + (r.all_zero ? "1" : "0") + "\n";
    }
  return out;
}

// ---------- Monte Carlo validation ----------

struct ProtocolValidation {
  std::string protocol;
  long rounds = 0;
  long kept = 0;
  double sift_emp = 0.0;
  double sift_ana = 0.0;
  double z_sift = 0.0;
  double qber_emp = 0.0;  // meaningful only when kept > 0
  double qber_ana = 0.0;
  double z_qber = 0.0;
  bool ok = false;
};

struct ValidationReport {
  std::vector<ProtocolValidation> rows;
  bool ok = false;
  std::string text;
};

namespace detail {

// Degenerate binomial (variance zero) scores 0 on exact agreement and
// fails outright on any deviation.
inline double z_score(double emp, double ana, long trials) {
  const double var = ana * (1.0 - ana) / trials;
  if (var <= 0.0) return emp == ana ? 0.0 : 1e18;
  return (emp - ana) / std::sqrt(var);
}

inline ProtocolValidation validate_protocol(const char* name, bool entanglement,
                                            long rounds, std::uint64_t seed,
                                            const NoiseConfig& noise) {
  // separate deterministic stream per protocol
  const std::uint64_t stream = entanglement ? seed ^ 0xa5f152ac02face11ULL : seed;
  long kept = 0, errors = 0;
  for (long i = 0; i < rounds; ++i) {
    Rng rng = round_rng(stream, static_cast<std::uint64_t>(i));
    const RoundRecord rec =
        entanglement ? run_entanglement_round(rng, noise) : run_mdi_round(rng, noise);
    if (!rec.kept) continue;
    ++kept;
    const int a = *rec.bit_alice ^ (rec.flipped ? 1 : 0);
    if (entanglement ? a != *rec.bit_bob
                     : bit_error(*rec.event_type, *rec.bit_alice, *rec.bit_bob))
      ++errors;
  }
  ProtocolValidation v;
  v.protocol = name;
  v.rounds = rounds;
  v.kept = kept;
  v.sift_emp = double(kept) / rounds;
  v.sift_ana =
      entanglement ? entanglement_sift_probability(noise) : mdi_sift_probability(noise);
  v.z_sift = z_score(v.sift_emp, v.sift_ana, rounds);
  v.qber_ana = entanglement ? entanglement_expected_qber(noise) : mdi_expected_qber(noise);
  v.qber_emp = kept > 0 ? double(errors) / kept : 0.0;
  v.z_qber = kept > 0 ? z_score(v.qber_emp, v.qber_ana, kept) : 0.0;
  v.ok = std::abs(v.z_sift) <= 4.0 && std::abs(v.z_qber) <= 4.0;
  return v;
}

}  // namespace detail

// Runs both protocol simulations against their exhaustive-enumeration
// expectations.  |z| > 4 on any statistic marks the report failed.
inline ValidationReport validate_mc(long rounds, std::uint64_t seed,
                                    const NoiseConfig& noise = {}) {
  if (rounds < 10000)
    throw std::invalid_argument("validate_mc: need at least 10^4 rounds");
  noise.validate();
  ValidationReport report;
  report.rows.push_back(detail::validate_protocol("mdi", false, rounds, seed, noise));
  report.rows.push_back(
      detail::validate_protocol("entanglement", true, rounds, seed, noise));
  report.ok = report.rows[0].ok && report.rows[1].ok;

  std::string t;
  t += "# mdiqkd mc-validation v1\n";
  t += std::string("# tool: ") + kToolVersion + "\n";
  t += "# rounds=" + std::to_string(rounds) + " seed=" + std::to_string(seed) +
       " depolarize=" + detail::format_double(noise.depolarize) + "\n";
  t += "# columns: protocol rounds kept sift_emp sift_ana z_sift qber_emp qber_ana z_qber ok\n";
  for (const auto& v : report.rows) {
    t += v.protocol + " " + std::to_string(v.rounds) + " " + std::to_string(v.kept) + " " +
         detail::format_double(v.sift_emp) + " " + detail::format_double(v.sift_ana) + " " +
         detail::format_double(v.z_sift) + " " +
         (v.kept > 0 ? detail::format_double(v.qber_emp) : "-") + " " +
         detail::format_double(v.qber_ana) + " " + detail::format_double(v.z_qber) + " " +
         (v.ok ? "ok" : "FAIL") + "\n";
  }
  t += std::string("# result: ") + (report.ok ? "ok" : "FAIL") + "\n";
  report.text = std::move(t);
  return report;
}

// ---------- output ----------

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace mdiqkd
