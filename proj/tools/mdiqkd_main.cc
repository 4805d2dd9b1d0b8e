// Command-line driver: distance sweeps, comparison studies, intensity
// optimization tables, and the Monte Carlo self-check.
//
// Exit codes: 0 success, 1 config error, 2 validation failure, 3 I/O error.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mdiqkd/sweep.hpp"

namespace {

using mdiqkd::EventType;
using mdiqkd::FeMode;
using mdiqkd::StudyKind;
using mdiqkd::SweepConfig;

// "a:b:c" -> three tokens; throws CLI::ValidationError on malformed input
std::vector<std::string> split_colons(const std::string& s, std::size_t want,
                                      const char* flag) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(':', pos);
    if (next == std::string::npos) {
      parts.push_back(s.substr(pos));
      break;
    }
    parts.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  if (parts.size() != want)
    throw CLI::ValidationError(flag, "expected " + std::to_string(want) +
                                         " colon-separated values, got: " + s);
  return parts;
}

double parse_double(const std::string& s, const char* flag) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw CLI::ValidationError(flag, "not a number: " + s);
  }
}

FeMode parse_fe(const std::string& s, const char* flag) {
  if (s == "enzer") return FeMode::enzer();
  if (s.rfind("fixed:", 0) == 0) return FeMode::fixed(parse_double(s.substr(6), flag));
  throw CLI::ValidationError(flag, "expected 'enzer' or 'fixed:<value>', got: " + s);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(',', pos);
    if (next == std::string::npos) {
      parts.push_back(s.substr(pos));
      break;
    }
    parts.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return parts;
}

void emit(const SweepConfig& config, const std::string& content) {
  if (config.out_path.empty()) {
    std::fputs(content.c_str(), stdout);
    return;
  }
  mdiqkd::write_text_file(config.out_path, content);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MDI SARG04 key-rate toolkit: sweeps, studies, cutoff search, "
               "intensity optimization, Monte Carlo validation"};

  SweepConfig config;
  double mu = config.params.mu_a;
  std::string fe_arg = "enzer";
  std::string type_arg = "both";
  std::string L_arg = "0:200:1";
  std::string study_arg = "none";
  std::string list_arg;
  std::string mu_opt_arg;

  app.add_option("--eta", config.params.eta, "detector quantum efficiency");
  app.add_option("--dark", config.params.dark, "dark count probability per detector");
  app.add_option("--alpha", config.params.alpha, "fiber loss in dB/km");
  app.add_option("--mu", mu, "mean photon number of both sources");
  app.add_option("--fe", fe_arg, "error correction mode: enzer | fixed:<v>");
  app.add_option("--type", type_arg, "event types to evaluate: 1 | 2 | both");
  app.add_option("--L", L_arg, "distance grid km, min:max:step");
  app.add_option("--study", study_arg, "comparison study: fe | dark | eta | none");
  app.add_option("--list", list_arg,
                 "comma-separated scenario values for the chosen study");
  app.add_option("--mu-opt", mu_opt_arg, "intensity grid lo:hi:steps; enables argmax");
  app.add_option("--nmax", config.params.n_max, "photon number cutoff per source");
  app.add_option("--mc-rounds", config.mc_rounds,
                 "run the Monte Carlo self-check with this many rounds");
  app.add_option("--seed", config.seed, "RNG seed for Monte Carlo runs");
  app.add_option("--out", config.out_path, "output path (default: stdout)");

  try {
    app.parse(argc, argv);

    config.params.mu_a = config.params.mu_b = mu;
    config.params.fe = parse_fe(fe_arg, "--fe");

    if (type_arg == "1") config.types = {EventType::type1};
    else if (type_arg == "2") config.types = {EventType::type2};
    else if (type_arg == "both") config.types = {EventType::type1, EventType::type2};
    else throw CLI::ValidationError("--type", "expected 1, 2 or both, got: " + type_arg);

    {
      const auto parts = split_colons(L_arg, 3, "--L");
      config.L_min = parse_double(parts[0], "--L");
      config.L_max = parse_double(parts[1], "--L");
      config.L_step = parse_double(parts[2], "--L");
    }

    if (study_arg == "none") config.study = StudyKind::none;
    else if (study_arg == "fe") config.study = StudyKind::fe;
    else if (study_arg == "dark") config.study = StudyKind::dark;
    else if (study_arg == "eta") config.study = StudyKind::eta;
    else
      throw CLI::ValidationError("--study",
                                 "expected fe, dark, eta or none, got: " + study_arg);

    if (!list_arg.empty()) {
      if (config.study == StudyKind::none)
        throw CLI::ValidationError("--list", "needs --study fe|dark|eta");
      for (const auto& tok : split_commas(list_arg)) {
        if (config.study == StudyKind::fe) config.fe_modes.push_back(parse_fe(tok, "--list"));
        if (config.study == StudyKind::dark) config.darks.push_back(parse_double(tok, "--list"));
        if (config.study == StudyKind::eta) config.etas.push_back(parse_double(tok, "--list"));
      }
    }

    if (!mu_opt_arg.empty()) {
      const auto parts = split_colons(mu_opt_arg, 3, "--mu-opt");
      config.mu_opt.enabled = true;
      config.mu_opt.lo = parse_double(parts[0], "--mu-opt");
      config.mu_opt.hi = parse_double(parts[1], "--mu-opt");
      config.mu_opt.steps = static_cast<int>(parse_double(parts[2], "--mu-opt"));
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;  // --help exits 0, parse errors exit 1
  }

  try {
    if (config.mc_rounds > 0) {
      const mdiqkd::ValidationReport report =
          mdiqkd::validate_mc(config.mc_rounds, config.seed);
      emit(config, report.text);
      return report.ok ? 0 : 2;
    }
    const std::string content = config.mu_opt.enabled && config.study == StudyKind::none
                                    ? mdiqkd::run_mu_table(config)
                                    : mdiqkd::run_study(config);
    emit(config, content);
    return 0;
  } catch (const mdiqkd::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  }
}
