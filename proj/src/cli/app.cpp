#include <exception>

#include "CLI11.hpp"
#include "sdecmp/cli/cli.hpp"
#include "sdecmp/cli/output.hpp"
#include "sdecmp/core/errors.hpp"

namespace sdecmp {

namespace {

constexpr const char* kCatalog = R"(
Drift catalog (drift.kind):
  constant      value: [c_1, ..., c_n]
  linear        matrix: [[...], ...], offset: [...]            b(x) = A x + offset
  tanh          dim, amplitude, frequency                      b_i = a tanh(w x_i)
  sine          dim, amplitude, frequency                      b_i = a sin(w x_i)
  shifted_sine  dim, amplitude, frequency, shift (default 2)   b_i = s + a sin(w x_i)
  polynomial    coefficients: [[c_0, c_1, ...], ...]            b_i = sum_k c_k x_i^k
  grid          axes: [[...], ...], values: [...]              multilinear, clamped outside
Test functions (test_functions[].kind):
  constant, piecewise_constant (breakpoints, values), fourier (period, mean, cos, sin)
Exit codes: 0 pass, 1 usage, 2 Novikov fail, 3 hypothesis fail, 4 property fail)";

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Girsanov-duality SDE experiments: Novikov checks, convex-envelope comparison, moment scaling"};
  app.footer(kCatalog);
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  RunOptions options;
  std::size_t workers = 0;
  app.add_option("--workers", workers, "Worker threads (0: all available)");

  std::string config;
  std::uint64_t seed = 0;
  std::string output;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("config", config, "YAML experiment config")->check(CLI::ExistingFile);
    if (config_required) opt->required();
    sub->add_option("--seed", seed, "Override sampling.seed");
    sub->add_option("--output", output, "Override the output directory");
  };

  auto* novikov = app.add_subcommand("novikov", "Estimate the Novikov-type integrability condition");
  auto* simulate = app.add_subcommand("simulate", "Euler paths, explosion ladder and Girsanov weights");
  auto* envelope = app.add_subcommand("envelope", "Convex envelope of the drift and quasi-monotonicity");
  auto* compare = app.add_subcommand("compare", "Full comparison pipeline against the envelope drift");
  auto* linear = app.add_subcommand("linear-bound", "Fundamental matrix and the explicit linear lower bound");
  auto* scaling = app.add_subcommand("scaling", "Moment scaling E|Z_t - Z_s|^3 against |t - s|");
  auto* selftest = app.add_subcommand("selftest", "Identity battery at reduced scale");
  for (auto* sub : {novikov, simulate, envelope, compare, linear, scaling}) add_common(sub, true);
  add_common(selftest, false);
  compare->add_flag("--allow-warn", options.allow_warn, "Proceed when the Novikov verdict is warn");
  selftest->add_option("--inject-fault", options.inject_fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitPass : kExitUsage;
  }
  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed")) options.seed = seed;
    if (sub->count("--output")) options.output = output;
  }
  if (app.count("--workers")) options.workers = workers;

  try {
    if (novikov->parsed()) return cmd_novikov(config, options, out);
    if (simulate->parsed()) return cmd_simulate(config, options, out);
    if (envelope->parsed()) return cmd_envelope(config, options, out);
    if (compare->parsed()) return cmd_compare(config, options, out);
    if (linear->parsed()) return cmd_linear_bound(config, options, out);
    if (scaling->parsed()) return cmd_scaling(config, options, out);
    if (selftest->parsed()) {
      return cmd_selftest(config.empty() ? std::nullopt : std::optional<std::filesystem::path>(config), options, out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnsupportedError& e) {
    err << "unsupported: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DegenerateError& e) {
    err << "degenerate estimate: " << e.what() << "\n";
    return kExitProperty;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace sdecmp
