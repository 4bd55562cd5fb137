// biwave: forward / measure / invert / ergodic / selftest.
//
// Exit codes: 0 success, 2 configuration error, 3 missing input, 4 numerical failure.

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "biwave/config.hpp"
#include "biwave/error.hpp"
#include "biwave/pipeline.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_input = 3;
constexpr int exit_numeric = 4;

struct Overrides {
    std::string config;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::string frequencies;
    std::optional<std::size_t> paths;
    std::optional<double> gamma;
    std::optional<std::size_t> sweeps;
};

// "a:b" is the inclusive integer range a, a+1, ..., b; a single number is one frequency.
std::vector<double> parse_range(const std::string& s) {
    const auto colon = s.find(':');
    try {
        if (colon == std::string::npos) return {std::stod(s)};
        const long a = std::stol(s.substr(0, colon));
        const long b = std::stol(s.substr(colon + 1));
        if (b < a) throw biwave::ConfigError("--frequencies: empty range " + s);
        std::vector<double> out;
        for (long k = a; k <= b; ++k) out.push_back(static_cast<double>(k));
        return out;
    } catch (const std::logic_error&) {
        throw biwave::ConfigError("--frequencies: expected a:b or a number, got '" + s + "'");
    }
}

biwave::ExperimentConfig resolve(const Overrides& o) {
    biwave::ExperimentConfig c;
    if (!o.config.empty()) {
        c = biwave::load_config(o.config);
    } else {
        c = biwave::preset_config(o.preset.empty() ? "example1" : o.preset);
    }
    if (o.seed) c.seed = *o.seed;
    if (!o.frequencies.empty()) c.frequencies = parse_range(o.frequencies);
    if (o.paths) c.paths = *o.paths;
    if (o.gamma) c.inversion.gamma = *o.gamma;
    if (o.sweeps) c.inversion.sweeps = *o.sweeps;
    biwave::validate(c, biwave::config_detail::Reader("command line", nullptr));
    return c;
}

void add_common(CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.config, "JSON experiment configuration");
    sub->add_option("--preset", o.preset, "example1 | example2 | ergodic2d | ergodic3d (when no --config)");
    sub->add_option("--seed", o.seed, "master seed (overrides config)");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--frequencies", o.frequencies, "inclusive integer range a:b, e.g. 1:5");
    sub->add_option("--paths", o.paths, "Monte Carlo sample paths P");
    sub->add_option("--gamma", o.gamma, "regularization parameter");
    sub->add_option("--sweeps", o.sweeps, "Kaczmarz sweeps L per frequency");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic biharmonic wave simulation and source-strength reconstruction"};
    app.set_version_flag("--version", std::string(biwave::version));
    app.require_subcommand(1);

    Overrides o;
    std::string measurements;
    double perturb_a0 = 0.0;

    auto* forward = app.add_subcommand("forward", "Monte Carlo wave samples u(x; omega, k)");
    auto* measure = app.add_subcommand("measure", "Monte Carlo measurement tables M(x, k)");
    auto* invert = app.add_subcommand("invert", "Kaczmarz reconstruction of the strength");
    auto* ergodic = app.add_subcommand("ergodic", "single-realization frequency-band averages");
    auto* selftest = app.add_subcommand("selftest", "fast invariant suite");
    for (auto* s : {forward, measure, invert, ergodic}) add_common(s, o);
    invert->add_option("--measurements", measurements, "measurement CSV (default: synthesize inline)");
    selftest->add_option("--perturb-a0", perturb_a0, "debug: relative perturbation of a_0");

    CLI11_PARSE(app, argc, argv);

    try {
        if (selftest->parsed()) {
            const auto checks = biwave::run_selftest({perturb_a0});
            bool ok = true;
            for (const auto& c : checks) {
                std::cout << (c.pass() ? "PASS " : "FAIL ") << c.name << ": measured " << std::setprecision(3)
                          << c.measured << ", tolerance " << c.tolerance << '\n';
                ok = ok && c.pass();
            }
            std::cout << (ok ? "selftest passed\n" : "selftest FAILED\n");
            return ok ? 0 : 1;
        }
        const auto cfg = resolve(o);
        if (forward->parsed()) biwave::run_forward(cfg, o.out);
        if (measure->parsed()) biwave::run_measure(cfg, o.out);
        if (invert->parsed()) biwave::run_invert(cfg, o.out, measurements);
        if (ergodic->parsed()) biwave::run_ergodic(cfg, o.out);
        return 0;
    } catch (const biwave::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const biwave::AssemblyError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const biwave::LinearSolveError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return exit_numeric;
    } catch (const biwave::DomainError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return exit_numeric;
    } catch (const std::invalid_argument& e) {  // ConfigError, PreconditionError
        std::cerr << "configuration error: " << e.what() << '\n';
        return exit_config;
    }
}
