// welltest: command-line front end for Bayesian well-test deconvolution.
//
//   welltest synth    --kind channel --seed 7 --out data/
//   welltest run      --config run.json --pressure data/pressure.csv --rates data/rates.csv --p0 5000 --seed 1
//   welltest score    --run-dir out/
//   welltest validate --config run.json [--pressure p.csv --rates r.csv --p0 5000]
//
// Exit codes: 0 success, 2 config or parse error, 3 numeric failure,
// 4 R-hat above 1.1 on some parameter (artifacts are still written).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "welltest/inference.hpp"
#include "welltest/io.hpp"
#include "welltest/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace welltest;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

struct RunOptions {
    std::string config;
    std::string pressure;
    std::string rates;
    std::optional<double> p0;
    std::optional<std::uint64_t> seed;
    std::string truth;
    std::string out;
    std::vector<std::size_t> models;
    std::optional<long> iterations, burn_in, thinning;
    std::optional<int> chains;
    std::string sigma_p;
    std::string prior;
    std::string inversion;
    std::string init;
    std::optional<bool> infer_beta;
    bool quiet = false;
};

RunConfig build_config(const RunOptions& o) {
    RunConfig c = o.config.empty() ? RunConfig{} : parse_config(read_json(o.config));
    if (o.seed) c.seed = *o.seed;
    if (!o.out.empty()) c.output_dir = o.out;
    if (!o.models.empty()) c.models = o.models;
    if (o.iterations) c.sampler.iterations = *o.iterations;
    if (o.burn_in) c.sampler.burn_in = *o.burn_in;
    if (o.thinning) c.sampler.thinning = *o.thinning;
    if (o.chains) c.sampler.chains = *o.chains;
    if (o.infer_beta) c.infer_beta = *o.infer_beta;
    if (!o.prior.empty()) {
        if (o.prior == "standard") {
            c.prior = PriorSpec::standard();
        } else if (o.prior == "vague") {
            c.prior = PriorSpec::vague();
        } else {
            throw ConfigError("--prior must be standard or vague");
        }
        c.prior_preset = o.prior;
    }
    if (!o.sigma_p.empty()) {
        if (o.sigma_p == "sample") {
            c.fixed_sigma_p.reset();
        } else {
            try {
                c.fixed_sigma_p = std::stod(o.sigma_p);
            } catch (const std::exception&) {
                throw ConfigError("--sigma-p must be a number or `sample`");
            }
        }
    }
    if (!o.init.empty()) {
        if (o.init == "prior") {
            c.init.method = InitSettings::Method::Prior;
        } else if (o.init == "optimize") {
            c.init.method = InitSettings::Method::Optimize;
        } else {
            throw ConfigError("--init must be prior or optimize");
        }
    }
    if (!o.inversion.empty()) {
        if (o.inversion == "stehfest") {
            c.inversion = laplace::InversionScheme::stehfest();
        } else if (o.inversion == "talbot") {
            c.inversion = laplace::InversionScheme::talbot();
        } else {
            throw ConfigError("--inversion must be stehfest or talbot");
        }
    }
    c.validate();
    return c;
}

RunInputs load_inputs(const std::string& pressure, const std::string& rates, double p0, const std::string& truth) {
    RunInputs in{io::load_data(pressure, rates, p0), std::nullopt, pressure, rates};
    if (!truth.empty()) {
        const auto t = io::read_pressure_csv(truth);
        if (t.times != in.data.times) throw ConfigError("truth file times do not match the pressure file");
        in.true_pressures = t.pressures;
    }
    return in;
}

int cmd_run(const RunOptions& o) {
    auto config = build_config(o);
    if (!config.seed) throw ConfigError("--seed is required for run");
    const auto inputs = load_inputs(o.pressure, o.rates, *o.p0, o.truth);
    auto report = run_inference(config, inputs, o.quiet ? nullptr : &std::clog);
    std::cout << io::read_text(config.output_dir / "scores.csv");
    if (report.exit_code == 4) std::clog << "warning: split R-hat above 1.1 for at least one parameter\n";
    return report.exit_code;
}

int cmd_synth(const std::string& kind, std::uint64_t seed, const fs::path& out, double sigma_p,
              const std::string& params_file) {
    SyntheticDesign design;
    design.sigma_p = sigma_p;
    SyntheticTruth truth;
    if (kind == "channel") {
        ChannelParams c;
        if (!params_file.empty()) {
            const auto j = read_json(params_file);
            detail::reject_unknown(j, {"amplitude", "diffusivity", "distance_1", "distance_2", "wellbore_radius", "skin", "storage"},
                                   "channel parameters");
            c.amplitude = j.value("amplitude", c.amplitude);
            c.diffusivity = j.value("diffusivity", c.diffusivity);
            c.distance_1 = j.value("distance_1", c.distance_1);
            c.distance_2 = j.value("distance_2", c.distance_2);
            c.wellbore_radius = j.value("wellbore_radius", c.wellbore_radius);
            c.skin = j.value("skin", c.skin);
            c.storage = j.value("storage", c.storage);
        }
        truth = c;
    } else if (kind == "composite") {
        if (params_file.empty()) {
            truth = default_composite_truth();
        } else {
            const auto j = read_json(params_file);
            if (!j.is_array()) throw ConfigError("composite parameters must be a flat array P,T,W,R1,M1,eta1,...");
            truth = ReservoirParams::from_vector(j.get<std::vector<double>>());
        }
    } else {
        throw ConfigError("--kind must be channel or composite");
    }
    const auto ds = generate_synthetic(truth, design, seed);
    io::write_pressure_csv(out / "pressure.csv", ds.data.times, ds.data.pressures);
    io::write_rate_csv(out / "rates.csv", ds.data.schedule);
    io::write_pressure_csv(out / "truth_pressure.csv", ds.data.times, ds.true_pressures);
    json t = {{"kind", kind}, {"seed", seed}, {"sigma_p", sigma_p}, {"initial_pressure", design.initial_pressure}};
    if (const auto* c = std::get_if<ChannelParams>(&truth)) {
        t["truth"] = {{"amplitude", c->amplitude},
                      {"diffusivity", c->diffusivity},
                      {"distance_1", c->distance_1},
                      {"distance_2", c->distance_2},
                      {"wellbore_radius", c->wellbore_radius},
                      {"skin", c->skin},
                      {"storage", c->storage}};
    } else {
        t["truth"] = std::get<ReservoirParams>(truth).to_vector();
    }
    io::write_text(out / "truth.json", t.dump(2) + "\n");
    std::cout << "wrote " << ds.data.observations() << " pressures and " << ds.data.intervals() << " rate intervals to "
              << out.string() << "\n";
    return 0;
}

int cmd_score(const fs::path& dir) {
    const auto manifest = read_json(dir / "manifest.json");
    auto config = parse_config(manifest.at("config"));
    config.seed = manifest.at("seed").get<std::uint64_t>();
    const auto& d = manifest.at("data");
    const auto inputs = load_inputs(d.at("pressure_file"), d.at("rate_file"), d.at("initial_pressure"), "");
    std::vector<ModelResult> results;
    for (const auto& m : manifest.at("models")) {
        ModelResult r;
        r.transitions = m.at("transitions").get<std::size_t>();
        r.names = m.at("parameters").get<std::vector<std::string>>();
        const DeconvolutionTarget target(inputs.data, config.target_settings(r.transitions));
        r.run.draws = load_draws(dir / ("model_n" + std::to_string(r.transitions)) / "draws.csv", r.names);
        score_model(config, target, r);
        for (const auto& w : r.warnings) std::clog << "[n=" << r.transitions << "] warning: " << w << '\n';
        results.push_back(std::move(r));
    }
    std::cout << scores_csv(results);
    return 0;
}

int cmd_validate(const std::string& config_file, const std::string& pressure, const std::string& rates,
                 std::optional<double> p0) {
    const auto c = config_file.empty() ? RunConfig{} : parse_config(read_json(config_file));
    c.validate();
    std::cout << "config ok: " << c.models.size() << " model(s), " << c.sampler.chains << " chains x "
              << c.sampler.iterations << " iterations, " << c.sampler.retained_per_chain() * c.sampler.chains
              << " retained draws per model\n";
    if (!pressure.empty() || !rates.empty()) {
        if (pressure.empty() || rates.empty() || !p0) throw ConfigError("data validation needs --pressure, --rates and --p0");
        const auto data = io::load_data(pressure, rates, *p0);
        std::cout << "data ok: " << data.observations() << " pressures, " << data.intervals() << " rate intervals\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian well-test deconvolution with a radial composite reservoir model"};
    app.require_subcommand(1);

    RunOptions ro;
    auto* run = app.add_subcommand("run", "fit models and write artifacts");
    run->add_option("--config", ro.config, "JSON run configuration")->check(CLI::ExistingFile);
    run->add_option("--pressure", ro.pressure, "pressure CSV (time,pressure)")->required()->check(CLI::ExistingFile);
    run->add_option("--rates", ro.rates, "rate CSV (start,end,rate)")->required()->check(CLI::ExistingFile);
    run->add_option("--p0", ro.p0, "observed initial pressure")->required();
    run->add_option("--seed", ro.seed, "random seed")->required();
    run->add_option("--truth", ro.truth, "noiseless pressures (time,pressure) for truth residuals")
        ->check(CLI::ExistingFile);
    run->add_option("--out", ro.out, "output directory");
    run->add_option("--models", ro.models, "transition counts to fit")->delimiter(',');
    run->add_option("--iterations", ro.iterations);
    run->add_option("--burn-in", ro.burn_in);
    run->add_option("--thinning", ro.thinning);
    run->add_option("--chains", ro.chains);
    run->add_option("--sigma-p", ro.sigma_p, "fixed pressure noise sd, or `sample`");
    run->add_option("--prior", ro.prior, "prior preset: standard or vague");
    run->add_option("--inversion", ro.inversion, "stehfest or talbot");
    run->add_option("--init", ro.init, "chain starts: prior draws or optimize (Nelder-Mead polish)");
    run->add_option("--infer-beta", ro.infer_beta, "sample true rates and initial pressure (true/false)");
    run->add_flag("--quiet", ro.quiet, "suppress progress output");

    std::string kind = "channel", synth_out = ".", params_file;
    std::uint64_t synth_seed = 0;
    double synth_sigma = 5.0;
    auto* synth = app.add_subcommand("synth", "generate a synthetic well test");
    synth->add_option("--kind", kind, "channel or composite")->check(CLI::IsMember({"channel", "composite"}));
    synth->add_option("--seed", synth_seed, "noise seed")->required();
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--sigma-p", synth_sigma, "pressure noise sd");
    synth->add_option("--params", params_file, "JSON truth parameters")->check(CLI::ExistingFile);

    std::string run_dir;
    auto* score = app.add_subcommand("score", "recompute model scores from a finished run");
    score->add_option("--run-dir", run_dir, "directory written by `run`")->required()->check(CLI::ExistingDirectory);

    std::string vconfig, vpressure, vrates;
    std::optional<double> vp0;
    auto* validate = app.add_subcommand("validate", "check a configuration and optional data files");
    validate->add_option("--config", vconfig)->check(CLI::ExistingFile);
    validate->add_option("--pressure", vpressure)->check(CLI::ExistingFile);
    validate->add_option("--rates", vrates)->check(CLI::ExistingFile);
    validate->add_option("--p0", vp0);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) return cmd_run(ro);
        if (*synth) return cmd_synth(kind, synth_seed, synth_out, synth_sigma, params_file);
        if (*score) return cmd_score(run_dir);
        if (*validate) return cmd_validate(vconfig, vpressure, vrates, vp0);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
