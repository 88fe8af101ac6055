#include "chorate/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "chorate/casestudy.hpp"
#include "chorate/choquet.hpp"
#include "chorate/consistency.hpp"
#include "chorate/errors.hpp"
#include "chorate/io.hpp"
#include "chorate/pooling.hpp"
#include "chorate/rating.hpp"

namespace chorate::cli {

namespace {

using nlohmann::json;

const std::vector<std::string>& subcommand_names()
{
    static const std::vector<std::string> names{"measure", "rate",  "check-h", "check-g",
                                                "pool",    "clo",   "cat",     "verify"};
    return names;
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(' ');
        const auto last = item.find_last_not_of(' ');
        if (first != std::string::npos) {
            out.push_back(item.substr(first, last - first + 1));
        }
    }
    return out;
}

std::vector<double> parse_numbers(const std::string& s, const char* what)
{
    std::vector<double> out;
    for (const auto& item : split_list(s)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw ValidationError(fmt::format("{}: cannot parse number '{}'", what, item));
        }
    }
    return out;
}

// Turns the entries of a JSON config document into flag tokens; explicit flags
// placed after them on the command line take precedence.
std::vector<std::string> config_tokens(const std::string& subcommand, const std::string& path)
{
    const json j = read_json_file(path);
    const std::string schema = fmt::format("chorate.config.{}/1", subcommand);
    check_schema(j, schema.c_str());
    std::vector<std::string> tokens;
    for (const auto& [key, value] : j.items()) {
        if (key == "schema") {
            continue;
        }
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        if (value.is_boolean()) {
            if (value.get<bool>()) {
                tokens.push_back(flag);
            }
        } else if (value.is_number_integer()) {
            tokens.push_back(flag);
            tokens.push_back(std::to_string(value.get<long long>()));
        } else if (value.is_number()) {
            tokens.push_back(flag);
            tokens.push_back(format_number(value.get<double>()));
        } else if (value.is_string()) {
            tokens.push_back(flag);
            tokens.push_back(value.get<std::string>());
        } else if (value.is_array()) {
            std::vector<std::string> parts;
            for (const auto& v : value) {
                parts.push_back(v.is_string() ? v.get<std::string>() : format_number(v.get<double>()));
            }
            tokens.push_back(flag);
            tokens.push_back(fmt::format("{}", fmt::join(parts, ",")));
        } else {
            throw ValidationError(fmt::format("config '{}': unsupported value for '{}'", path, key));
        }
    }
    return tokens;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args)
{
    std::optional<std::string> config;
    std::vector<std::string> rest;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) {
                throw ValidationError("--config requires a file path");
            }
            config = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    std::vector<std::string> out{args.front()};
    if (config) {
        const auto tokens = config_tokens(args.front(), *config);
        out.insert(out.end(), tokens.begin(), tokens.end());
    }
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

// Writes to --out when given, else to the standard stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback)
    {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
            if (!*file_) {
                throw OutputError(fmt::format("cannot write '{}'", path));
            }
        }
    }
    std::ostream& stream() { return file_ ? *file_ : fallback_; }
    void finish()
    {
        if (file_) {
            file_->close();
            if (!*file_) {
                throw OutputError("failed to finish writing output");
            }
        }
    }

private:
    std::ostream& fallback_;
    std::unique_ptr<std::ofstream> file_;
};

void print_report(std::ostream& out, const CheckReport& r, const std::string& indent = {})
{
    out << indent << "condition: " << r.condition << '\n';
    out << indent << "result: " << (r.passed() ? "pass" : "fail") << '\n';
    out << indent << "violations: " << r.violations << '\n';
    for (const auto& w : r.witnesses) {
        std::vector<std::string> coords;
        for (double v : w.point) {
            coords.push_back(format_number(v));
        }
        out << indent << "witness: " << fmt::format("{}", fmt::join(coords, " ")) << " slack=" << format_number(w.slack)
            << '\n';
    }
    for (const auto& n : r.notes) {
        out << indent << "note: " << n << '\n';
    }
    for (const auto& a : r.auxiliary) {
        out << indent << "auxiliary:\n";
        print_report(out, a, indent + "  ");
    }
}

DistortionFunction parse_family(const std::string& family, double p, double gamma, const std::string& knots)
{
    if (family == "identity") {
        return DistortionFunction::identity();
    }
    if (family == "es") {
        return DistortionFunction::es_wedge(p);
    }
    if (family == "maxvar") {
        return DistortionFunction::maxvar_power(gamma);
    }
    if (family == "var-indicator") {
        return DistortionFunction::var_indicator(p);
    }
    if (family == "essinf") {
        return DistortionFunction::essinf_indicator();
    }
    if (family == "essup") {
        return DistortionFunction::essup_indicator();
    }
    if (family == "tabulated") {
        std::vector<Knot> ks;
        for (const auto& item : split_list(knots)) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) {
                throw ValidationError(fmt::format("knot '{}' must be written x:y", item));
            }
            const auto xy = parse_numbers(item.substr(0, colon) + "," + item.substr(colon + 1), "knot");
            if (xy.size() != 2) {
                throw ValidationError(fmt::format("knot '{}' must be written x:y", item));
            }
            ks.push_back({xy[0], xy[1]});
        }
        return DistortionFunction::tabulated(std::move(ks));
    }
    throw ValidationError(fmt::format("unknown distortion family '{}'", family));
}

std::optional<IndicatorG> parse_indicator(const std::string& name)
{
    for (auto kind : {IndicatorG::max_positive, IndicatorG::min_positive, IndicatorG::max_full, IndicatorG::min_full}) {
        if (indicator_g_name(kind) == name) {
            return kind;
        }
    }
    return std::nullopt;
}

struct SimFlags {
    std::size_t paths = 100'000;
    std::uint64_t seed = 42;
    int batches = 20;
    int z_nodes = 64;

    void attach(CLI::App* app, bool with_nodes)
    {
        app->add_option("--paths", paths, "Monte Carlo paths per scenario")->capture_default_str();
        app->add_option("--seed", seed, "master random seed")->capture_default_str();
        app->add_option("--batches", batches, "blocks for batch-means standard errors")->capture_default_str();
        if (with_nodes) {
            app->add_option("--z-nodes", z_nodes, "midpoint nodes for continuous mixing laws in exact mode")
                ->capture_default_str();
        }
    }
    SimConfig config() const
    {
        SimConfig cfg;
        cfg.paths = paths;
        cfg.seed = seed;
        cfg.batches = batches;
        cfg.z_nodes = z_nodes;
        return cfg;
    }
};

int run_verify(std::ostream& out, int grid_n, int trials, std::uint64_t seed)
{
    bool all_ok = true;
    const auto expect = [&](bool observed, bool expected) {
        if (observed != expected) {
            all_ok = false;
        }
        return observed == expected ? "as expected" : "UNEXPECTED";
    };
    const GridSpec grid{grid_n, false};
    const std::vector<double> weights{0.5, 0.5};

    out << "scenario-based criteria, weights (0.5, 0.5):\n";
    const std::vector<std::pair<Measure, bool>> measures{
        {Measure::avg_el(), true},          {Measure::avg_es(0.9), true}, {Measure::avg_maxvar(0.3), true},
        {Measure::avg_var(0.8), false},     {Measure::max_var(0.8), false}};
    for (const auto& [m, expected] : measures) {
        const auto g = m.s_distortion(weights);
        const bool sub = check_cc_submodular(*g, grid).passed();
        const bool pool = check_specon(*g, grid).passed();
        out << fmt::format("  {}: cc-submodular {} ({}), pooling condition {} ({})\n", m.name(),
                           sub ? "pass" : "fail", expect(sub, expected), pool ? "pass" : "fail",
                           expect(pool, expected));
    }
    {
        // Average PD is not a Choquet functional; test pooling directly on an iid Bernoulli pool.
        const PoolModel model{ConditionalLaw::bernoulli(),
                              {MixingLaw::discrete({{0.05, 1.0}}), MixingLaw::discrete({{0.25, 1.0}})},
                              weights};
        const auto curve = pe_curve(RiskFunctional(Measure::avg_pd()), model, 4, 0.0, SimConfig{}, PoolMode::exact);
        std::vector<double> values;
        for (const auto& p : curve) {
            values.push_back(p.value);
        }
        const bool pe = is_monotone_decreasing(values, 1e-12);
        out << fmt::format("  avg_pd: not Choquet; pooled values {}; pooling {} ({})\n",
                           fmt::join(values, " "), pe ? "pass" : "fail", expect(pe, false));
    }

    out << "two-scenario indicator criteria:\n";
    const CoupledSampler sampler{};
    for (auto [kind, qc_expected, specon_expected] :
         {std::tuple{IndicatorG::max_positive, true, true}, std::tuple{IndicatorG::min_positive, false, true},
          std::tuple{IndicatorG::max_full, false, false}, std::tuple{IndicatorG::min_full, false, false}}) {
        const auto g = indicator_g(kind);
        const bool qc = !find_qc_violation(RiskFunctional(g), sampler, trials, seed).has_value();
        const bool specon = check_specon(g, grid).passed();
        // Rows 3-4 are only required to be quasi-convex-violating; their pooling check is informational.
        const char* specon_note = specon_expected ? expect(specon, true) : "informational";
        out << fmt::format("  {}: quasi-convexity {} ({}), pooling condition {} ({})\n", indicator_g_name(kind),
                           qc ? "pass" : "fail", expect(qc, qc_expected), specon ? "pass" : "fail", specon_note);
    }
    out << (all_ok ? "verify: all fixtures reproduced\n" : "verify: MISMATCH\n");
    return all_ok ? kExitOk : kExitFailure;
}

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Choquet rating criteria: risk measures, consistency checks, pooling studies", "chorate"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "show help for every subcommand");

    std::string out_path;
    std::string config_help = "JSON file of option values (keys are long option names); flags override it";
    std::string config_path;
    const auto add_common = [&](CLI::App* sub, bool with_out) {
        sub->add_option("--config", config_path, config_help);
        if (with_out) {
            sub->add_option("--out", out_path, "output file (default: standard output)");
        }
    };

    // measure
    std::string input_path, criterion_kind, ladder_name;
    double param = 0.0;
    auto* measure = app.add_subcommand("measure", "evaluate a scenario-based criterion on a loss file");
    measure->add_option("--input", input_path, "scenario loss JSON")->required();
    measure->add_option("--criterion", criterion_kind, "avg_el, avg_es, avg_maxvar, avg_var, max_var or avg_pd")
        ->required();
    measure->add_option("--param", param, "p for es/var criteria, gamma for maxvar");
    measure->add_option("--ladder", ladder_name, "also rate under this ladder (built-in name or JSON file)");
    add_common(measure, true);

    // rate
    double value = 0.0;
    auto* rate_cmd = app.add_subcommand("rate", "map a risk value to its rating label");
    rate_cmd->add_option("--ladder", ladder_name, "built-in ladder name or JSON file")->required();
    rate_cmd->add_option("--value", value, "risk value in [0, 1]")->required();
    add_common(rate_cmd, false);

    // check-h
    std::string family, knots;
    double p = 0.9;
    double gamma = 0.3;
    int grid_n = 101;
    auto* check_h = app.add_subcommand("check-h", "grid check of a distortion function for concavity");
    check_h->add_option("--family", family, "identity, es, maxvar, var-indicator, essinf, essup or tabulated")
        ->required();
    check_h->add_option("--p", p, "level for es / var-indicator")->capture_default_str();
    check_h->add_option("--gamma", gamma, "exponent for maxvar")->capture_default_str();
    check_h->add_option("--knots", knots, "tabulated knots as x:y,x:y,...");
    check_h->add_option("--grid", grid_n, "grid points per axis")->capture_default_str();
    add_common(check_h, false);

    // check-g
    std::string indicator, weights_text = "0.5,0.5";
    int grid_g = 41;
    auto* check_g = app.add_subcommand(
        "check-g", "grid checks of an S-distortion function: componentwise concavity and submodularity, pooling condition");
    check_g->add_option("--criterion", criterion_kind, "criterion whose S-distortion function is checked");
    check_g->add_option("--param", param, "p for es/var criteria, gamma for maxvar");
    check_g->add_option("--weights", weights_text, "comma-separated scenario weights")->capture_default_str();
    check_g->add_option("--indicator", indicator, "max-positive, min-positive, max-full or min-full");
    check_g->add_option("--grid", grid_g, "grid points per axis")->capture_default_str();
    add_common(check_g, false);

    // pool
    std::string model_path, mode_text = "exact";
    int ell_max = 10;
    double attachment = 0.0;
    SimFlags pool_flags;
    auto* pool = app.add_subcommand("pool", "senior-tranche criterion values as the pool grows");
    pool->add_option("--model", model_path, "pool model JSON")->required();
    pool->add_option("--criterion", criterion_kind, "criterion kind")->required();
    pool->add_option("--param", param, "p for es/var criteria, gamma for maxvar");
    pool->add_option("--ell-max", ell_max, "largest pool size")->capture_default_str();
    pool->add_option("--attachment", attachment, "tranche attachment K in [0, 1)")->capture_default_str();
    pool->add_option("--mode", mode_text, "exact or mc")->capture_default_str();
    pool->add_option("--ladder", ladder_name, "rate values under this ladder");
    pool_flags.attach(pool, true);
    add_common(pool, true);

    // clo
    int clo_ell_max = 50;
    SimFlags clo_flags;
    auto* clo = app.add_subcommand("clo", "CLO senior-tranche study: six criteria and ratings by pool size");
    clo->add_option("--ell-max", clo_ell_max, "largest pool size")->capture_default_str();
    clo_flags.attach(clo, false);
    add_common(clo, true);

    // cat
    std::string data_path, states_text, specs_out;
    CatStudyOptions cat_opts;
    SimFlags cat_flags;
    auto* cat = app.add_subcommand("cat", "CAT-bond study: calibrate layers per state and pool states");
    cat->add_option("--data", data_path, "loss CSV with header state,year,loss (default: built-in fits)");
    cat->add_option("--states", states_text, "comma-separated state order (default: all, in data order)");
    cat->add_option("--pd-target", cat_opts.pd_target, "attachment exceedance probability")->capture_default_str();
    cat->add_option("--el-target", cat_opts.el_target, "target expected layer loss")->capture_default_str();
    cat->add_option("--es-p", cat_opts.es_p, "expected shortfall level")->capture_default_str();
    cat->add_option("--maxvar-gamma", cat_opts.maxvar_gamma, "power distortion exponent")->capture_default_str();
    cat->add_option("--specs-out", specs_out, "also write state,mu,sigma,attach,detach to this file");
    cat_flags.attach(cat, false);
    add_common(cat, true);

    // verify
    int trials = 10'000;
    std::uint64_t verify_seed = 42;
    int verify_grid = 41;
    auto* verify = app.add_subcommand("verify", "reproduce the classification fixtures of the built-in criteria");
    verify->add_option("--trials", trials, "random coupled pairs for the quasi-convexity search")->capture_default_str();
    verify->add_option("--seed", verify_seed, "seed for the quasi-convexity search")->capture_default_str();
    verify->add_option("--grid", verify_grid, "grid points per axis")->capture_default_str();
    add_common(verify, false);

    std::vector<std::string> args =
        raw_args.empty() || raw_args.front().rfind('-', 0) == 0 ? raw_args : expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::RequiredError& e) {
        if (app.get_subcommands().empty()) {
            out << app.help();
            return kExitUsage;
        }
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    if (measure->parsed()) {
        const Measure m = Measure::parse(criterion_kind, param);
        m.validate();
        const ScenarioLoss sl = scenario_loss_from_json(read_json_file(input_path));
        const double v = measure_value(m, sl);
        Sink sink(out_path, out);
        sink.stream() << "criterion,value,rating\n"
                      << fmt::format("{},{},{}\n", m.name(), format_number(v),
                                     ladder_name.empty() ? std::string{} : resolve_ladder(ladder_name).rate(v));
        sink.finish();
        return kExitOk;
    }
    if (rate_cmd->parsed()) {
        out << resolve_ladder(ladder_name).rate(value) << '\n';
        return kExitOk;
    }
    if (check_h->parsed()) {
        const DistortionFunction h = parse_family(family, p, gamma, knots);
        out << "h: " << h.name() << '\n';
        print_report(out, check_concave(h, GridSpec{grid_n, false}));
        return kExitOk;
    }
    if (check_g->parsed()) {
        if (indicator.empty() == criterion_kind.empty()) {
            throw ValidationError("check-g: give exactly one of --criterion or --indicator");
        }
        std::optional<SDistortionFunction> g;
        if (!indicator.empty()) {
            const auto kind = parse_indicator(indicator);
            if (!kind) {
                throw ValidationError(fmt::format("unknown indicator '{}'", indicator));
            }
            g = indicator_g(*kind);
        } else {
            const Measure m = Measure::parse(criterion_kind, param);
            g = m.s_distortion(parse_numbers(weights_text, "--weights"));
            if (!g) {
                throw ValidationError(fmt::format("{} has no S-distortion function (not a Choquet criterion)", m.name()));
            }
        }
        const GridSpec grid{grid_g, false};
        out << "g: " << g->name() << '\n';
        print_report(out, check_cc_submodular(*g, grid));
        print_report(out, check_specon(*g, grid));
        return kExitOk;
    }
    if (pool->parsed()) {
        if (mode_text != "exact" && mode_text != "mc") {
            throw ValidationError(fmt::format("--mode must be exact or mc, got '{}'", mode_text));
        }
        const PoolModel model = pool_model_from_json(read_json_file(model_path));
        const Measure m = Measure::parse(criterion_kind, param);
        m.validate();
        std::optional<RatingLadder> ladder;
        if (!ladder_name.empty()) {
            ladder = resolve_ladder(ladder_name);
        }
        const auto curve = pe_curve(RiskFunctional(m), model, ell_max, attachment, pool_flags.config(),
                                    mode_text == "exact" ? PoolMode::exact : PoolMode::mc,
                                    ladder ? &*ladder : nullptr);
        std::vector<StudyRow> rows;
        for (const auto& pt : curve) {
            rows.push_back({pt.ell, m.name(), pt.value, pt.std_error, pt.label});
        }
        Sink sink(out_path, out);
        write_rows_csv(sink.stream(), rows);
        sink.finish();
        return kExitOk;
    }
    if (clo->parsed()) {
        const auto rows = clo_study(clo_flags.config(), clo_ell_max);
        Sink sink(out_path, out);
        write_rows_csv(sink.stream(), rows);
        sink.finish();
        return kExitOk;
    }
    if (cat->parsed()) {
        std::vector<StateFit> fits;
        const auto order = split_list(states_text);
        if (data_path.empty()) {
            fits = builtin_cat_fits();
            if (!order.empty()) {
                std::vector<StateFit> picked;
                for (const auto& s : order) {
                    const auto it = std::find_if(fits.begin(), fits.end(), [&](const StateFit& f) { return f.state == s; });
                    if (it == fits.end()) {
                        throw ValidationError(fmt::format("no built-in fit for state '{}'", s));
                    }
                    picked.push_back(*it);
                }
                fits = std::move(picked);
            }
        } else {
            std::istringstream in(read_text_file(data_path));
            const CatData data = read_cat_csv(in, &err);
            std::vector<std::string> names = order;
            if (names.empty()) {
                for (const auto& s : data.states) {
                    names.push_back(s.state);
                }
            }
            fits = fit_states(data, names);
        }
        const auto result = cat_study(fits, cat_flags.config(), cat_opts);
        if (!specs_out.empty()) {
            Sink specs(specs_out, out);
            specs.stream() << "state,mu,sigma,attach,detach\n";
            for (std::size_t i = 0; i < result.specs.size(); ++i) {
                specs.stream() << fmt::format("{},{},{},{},{}\n", result.specs[i].state,
                                              format_number(result.fits[i].fit.mu),
                                              format_number(result.fits[i].fit.sigma),
                                              format_number(result.specs[i].attach),
                                              format_number(result.specs[i].detach));
            }
            specs.finish();
        }
        Sink sink(out_path, out);
        write_rows_csv(sink.stream(), result.rows);
        sink.finish();
        return kExitOk;
    }
    if (verify->parsed()) {
        return run_verify(out, verify_grid, trials, verify_seed);
    }
    out << app.help();
    return kExitUsage;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    if (args.empty()) {
        err << "error: a subcommand is required (" << fmt::format("{}", fmt::join(subcommand_names(), ", "))
            << ")\n";
        return kExitUsage;
    }
    const std::string& first = args.front();
    if (!first.empty() && first.front() != '-' &&
        std::find(subcommand_names().begin(), subcommand_names().end(), first) == subcommand_names().end()) {
        err << "error: unknown subcommand '" << first << "'\n";
        return kExitUsage;
    }
    try {
        return dispatch(args, out, err);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitNoInput;
    } catch (const OutputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitCantCreate;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ExplosionLimitError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace chorate::cli
