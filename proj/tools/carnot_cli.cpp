// carnot: command-line front end for the Carnot-group comparison toolkit.
#include "carnot/errors.hpp"
#include "carnot/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace carnot;

namespace {

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    std::string format;
};

void add_common(CLI::App* cmd, Common& c, bool need_config)
{
    auto* opt = cmd->add_option("--config", c.config, "Scenario JSON file");
    if (need_config)
        opt->required();
    cmd->add_option("--out", c.out, "Output directory (overrides outputs.dir)");
    cmd->add_option("--seed", c.seed, "Random seed (overrides the config)");
    cmd->add_option("--samples", c.samples, "Sample count (overrides the config)");
    cmd->add_option("--format", c.format, "Write only this format")->check(CLI::IsMember({"json", "csv"}));
}

ScenarioConfig load(const Common& c)
{
    ScenarioConfig cfg = ScenarioConfig::from_file(c.config);
    if (c.seed)
        cfg.seed = *c.seed;
    if (c.samples) {
        if (*c.samples == 0)
            throw InputError("--samples must be positive");
        cfg.samples = *c.samples;
    }
    if (!c.out.empty())
        cfg.out_dir = c.out;
    if (!c.format.empty())
        cfg.formats = {c.format};
    return cfg;
}

int finish(CommandResult res, const std::string& out_dir, const std::vector<std::string>& formats)
{
    const std::string text = dump_report(res.report);
    std::cout << text;
    if (!out_dir.empty()) {
        if (std::find(formats.begin(), formats.end(), "json") != formats.end())
            res.artifacts["report.json"] = text;
        write_artifacts(res, out_dir);
    }
    return res.exit_code;
}

CarnotGroup group_argument(const std::string& arg)
{
    if (std::filesystem::is_regular_file(arg)) {
        std::ifstream in(arg);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw InputError("group spec '" + arg + "': " + e.what());
        }
        return CarnotGroup::from_json(j);
    }
    return CarnotGroup::from_name(arg);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Carnot-group arithmetic, sup/inf convolutions and comparison-principle checks"};
    app.require_subcommand(1);

    Common gc, cv, pt, sc, cp;
    std::string group_arg;
    auto* group_check = app.add_subcommand("group-check", "Check the group laws on random samples");
    group_check->add_option("group", group_arg, "Built-in name (euclidean:n, heisenberg:n, engel) or spec file");
    add_common(group_check, gc, false);
    auto* convolve = app.add_subcommand("convolve", "Sup/inf-convolve a field and report convergence");
    add_common(convolve, cv, true);
    auto* perturb = app.add_subcommand("perturb", "Build the strict supersolution v + delta*alpha_k");
    add_common(perturb, pt, true);
    auto* structure = app.add_subcommand("structure-check", "Sample the structure conditions of an operator");
    add_common(structure, sc, true);
    auto* compare = app.add_subcommand("compare", "Run the comparison-principle harness on u and v");
    add_common(compare, cp, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*group_check) {
            std::optional<ScenarioConfig> cfg;
            if (!gc.config.empty())
                cfg = load(gc);
            if (group_arg.empty() && !cfg)
                throw InputError("group-check needs a group name, spec file or --config");
            const CarnotGroup g = group_arg.empty() ? cfg->group : group_argument(group_arg);
            const std::size_t samples = gc.samples ? *gc.samples : cfg ? cfg->samples : 1000;
            const std::uint64_t seed = gc.seed ? *gc.seed : cfg ? cfg->seed : 0;
            const std::string out = gc.out.empty() && cfg ? cfg->out_dir : gc.out;
            return finish(cmd_group_check(g, samples, seed), out,
                          gc.format.empty() ? std::vector<std::string>{"json"} : std::vector{gc.format});
        }
        Common& c = *convolve ? cv : *perturb ? pt : *structure ? sc : cp;
        const ScenarioConfig cfg = load(c);
        CommandResult res = *convolve ? cmd_convolve(cfg)
                            : *perturb ? cmd_perturb(cfg)
                            : *structure ? cmd_structure_check(cfg)
                                         : cmd_compare(cfg);
        return finish(std::move(res), cfg.out_dir, cfg.formats);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return 2;
}
