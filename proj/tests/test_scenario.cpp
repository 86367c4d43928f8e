#include "carnot/errors.hpp"
#include "carnot/scenario.hpp"

#include <gtest/gtest.h>

using namespace carnot;
using nlohmann::json;

namespace {

json bump_config()
{
    return {{"group", "euclidean:2"},
            {"domain", {{"intervals", {{-1, 1}, {-1, 1}}}, {"nodes", {11, 11}}}},
            {"operator", {{"op", "trace_minus_u"}, {"c", 1}}},
            {"u", "-0.5*(1 - x1^2 - x2^2)"},
            {"v", "0"}};
}

} // namespace

TEST(Config, Parses)
{
    json j = bump_config();
    j["epsilons"] = {0.2, 0.1};
    j["seed"] = 7;
    j["outputs"] = {{"dir", "out"}, {"formats", {"json"}}};
    const auto cfg = ScenarioConfig::from_json(j);
    EXPECT_EQ(cfg.group.name(), "euclidean:2");
    EXPECT_EQ(cfg.require_domain().node_count(), 121u);
    EXPECT_EQ(cfg.epsilons, (std::vector<double>{0.2, 0.1}));
    EXPECT_EQ(cfg.seed, 7u);
    EXPECT_EQ(cfg.out_dir, "out");
    EXPECT_TRUE(cfg.wants("json"));
    EXPECT_FALSE(cfg.wants("csv"));
}

TEST(Config, Rejects)
{
    auto bad = [](auto edit) {
        json j = bump_config();
        edit(j);
        return j;
    };
    EXPECT_THROW(ScenarioConfig::from_json(json::array()), InputError);
    EXPECT_THROW(ScenarioConfig::from_json(bad([](json& j) { j["colour"] = 1; })), InputError);
    EXPECT_THROW(ScenarioConfig::from_json(bad([](json& j) { j.erase("group"); })), InputError);
    EXPECT_THROW(ScenarioConfig::from_json(bad([](json& j) { j["group"] = "heisenberg:1"; })), InputError);
    EXPECT_THROW(ScenarioConfig::from_json(bad([](json& j) { j["epsilon"] = 0; })), InputError);
    EXPECT_THROW(ScenarioConfig::from_json(bad([](json& j) { j["epsilons"] = {0.1, -0.1}; })), InputError);
    EXPECT_THROW(ScenarioConfig::from_json(bad([](json& j) { j["mode"] = "max"; })), InputError);
    EXPECT_THROW(ScenarioConfig::from_json(bad([](json& j) { j["seed"] = -1; })), InputError);
    EXPECT_THROW(ScenarioConfig::from_json(bad([](json& j) { j["u"] = "x3"; })), InputError);
    EXPECT_THROW(ScenarioConfig::from_json(bad([](json& j) { j["domain"]["nodes"] = {2, 11}; })), InputError);
    EXPECT_THROW(ScenarioConfig::from_json(bad([](json& j) { j["outputs"] = {{"formats", {"xml"}}}; })),
                 InputError);
    EXPECT_THROW(ScenarioConfig::from_file("/nonexistent/config.json"), InputError);
    auto cfg = ScenarioConfig::from_json(bad([](json& j) { j.erase("domain"); }));
    EXPECT_THROW(cfg.require_domain(), InputError);
}

TEST(Commands, GroupCheck)
{
    for (const char* name : {"euclidean:3", "heisenberg:1", "heisenberg:2", "engel"}) {
        const auto r = cmd_group_check(CarnotGroup::from_name(name), 50, 1);
        EXPECT_EQ(r.exit_code, 0) << name << dump_report(r.report);
        EXPECT_TRUE(r.report["passed"].get<bool>());
        EXPECT_EQ(r.report["properties"].size(), 8u);
    }
}

TEST(Commands, Convolve)
{
    json j = bump_config();
    j["u"] = "abs(x1) - x2^2";
    j["epsilons"] = {0.2, 0.1, 0.05};
    for (const char* mode : {"sup", "inf"}) {
        j["mode"] = mode;
        const auto r = cmd_convolve(ScenarioConfig::from_json(j));
        EXPECT_EQ(r.exit_code, 0) << dump_report(r.report);
        EXPECT_EQ(r.artifacts.size(), 3u);
        EXPECT_EQ(r.report["semiconvexity"].size(), 3u);
    }
}

TEST(Commands, Perturb)
{
    json j = bump_config();
    j["domain"] = {{"intervals", {{0, 1}, {0, 1}}}, {"nodes", {11, 11}}};
    j["v"] = "x1^2";
    const auto r = cmd_perturb(ScenarioConfig::from_json(j));
    EXPECT_EQ(r.exit_code, 0) << dump_report(r.report);
    EXPECT_TRUE(r.report["bounds_hold"].get<bool>());
    EXPECT_TRUE(r.artifacts.count("v_delta.csv"));
    j["operator"] = {{"op", "neg_trace_minus_u"}};
    EXPECT_THROW(cmd_perturb(ScenarioConfig::from_json(j)), InputError);
}

TEST(Commands, StructureCheck)
{
    json j = bump_config();
    EXPECT_EQ(cmd_structure_check(ScenarioConfig::from_json(j)).exit_code, 0);
    j["operator"] = {{"op", "neg_trace_minus_u"}};
    EXPECT_EQ(cmd_structure_check(ScenarioConfig::from_json(j)).exit_code, 1);
    j["operator"] = {{"op", "expr"}, {"expr", "M11 + M22 - r"}};
    EXPECT_EQ(cmd_structure_check(ScenarioConfig::from_json(j)).exit_code, 0);
}

TEST(Commands, Compare)
{
    json j = bump_config();
    const auto holds = cmd_compare(ScenarioConfig::from_json(j));
    EXPECT_EQ(holds.exit_code, 0);
    EXPECT_EQ(holds.report["verdict"], "HOLDS");
    j["u"] = "0.5*(1 - x1^2 - x2^2)";
    const auto bad = cmd_compare(ScenarioConfig::from_json(j));
    EXPECT_EQ(bad.exit_code, 1);
    EXPECT_EQ(bad.report["verdict"], "HYPOTHESIS_VIOLATION");
}

TEST(Commands, ReportsAreDeterministic)
{
    json j = bump_config();
    j["u"] = "0.5*(1 - x1^2 - x2^2)";
    const auto cfg = ScenarioConfig::from_json(j);
    EXPECT_EQ(dump_report(cmd_compare(cfg).report), dump_report(cmd_compare(cfg).report));
    EXPECT_EQ(dump_report(cmd_structure_check(cfg).report), dump_report(cmd_structure_check(cfg).report));
    const std::string text = dump_report(json{{"b", 1}, {"a", 2}});
    EXPECT_EQ(text, "{\n  \"a\": 2,\n  \"b\": 1\n}\n");
}
