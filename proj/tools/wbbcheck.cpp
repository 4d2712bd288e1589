// wbbcheck: command-line front end for the bulletin board model checker.
//
// Exit codes: 0 expectation met, 1 unexpected violation, 2 expected attack
// not found, 64 usage or parse error, 65 trace replay mismatch.

#include "wbb/refinement.hpp"
#include "wbb/scenario.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace wbb;

namespace {

constexpr int exit_usage = 64;
constexpr int exit_replay = 65;

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
}

/// Flags shared by the subcommands; each overrides the scenario when given.
struct Overrides {
    std::string scenario_file;
    std::string out_dir;
    std::string name;

    unsigned n = 0, t = 0, periods = 0, threshold_override = 0;
    std::string items, clash;
    bool no_round2 = false, clash_guard = false, hashed = false;

    unsigned depth = 0;
    std::uint64_t seed = 0, samples = 0, max_states = 0;
    bool randomized = false, no_symmetry = false;

    std::multimap<std::string, CLI::Option*> opts;  // one entry per subcommand

    void add_common(CLI::App* app)
    {
        app->add_option("--scenario", scenario_file, "base scenario file")->check(CLI::ExistingFile);
        app->add_option("--out-dir", out_dir, "directory for reports and traces (default: $WBB_OUT_DIR or .)");
        app->add_option("--name", name, "base name for output files");
    }

    void add_config(CLI::App* app)
    {
        opts.emplace("--peers", app->add_option("-n,--peers", n, "number of peers"));
        opts.emplace("--threshold", app->add_option("-t,--threshold", t, "signature threshold"));
        opts.emplace("--periods", app->add_option("--periods", periods, "number of periods"));
        opts.emplace("--items", app->add_option("--items", items, "comma-separated item ids"));
        opts.emplace("--clash", app->add_option("--clash", clash, "comma-separated clashing pairs a:b"));
        opts.emplace("--no-round2", app->add_flag("--no-round2", no_round2, "disable the second signing round"));
        opts.emplace("--clash-guard", app->add_flag("--clash-guard", clash_guard, "honest peers refuse clashing items"));
        opts.emplace("--hashed", app->add_flag("--hashed", hashed, "hashed publication variant"));
        opts.emplace("--threshold-override", app->add_option("--threshold-override", threshold_override,
                                       "threshold used instead of t, without the 2n/3 check"));
    }

    void add_bounds(CLI::App* app)
    {
        opts.emplace("--depth", app->add_option("--depth", depth, "depth bound (0: fixpoint)"));
        opts.emplace("--seed", app->add_option("--seed", seed, "random seed"));
        opts.emplace("--samples", app->add_option("--samples", samples, "random walks"));
        opts.emplace("--max-states", app->add_option("--max-states", max_states, "state budget (0: none)"));
        opts.emplace("--randomized", app->add_flag("--randomized", randomized, "random walks instead of breadth-first search"));
        opts.emplace("--no-symmetry", app->add_flag("--no-symmetry", no_symmetry, "disable symmetry reduction"));
    }

    bool given(const std::string& flag) const
    {
        auto [lo, hi] = opts.equal_range(flag);
        return std::any_of(lo, hi, [](const auto& e) { return e.second->count() > 0; });
    }

    /// Base scenario plus flag overrides, written out and parsed again so the
    /// usual validation applies.
    Scenario build(Scenario base) const
    {
        if (!scenario_file.empty())
            base = parse_scenario(slurp(scenario_file));
        ProtocolConfig& c = base.config;
        if (given("--peers"))
            c.n = n;
        if (given("--threshold"))
            c.t = t;
        if (given("--periods"))
            c.max_periods = periods;
        if (given("--items")) {
            c.items.clear();
            std::stringstream ss(items);
            for (std::string x; std::getline(ss, x, ',');)
                c.items.push_back(x);
        }
        if (given("--clash")) {
            std::vector<std::pair<std::string, std::string>> pairs;
            std::stringstream ss(clash);
            for (std::string p; std::getline(ss, p, ',');) {
                auto colon = p.find(':');
                if (colon == std::string::npos)
                    throw CLI::ValidationError("--clash", "pairs must be written a:b");
                pairs.push_back({p.substr(0, colon), p.substr(colon + 1)});
            }
            c.clash = ClashRelation(pairs);
        }
        if (no_round2)
            c.enable_round2 = false;
        if (clash_guard)
            c.enable_clash_guard = true;
        if (hashed)
            c.hashed_publication = true;
        if (given("--threshold-override"))
            c.threshold_override = threshold_override;
        ExploreBounds& b = base.bounds;
        if (given("--depth"))
            b.max_depth = depth;
        if (given("--seed"))
            b.seed = seed;
        if (given("--samples"))
            b.samples = samples;
        if (given("--max-states"))
            b.max_states = max_states;
        if (randomized)
            b.mode = ExploreMode::randomized;
        if (no_symmetry)
            b.symmetry = false;
        if (!name.empty())
            base.name = name;
        return parse_scenario(base.text());
    }

    fs::path output_dir(const Scenario& s) const
    {
        if (!out_dir.empty())
            return out_dir;
        if (!s.out_dir.empty())
            return s.out_dir;
        if (const char* env = std::getenv("WBB_OUT_DIR"); env && *env)
            return env;
        return ".";
    }
};

int execute(const Scenario& s, const Overrides& o)
{
    ScenarioOutcome out = run_scenario(s);
    fs::path dir = o.output_dir(s);
    spit(dir / (s.report_file.empty() ? s.name + ".report" : s.report_file), out.report);
    if (out.trace)
        spit(dir / (s.trace_file.empty() ? s.name + ".trace" : s.trace_file), *out.trace);
    std::cout << out.report;
    return out.exit_code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Model checker for a peered web bulletin board protocol"};
    app.require_subcommand(1);

    Overrides o;

    auto* run = app.add_subcommand("run", "run a scenario file");
    std::string run_file;
    run->add_option("scenario", run_file, "scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--out-dir", o.out_dir, "directory for reports and traces (default: $WBB_OUT_DIR or .)");
    run->add_option("--seed", o.seed, "override the scenario seed");

    auto* check = app.add_subcommand("check", "replay a trace and check the simulation");
    std::string trace_file;
    check->add_option("trace", trace_file, "trace file")->required()->check(CLI::ExistingFile);
    o.add_common(check);
    o.add_config(check);

    auto* ex = app.add_subcommand("explore", "explore the protocol machine");
    o.add_common(ex);
    o.add_config(ex);
    o.add_bounds(ex);

    auto* at = app.add_subcommand("attack", "search for a shortest trace reaching a goal");
    std::string goal;
    at->add_option("--goal", goal,
                   "ReceiptWithoutPublication, ClashingReceipts, PublicationMutation or InvariantBreach(<clause>)");
    o.add_common(at);
    o.add_config(at);
    o.add_bounds(at);

    auto* lv = app.add_subcommand("liveness", "run publication rounds over generated schedules");
    std::string regime;
    std::uint64_t outcomes = 0;
    lv->add_option("--regime", regime, "all-honest, threshold-live+honest-users or threshold-live");
    auto* outcomes_opt = lv->add_option("--outcomes", outcomes, "posting outcomes before sampling");
    o.add_common(lv);
    o.add_config(lv);
    o.add_bounds(lv);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*run) {
            Scenario s = parse_scenario(slurp(run_file));
            if (run->count("--seed"))
                s.bounds.seed = o.seed;
            return execute(s, o);
        }
        if (*check) {
            Scenario s = o.build(Scenario{});
            Trace<WorldState> t = read_trace(bbprot_machine(s.config), slurp(trace_file));
            SimulationReport rep = check_simulation(s.config, t);
            std::cout << rep.text();
            return rep.ok ? 0 : 1;
        }
        Scenario base;
        if (*ex) {
            base.name = "explore";
            base.mode = ScenarioMode::explore;
            Scenario s = o.build(base);
            s.mode = ScenarioMode::explore;
            return execute(s, o);
        }
        if (*at) {
            base.name = "attack";
            base.mode = ScenarioMode::attack;
            base.expect = Verdict::found;
            base.goal = AttackGoal::parse("ReceiptWithoutPublication");
            Scenario s = o.build(base);
            s.mode = ScenarioMode::attack;
            if (s.expect != Verdict::not_found)
                s.expect = Verdict::found;
            if (!goal.empty())
                s.goal = AttackGoal::parse(goal);
            return execute(s, o);
        }
        if (*lv) {
            base.name = "liveness";
            base.mode = ScenarioMode::liveness;
            Scenario s = o.build(base);
            s.mode = ScenarioMode::liveness;
            if (!regime.empty())
                s.regime = parse_regime(regime);
            if (outcomes_opt->count())
                s.liveness.max_outcomes = outcomes;
            return execute(s, o);
        }
    } catch (const ReplayMismatch& e) {
        std::cout << "RESULT=REPLAY_MISMATCH step=" << e.step() << "\n";
        std::cerr << "replay mismatch: " << e.what() << "\n";
        return exit_replay;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return exit_usage;
    } catch (const ConfigError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return exit_usage;
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_usage;
}
