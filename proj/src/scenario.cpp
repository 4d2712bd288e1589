#include "wbb/scenario.hpp"

#include "wbb/refinement.hpp"

#include <charconv>
#include <map>
#include <set>

namespace wbb {

std::string mode_name(ScenarioMode m)
{
    switch (m) {
    case ScenarioMode::script:
        return "script";
    case ScenarioMode::explore:
        return "explore";
    case ScenarioMode::attack:
        return "attack";
    case ScenarioMode::liveness:
        return "liveness";
    case ScenarioMode::publication:
        return "publication";
    }
    return {};
}

std::string verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::ok:
        return "ok";
    case Verdict::violation:
        return "violation";
    case Verdict::found:
        return "found";
    case Verdict::not_found:
        return "not_found";
    }
    return {};
}

namespace {

std::string on_off(bool b) { return b ? "on" : "off"; }

std::string join(const std::vector<std::string>& v, const char* sep)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? sep : "") + v[i];
    return s;
}

}  // namespace

std::string Scenario::text() const
{
    std::string s = "wbb-scenario 1\nname = " + name + "\n";
    const ProtocolConfig& c = config;
    s += "\n[config]\n";
    s += "n = " + std::to_string(c.n) + "\n";
    s += "t = " + std::to_string(c.t) + "\n";
    if (c.threshold_override)
        s += "threshold_override = " + std::to_string(*c.threshold_override) + "\n";
    s += "periods = " + std::to_string(c.max_periods) + "\n";
    s += "items = " + join(c.items, ", ") + "\n";
    std::vector<std::string> pairs;
    for (const auto& [a, b] : c.clash.pairs())
        pairs.push_back(a + ":" + b);
    s += "clash = " + (pairs.empty() ? std::string("-") : join(pairs, ", ")) + "\n";
    s += "round2 = " + on_off(c.enable_round2) + "\n";
    s += "clash_guard = " + on_off(c.enable_clash_guard) + "\n";
    s += "hashed = " + on_off(c.hashed_publication) + "\n";

    s += "\n[bounds]\n";
    s += "search = " + std::string(bounds.mode == ExploreMode::exhaustive ? "exhaustive" : "randomized") + "\n";
    s += "depth = " + std::to_string(bounds.max_depth) + "\n";
    s += "seed = " + std::to_string(bounds.seed) + "\n";
    s += "samples = " + std::to_string(bounds.samples) + "\n";
    s += "symmetry = " + on_off(bounds.symmetry) + "\n";
    s += "max_states = " + std::to_string(bounds.max_states) + "\n";

    s += "\n[mode]\n";
    s += "kind = " + mode_name(mode) + "\n";
    if (mode == ScenarioMode::attack)
        s += "goal = " + goal.text() + "\n";
    if (mode == ScenarioMode::liveness) {
        s += "regime = " + regime_name(regime) + "\n";
        s += "outcomes = " + std::to_string(liveness.max_outcomes) + "\n";
    }
    s += "expect = " + verdict_name(expect) + "\n";
    if (expect_clause)
        s += "clause = " + *expect_clause + "\n";
    if (expect_rounds)
        s += "rounds = " + std::to_string(*expect_rounds) + "\n";

    if (!directives.empty() || !script.empty()) {
        s += "\n[script]\n";
        for (const auto& d : directives)
            s += "@ " + d + "\n";
        for (const auto& st : script)
            s += format_step(st) + "\n";
    }
    if (mode == ScenarioMode::publication) {
        s += "\n[databases]\n";
        for (std::size_t k = 0; k < databases.db.size(); ++k) {
            s += std::to_string(k + 1) + " =";
            for (Message m : databases.db[k])
                s += " " + m.text();
            s += "\n";
        }
        s += "\n[schedule]\n";
        s += "period = " + std::to_string(schedule.period) + "\n";
        s += "max_rounds = " + std::to_string(schedule.max_rounds) + "\n";
        s += "ingest = " + on_off(schedule.outside_ingest) + "\n";
        for (const auto& f : schedule.failures)
            s += "stop = " + std::to_string(f.peer) + " " + std::to_string(f.stop_round) + " " + f.reach.text() + "\n";
    }
    if (!out_dir.empty() || !report_file.empty() || !trace_file.empty()) {
        s += "\n[output]\n";
        if (!out_dir.empty())
            s += "dir = " + out_dir + "\n";
        if (!report_file.empty())
            s += "report = " + report_file + "\n";
        if (!trace_file.empty())
            s += "trace = " + trace_file + "\n";
    }
    return s;
}

bool operator==(const Scenario& a, const Scenario& b) { return a.text() == b.text(); }

// ------------------------------------------------------------------ parser

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& what)
{
    throw ParseError("line " + std::to_string(line) + ": " + what, line, 1);
}

std::uint64_t number(std::string_view v, std::size_t line, const std::string& key)
{
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
        fail(line, key + " expects a non-negative integer, got '" + std::string(v) + "'");
    return out;
}

unsigned small(std::string_view v, std::size_t line, const std::string& key)
{
    std::uint64_t n = number(v, line, key);
    if (n > 1'000'000)
        fail(line, key + " is out of range");
    return static_cast<unsigned>(n);
}

bool flag(std::string_view v, std::size_t line, const std::string& key)
{
    if (v == "on" || v == "yes" || v == "true")
        return true;
    if (v == "off" || v == "no" || v == "false")
        return false;
    fail(line, key + " expects on or off, got '" + std::string(v) + "'");
}

std::vector<std::string> split_list(std::string_view v)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        std::size_t end = v.find(',', start);
        if (end == std::string_view::npos)
            end = v.size();
        auto part = trim(v.substr(start, end - start));
        if (!part.empty())
            out.emplace_back(part);
        start = end + 1;
    }
    return out;
}

PeerSet peer_set(std::string_view v, std::size_t line)
{
    v = trim(v);
    if (v.size() < 2 || v.front() != '{' || v.back() != '}')
        fail(line, "expected a peer set like {1,2}, got '" + std::string(v) + "'");
    PeerSet s;
    for (const auto& part : split_list(v.substr(1, v.size() - 2))) {
        unsigned j = small(part, line, "peer set");
        if (j < 1 || j > max_peers)
            fail(line, "peer index " + part + " out of range");
        s.insert(j);
    }
    return s;
}

void check_script_step(const ProtocolConfig& cfg, const Step& st, std::size_t line)
{
    for (const auto& p : st.binding.params()) {
        if (const unsigned* v = std::get_if<unsigned>(&p.value)) {
            if ((p.name == "j" || p.name == "k") && (*v < 1 || *v > cfg.n))
                fail(line, "peer index " + p.name + "=" + std::to_string(*v) + " outside 1.." +
                               std::to_string(cfg.n));
        } else {
            for (const auto& x : items_of(std::get<Message>(p.value)))
                if (!cfg.has_item(x))
                    fail(line, "item '" + x + "' is not declared in [config]");
        }
    }
}

}  // namespace

Scenario parse_scenario(std::string_view text)
{
    Scenario s;
    std::string section;
    std::size_t line_no = 0;
    std::size_t config_line = 0;
    bool header = false;
    std::set<std::string> seen;  // section.key
    std::vector<std::pair<std::size_t, Step>> steps;
    std::map<unsigned, std::pair<std::size_t, std::vector<Message>>> dbs;
    bool saw_goal = false;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view raw = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') {
            if (end == text.size())
                break;
            continue;
        }
        if (!header) {
            if (line != "wbb-scenario 1")
                fail(line_no, "expected header 'wbb-scenario 1'");
            header = true;
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']')
                fail(line_no, "malformed section header");
            section = std::string(line.substr(1, line.size() - 2));
            static const std::set<std::string> known{"config",    "bounds",   "mode",  "script",
                                                     "databases", "schedule", "output"};
            if (!known.count(section))
                fail(line_no, "unknown section [" + section + "]");
            if (!seen.insert("[" + section + "]").second)
                fail(line_no, "duplicate section [" + section + "]");
            if (section == "config")
                config_line = line_no;
            continue;
        }
        if (section == "script") {
            if (line.front() == '@') {
                s.directives.emplace_back(trim(line.substr(1)));
                continue;
            }
            try {
                steps.push_back({line_no, parse_step(line, line_no)});
            } catch (const ParseError& e) {
                throw ParseError(e.what(), line_no, e.column());
            } catch (const std::exception& e) {
                fail(line_no, e.what());
            }
            continue;
        }

        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            fail(line_no, "expected 'key = value'");
        std::string key(trim(line.substr(0, eq)));
        std::string_view v = trim(line.substr(eq + 1));
        if (key.empty())
            fail(line_no, "missing key");
        if (key != "stop" && !seen.insert(section + "." + key).second)
            fail(line_no, "duplicate key '" + key + "'");
        auto unknown = [&] { fail(line_no, "unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]")); };

        if (section.empty()) {
            if (key != "name")
                unknown();
            if (v.empty())
                fail(line_no, "name must not be empty");
            s.name = std::string(v);
        } else if (section == "config") {
            ProtocolConfig& c = s.config;
            if (key == "n") {
                c.n = small(v, line_no, key);
                if (c.n < 1 || c.n > max_peers)
                    fail(line_no, "n must lie in 1.." + std::to_string(max_peers));
            } else if (key == "t") {
                c.t = small(v, line_no, key);
                if (c.t < 1)
                    fail(line_no, "t must be at least 1");
            } else if (key == "threshold_override") {
                if (v != "-") {
                    c.threshold_override = small(v, line_no, key);
                    if (*c.threshold_override < 1)
                        fail(line_no, "threshold_override must be at least 1");
                }
            } else if (key == "periods") {
                c.max_periods = small(v, line_no, key);
            } else if (key == "items") {
                c.items = split_list(v);
                for (const auto& x : c.items)
                    if (!is_valid_item_id(x))
                        fail(line_no, "invalid item id '" + x + "'");
            } else if (key == "clash") {
                std::vector<std::pair<std::string, std::string>> pairs;
                if (v != "-")
                    for (const auto& part : split_list(v)) {
                        auto colon = part.find(':');
                        if (colon == std::string::npos)
                            fail(line_no, "clash pair '" + part + "' must be written a:b");
                        pairs.push_back({part.substr(0, colon), part.substr(colon + 1)});
                    }
                try {
                    c.clash = ClashRelation(pairs);
                } catch (const std::exception& e) {
                    fail(line_no, e.what());
                }
            } else if (key == "round2") {
                c.enable_round2 = flag(v, line_no, key);
            } else if (key == "clash_guard") {
                c.enable_clash_guard = flag(v, line_no, key);
            } else if (key == "hashed") {
                c.hashed_publication = flag(v, line_no, key);
            } else {
                unknown();
            }
        } else if (section == "bounds") {
            ExploreBounds& b = s.bounds;
            if (key == "search") {
                if (v == "exhaustive")
                    b.mode = ExploreMode::exhaustive;
                else if (v == "randomized")
                    b.mode = ExploreMode::randomized;
                else
                    fail(line_no, "search expects exhaustive or randomized");
            } else if (key == "depth") {
                b.max_depth = small(v, line_no, key);
            } else if (key == "seed") {
                b.seed = number(v, line_no, key);
            } else if (key == "samples") {
                b.samples = number(v, line_no, key);
            } else if (key == "symmetry") {
                b.symmetry = flag(v, line_no, key);
            } else if (key == "max_states") {
                b.max_states = number(v, line_no, key);
            } else {
                unknown();
            }
        } else if (section == "mode") {
            if (key == "kind") {
                bool ok = false;
                for (auto m : {ScenarioMode::script, ScenarioMode::explore, ScenarioMode::attack,
                               ScenarioMode::liveness, ScenarioMode::publication})
                    if (v == mode_name(m)) {
                        s.mode = m;
                        ok = true;
                    }
                if (!ok)
                    fail(line_no, "kind expects script, explore, attack, liveness or publication");
            } else if (key == "expect") {
                bool ok = false;
                for (auto e : {Verdict::ok, Verdict::violation, Verdict::found, Verdict::not_found})
                    if (v == verdict_name(e)) {
                        s.expect = e;
                        ok = true;
                    }
                if (!ok)
                    fail(line_no, "expect takes ok, violation, found or not_found");
            } else if (key == "clause") {
                s.expect_clause = std::string(v);
            } else if (key == "rounds") {
                s.expect_rounds = small(v, line_no, key);
            } else if (key == "goal") {
                try {
                    s.goal = AttackGoal::parse(v);
                } catch (const std::exception& e) {
                    fail(line_no, e.what());
                }
                saw_goal = true;
            } else if (key == "regime") {
                try {
                    s.regime = parse_regime(v);
                } catch (const std::exception& e) {
                    fail(line_no, e.what());
                }
            } else if (key == "outcomes") {
                s.liveness.max_outcomes = number(v, line_no, key);
            } else {
                unknown();
            }
        } else if (section == "databases") {
            unsigned k = small(key, line_no, "database peer");
            if (k < 1 || k > max_peers)
                fail(line_no, "database peer index out of range");
            std::vector<Message> msgs;
            std::size_t p = 0;
            try {
                while (true) {
                    while (p < v.size() && v[p] == ' ')
                        ++p;
                    if (p >= v.size())
                        break;
                    msgs.push_back(parse_message_prefix(v, p));
                }
            } catch (const std::exception& e) {
                fail(line_no, e.what());
            }
            dbs[k] = {line_no, std::move(msgs)};
        } else if (section == "schedule") {
            Schedule& sc = s.schedule;
            if (key == "period") {
                sc.period = small(v, line_no, key);
            } else if (key == "max_rounds") {
                sc.max_rounds = small(v, line_no, key);
            } else if (key == "ingest") {
                sc.outside_ingest = flag(v, line_no, key);
            } else if (key == "stop") {
                std::size_t a = v.find(' ');
                std::size_t b = a == std::string_view::npos ? a : v.find(' ', a + 1);
                if (b == std::string_view::npos)
                    fail(line_no, "stop expects '<peer> <round> {<reach>}'");
                StoppingFailure f;
                f.peer = small(trim(v.substr(0, a)), line_no, "stop peer");
                f.stop_round = small(trim(v.substr(a + 1, b - a - 1)), line_no, "stop round");
                f.reach = peer_set(v.substr(b + 1), line_no);
                sc.failures.push_back(f);
            } else {
                unknown();
            }
        } else if (section == "output") {
            if (key == "dir")
                s.out_dir = std::string(v);
            else if (key == "report")
                s.report_file = std::string(v);
            else if (key == "trace")
                s.trace_file = std::string(v);
            else
                unknown();
        }
        if (end == text.size())
            break;
    }
    if (!header)
        fail(line_no == 0 ? 1 : line_no, "empty scenario: missing header 'wbb-scenario 1'");

    try {
        s.config.validate();
    } catch (const ConfigError& e) {
        throw ConfigError("line " + std::to_string(config_line) + ": " + e.what());
    }
    for (auto& [line, st] : steps) {
        check_script_step(s.config, st, line);
        s.script.push_back(std::move(st));
    }
    if (s.mode == ScenarioMode::attack && !saw_goal)
        fail(line_no, "attack scenarios need a goal in [mode]");
    if (s.mode == ScenarioMode::attack && s.expect != Verdict::found && s.expect != Verdict::not_found)
        fail(line_no, "attack scenarios expect found or not_found");
    if (s.mode != ScenarioMode::attack && (s.expect == Verdict::found || s.expect == Verdict::not_found))
        fail(line_no, "only attack scenarios expect found or not_found");
    if (s.mode == ScenarioMode::publication) {
        if (!s.config.hashed_publication)
            fail(config_line, "publication scenarios need hashed = on");
        s.databases.db.assign(s.config.n, {});
        for (auto& [k, entry] : dbs) {
            if (k > s.config.n)
                fail(entry.first, "database for peer " + std::to_string(k) + " but n=" + std::to_string(s.config.n));
            for (Message m : entry.second)
                for (const auto& x : items_of(m))
                    if (!s.config.has_item(x))
                        fail(entry.first, "item '" + x + "' is not declared in [config]");
            s.databases.db[k - 1] = std::move(entry.second);
        }
        for (const auto& f : s.schedule.failures)
            if (f.peer <= s.config.threshold() || f.peer > s.config.n)
                fail(line_no, "stopping failures apply to peers " + std::to_string(s.config.threshold() + 1) +
                                  ".." + std::to_string(s.config.n));
    } else if (!dbs.empty() || seen.count("[schedule]")) {
        fail(line_no, "[databases] and [schedule] belong to publication scenarios");
    }
    return s;
}

// ------------------------------------------------------------------ runner

Trace<WorldState> script_trace(const Scenario& s)
{
    auto machine = bbprot_machine(s.config);
    Trace<WorldState> t = empty_trace(machine);
    for (const auto& d : s.directives) {
        t.initial = machine.amend_initial(t.initial, d);
        t.directives.push_back(d);
    }
    t.steps = s.script;
    return t;
}

namespace {

std::string header(const Scenario& s)
{
    return "scenario " + s.name + " mode=" + mode_name(s.mode) + " expect=" + verdict_name(s.expect) + "\n";
}

int exit_for(const Scenario& s, Verdict got, bool detail_ok)
{
    if (got == s.expect && detail_ok)
        return 0;
    if (s.expect == Verdict::found && got == Verdict::not_found)
        return 2;
    return 1;
}

}  // namespace

ScenarioOutcome run_scenario(const Scenario& s)
{
    ScenarioOutcome out;
    std::string report = header(s);
    bool detail_ok = true;

    switch (s.mode) {
    case ScenarioMode::script: {
        Trace<WorldState> t = script_trace(s);
        SimulationReport rep = check_simulation(s.config, t);
        stamp_trace(bbprot_machine(s.config), t);
        out.trace = write_trace(t);
        out.verdict = rep.ok ? Verdict::ok : Verdict::violation;
        if (s.expect_clause)
            detail_ok = !rep.ok && rep.clause == *s.expect_clause;
        report += rep.text();
        break;
    }
    case ScenarioMode::explore: {
        ExploreResult r = explore(s.config, s.bounds);
        out.verdict = r.ok() ? Verdict::ok : Verdict::violation;
        if (r.violation) {
            out.trace = write_trace(r.violation->trace);
            if (s.expect_clause)
                detail_ok = r.violation->clause == *s.expect_clause;
        }
        report += r.text();
        break;
    }
    case ScenarioMode::attack: {
        AttackResult r = find_attack(s.config, s.goal, s.bounds);
        out.verdict = r.found() ? Verdict::found : Verdict::not_found;
        if (r.found()) {
            out.trace = write_trace(*r.trace);
            SimulationReport sim = check_simulation(s.config, *r.trace);
            report += sim.text();
            // A found attack must also break the simulation.
            detail_ok = !sim.ok;
            if (!detail_ok)
                report += "attack trace passes the simulation check\n";
        }
        report += r.text();
        break;
    }
    case ScenarioMode::liveness: {
        LivenessBounds lb = s.liveness;
        lb.seed = s.bounds.seed;
        LivenessReport r = liveness_run(s.config, s.regime, lb);
        out.verdict = r.held() ? Verdict::ok : Verdict::violation;
        report += r.text();
        break;
    }
    case ScenarioMode::publication: {
        WorldState w = posting_world(s.config, s.databases);
        Schedule sch = s.schedule;
        const unsigned t = s.config.threshold();
        sch.outside_db.clear();
        for (unsigned k = t + 1; k <= s.config.n; ++k) {
            IdSet db;
            for (Message m : s.databases.db[k - 1])
                db.insert(m);
            sch.outside_db.push_back(std::move(db));
        }
        PublicationRun r = run_publication_schedule(s.config, w, sch);
        report += "publication " + s.config.summary() + "\n" + s.databases.text() + "\n" + sch.text() + "\n";
        for (const auto& l : r.log)
            report += "  " + l + "\n";
        out.verdict = r.agreed ? Verdict::ok : Verdict::violation;
        if (s.expect_rounds)
            detail_ok = r.agreed && r.fallback_rounds == *s.expect_rounds;
        report += r.agreed ? "RESULT=AGREED rounds=" + std::to_string(r.fallback_rounds) + " board=" + r.board->text()
                           : "RESULT=NO_AGREEMENT rounds=" + std::to_string(r.fallback_rounds);
        report += "\n";
        break;
    }
    }
    out.exit_code = exit_for(s, out.verdict, detail_ok);
    report += "EXPECTATION=" + std::string(out.exit_code == 0 ? "MET" : "FAILED") + "\n";
    out.report = std::move(report);
    return out;
}

}  // namespace wbb
