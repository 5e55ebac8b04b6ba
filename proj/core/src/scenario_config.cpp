#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>

#include "corp/linalg.hpp"
#include "corp/scenarios.hpp"

namespace corp {

namespace {

struct Entry {
    std::string value;
    std::size_t line = 0;
};

struct Section {
    std::string name;
    std::size_t line = 0;
    std::map<std::string, Entry> entries;

    [[nodiscard]] const Entry* find(const std::string& key) const {
        auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    }
};

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_number(const Entry& e, const std::string& key) {
    const std::string v = trim(e.value);
    double out = 0.0;
    const char* first = v.data();
    if (!v.empty() && v.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw ConfigError(e.line, key + ": expected a number, got '" + v + "'");
    }
    return out;
}

Mat parse_matrix(const Entry& e, const std::string& key) {
    try {
        return parse_mat(e.value);
    } catch (const Error& err) {
        throw ConfigError(e.line, key + ": " + err.what());
    }
}

Vec parse_vector(const Entry& e, const std::string& key) {
    const Mat m = parse_matrix(e, key);
    if (m.rows() != 1 && m.cols() != 1) throw ConfigError(e.line, key + ": expected a vector");
    return {m.data().begin(), m.data().end()};
}

const Entry& require(const Section& s, const std::string& key) {
    if (const Entry* e = s.find(key)) return *e;
    throw ConfigError(s.line, "[" + s.name + "] is missing '" + key + "'");
}

std::vector<Section> read_sections(std::istream& in) {
    std::vector<Section> sections;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) throw ConfigError(line_no, "malformed section header");
            const std::string name = lower(trim(line.substr(1, line.size() - 2)));
            for (const auto& s : sections)
                if (s.name == name) throw ConfigError(line_no, "duplicate section [" + name + "]");
            sections.push_back({name, line_no, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(line_no, "expected 'key = value'");
        if (sections.empty()) throw ConfigError(line_no, "entry outside of any section");
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(line_no, "empty key");
        if (value.empty()) throw ConfigError(line_no, "empty value for '" + key + "'");
        auto& entries = sections.back().entries;
        if (entries.count(key)) throw ConfigError(line_no, "duplicate key '" + key + "'");
        entries[key] = {value, line_no};
    }
    return sections;
}

void check_keys(const Section& s, std::initializer_list<const char*> allowed) {
    for (const auto& [key, entry] : s.entries) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ConfigError(entry.line, "unknown key '" + key + "' in [" + s.name + "]");
        }
    }
}

LeaderGraph build_graph(const Section& s) {
    check_keys(s, {"adjacency", "laplacian", "leader", "topology"});
    Topology topology = Topology::Directed;
    if (const Entry* t = s.find("topology")) {
        const std::string v = lower(t->value);
        if (v == "directed") {
            topology = Topology::Directed;
        } else if (v == "undirected") {
            topology = Topology::Undirected;
        } else {
            throw ConfigError(t->line, "topology must be 'directed' or 'undirected'");
        }
    }
    const Entry* adj = s.find("adjacency");
    const Entry* lap = s.find("laplacian");
    if ((adj != nullptr) == (lap != nullptr)) {
        throw ConfigError(s.line, "[graph] needs exactly one of 'adjacency' or 'laplacian'");
    }
    try {
        if (adj) return LeaderGraph(parse_matrix(*adj, "adjacency"), topology);
        const Entry& leader = require(s, "leader");
        return LeaderGraph::from_laplacian(parse_matrix(*lap, "laplacian"), parse_vector(leader, "leader"), topology);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(adj ? adj->line : lap->line, e.what());
    }
}

struct PlantSection {
    Plant plant;
    std::optional<Mat> k1;
    std::optional<HoldSpec> hold;
    bool q_given = false;
};

PlantSection build_plant(const Section& s, const PlantSection* base) {
    check_keys(s, {"a", "b", "c", "p", "q", "k1", "c_h", "a_h"});
    PlantSection out;
    if (base) out = *base;
    auto mat = [&](const char* key, Mat& target) {
        if (const Entry* e = s.find(key)) {
            target = parse_matrix(*e, key);
        } else if (!base) {
            target = parse_matrix(require(s, key), key);
        }
    };
    mat("a", out.plant.a);
    mat("b", out.plant.b);
    mat("c", out.plant.c);
    mat("p", out.plant.p);
    if (const Entry* e = s.find("q")) {
        if (lower(e->value) != "auto") {
            out.plant.q = parse_matrix(*e, "q");
            out.q_given = true;
        } else {
            out.q_given = false;
        }
    }
    if (const Entry* e = s.find("k1")) out.k1 = parse_matrix(*e, "k1");
    const Entry* ch = s.find("c_h");
    const Entry* ah = s.find("a_h");
    if ((ch != nullptr) != (ah != nullptr)) throw ConfigError(s.line, "c_h and a_h must be given together");
    if (ch) out.hold = HoldSpec{parse_matrix(*ch, "c_h"), parse_matrix(*ah, "a_h")};
    return out;
}

TrackingScenario build_tracking(const std::vector<Section>& sections) {
    const Section* graph = nullptr;
    const Section* exo = nullptr;
    const Section* design = nullptr;
    const Section* shared = nullptr;
    std::map<std::size_t, const Section*> plant_sections;
    for (const auto& s : sections) {
        if (s.name == "graph") graph = &s;
        else if (s.name == "exosystem") exo = &s;
        else if (s.name == "design") design = &s;
        else if (s.name == "plant") shared = &s;
        else if (s.name.rfind("plant.", 0) == 0) {
            std::size_t idx = 0;
            const std::string num = s.name.substr(6);
            auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), idx);
            if (ec != std::errc() || ptr != num.data() + num.size() || idx == 0) {
                throw ConfigError(s.line, "plant sections are named [plant.1], [plant.2], ...");
            }
            plant_sections[idx] = &s;
        }
    }
    if (!graph) throw ConfigError(0, "missing [graph] section");
    if (!exo) throw ConfigError(0, "missing [exosystem] section");

    LeaderGraph g = build_graph(*graph);
    check_keys(*exo, {"s", "w0"});
    Exosystem ex{parse_matrix(require(*exo, "s"), "s"), {}};
    if (!ex.s.is_square()) throw ConfigError(require(*exo, "s").line, "S must be square");
    if (const Entry* w = exo->find("w0")) {
        ex.w0 = parse_vector(*w, "w0");
        if (ex.w0.size() != ex.order()) throw ConfigError(w->line, "w0 must have one entry per row of S");
    }

    std::optional<PlantSection> base;
    if (shared) base = build_plant(*shared, nullptr);
    for (const auto& [idx, sec] : plant_sections) {
        if (idx > g.followers()) {
            throw ConfigError(sec->line, "[plant." + std::to_string(idx) + "] exceeds the " +
                                             std::to_string(g.followers()) + " followers of the graph");
        }
    }

    TrackingScenario out{{}, ex, g, 0.1, 0.1, {}, {}};
    std::vector<std::optional<Mat>> gains;
    std::vector<std::optional<HoldSpec>> holds;
    for (std::size_t i = 1; i <= g.followers(); ++i) {
        auto it = plant_sections.find(i);
        const Section* sec = it == plant_sections.end() ? shared : it->second;
        if (!sec) throw ConfigError(0, "missing [plant." + std::to_string(i) + "] section");
        PlantSection ps = it == plant_sections.end() ? *base : build_plant(*sec, base ? &*base : nullptr);
        try {
            if (!ps.q_given) {
                if (ps.plant.c.empty()) throw DimensionError("C is empty");
                ps.plant.q = Mat(ps.plant.c.rows(), ex.order());
                ps.plant.validate(ex.order());
                ps.plant.q = -(ps.plant.c * solve_sylvester(ps.plant.a, ex.s, ps.plant.p));
            }
            ps.plant.validate(ex.order());
        } catch (const Error& e) {
            throw ConfigError(sec->line, "agent " + std::to_string(i) + ": " + e.what());
        }
        out.plants.push_back(std::move(ps.plant));
        gains.push_back(ps.k1);
        holds.push_back(ps.hold);
    }
    if (std::all_of(gains.begin(), gains.end(), [](const auto& k) { return k.has_value(); })) {
        for (auto& k : gains) out.k1.push_back(*k);
    } else if (std::any_of(gains.begin(), gains.end(), [](const auto& k) { return k.has_value(); })) {
        throw ConfigError(0, "k1 must be given for every agent or for none");
    }
    if (std::any_of(holds.begin(), holds.end(), [](const auto& h) { return h.has_value(); })) {
        for (std::size_t i = 0; i < holds.size(); ++i) {
            out.holds.push_back(holds[i] ? *holds[i] : HoldSpec::zero_order(out.plants[i].inputs()));
        }
    }

    if (design) {
        if (const Entry* e = design->find("h")) out.h = parse_number(*e, "h");
        if (const Entry* e = design->find("mu")) out.mu = parse_number(*e, "mu");
        if (!(out.h > 0.0)) throw ConfigError(design->find("h")->line, "h must be positive");
        if (!(out.mu > 0.0)) throw ConfigError(design->find("mu")->line, "mu must be positive");
    }
    return out;
}

MicrogridParams build_microgrid(const Section& s) {
    check_keys(s, {"alpha", "beta", "p_r0", "a0", "tau_p", "tau_v", "k_p", "k_q", "k1", "k2", "omega_d", "v_d",
                   "laplacian", "demand", "mu", "dispatch_h"});
    MicrogridParams p;
    if (const Entry* e = s.find("alpha")) p.alpha = parse_vector(*e, "alpha");
    const std::size_t n = p.alpha.size();
    auto vec = [&](const char* key, Vec& target) {
        const Entry* e = s.find(key);
        if (!e) {
            if (target.size() != n && target.size() > 0) {
                const double first = target.front();
                if (std::all_of(target.begin(), target.end(), [&](double v) { return v == first; })) {
                    target.assign(n, first);
                }
            }
            return;
        }
        target = parse_vector(*e, key);
        if (target.size() == 1 && n > 1) target.assign(n, target.front());
        if (target.size() != n) throw ConfigError(e->line, std::string(key) + " needs " + std::to_string(n) + " entries");
    };
    vec("beta", p.beta);
    vec("p_r0", p.p_r0);
    vec("a0", p.a0);
    vec("tau_p", p.tau_p);
    vec("tau_v", p.tau_v);
    vec("k_p", p.k_p);
    vec("k_q", p.k_q);
    if (const Entry* e = s.find("k1")) p.k1 = parse_number(*e, "k1");
    if (const Entry* e = s.find("k2")) p.k2 = parse_number(*e, "k2");
    if (const Entry* e = s.find("omega_d")) p.omega_d = parse_number(*e, "omega_d");
    if (const Entry* e = s.find("v_d")) p.v_d = parse_number(*e, "v_d");
    if (const Entry* e = s.find("dispatch_h")) p.dispatch_h = parse_number(*e, "dispatch_h");
    if (const Entry* e = s.find("laplacian")) p.l_c = parse_matrix(*e, "laplacian");
    if (const Entry* e = s.find("mu")) {
        const std::string v = lower(e->value);
        if (v == "literal") {
            p.mu = p.literal_step_sizes();
        } else if (v == "normalized") {
            p.mu.clear();
        } else {
            vec("mu", p.mu);
        }
    }
    if (const Entry* e = s.find("demand")) {
        p.demand.clear();
        std::string_view rest = e->value;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string item = trim(rest.substr(0, comma));
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
            const auto colon = item.find(':');
            if (colon == std::string::npos) throw ConfigError(e->line, "demand entries are t:value pairs");
            const double t = parse_number({item.substr(0, colon), e->line}, "demand time");
            const double v = parse_number({item.substr(colon + 1), e->line}, "demand value");
            p.demand.push_back({t, v});
        }
    }
    try {
        p.validate();
    } catch (const Error& err) {
        throw ConfigError(s.line, err.what());
    }
    return p;
}

}  // namespace

ScenarioConfig parse_scenario_config(std::istream& in) {
    const auto sections = read_sections(in);
    ScenarioConfig cfg;
    bool tracking = false;
    for (const auto& s : sections) {
        if (s.name == "graph" || s.name == "exosystem" || s.name == "plant" || s.name.rfind("plant.", 0) == 0) {
            tracking = true;
        } else if (s.name == "microgrid") {
            cfg.microgrid = build_microgrid(s);
        } else if (s.name == "design") {
            check_keys(s, {"h", "mu", "k1", "horizon", "seed"});
            if (const Entry* e = s.find("horizon")) {
                cfg.horizon = parse_number(*e, "horizon");
                if (!(*cfg.horizon > 0.0)) throw ConfigError(e->line, "horizon must be positive");
            }
            if (const Entry* e = s.find("seed")) {
                std::uint64_t seed = 0;
                const std::string v = trim(e->value);
                auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
                if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(e->line, "seed must be an integer");
                cfg.seed = seed;
            }
            if (const Entry* e = s.find("k1")) {
                const std::string v = lower(e->value);
                if (v != "paper" && v != "synthesize") throw ConfigError(e->line, "k1 must be 'paper' or 'synthesize'");
                cfg.k1_source = v;
            }
        } else {
            throw ConfigError(s.line, "unknown section [" + s.name + "]");
        }
    }
    if (tracking) cfg.tracking = build_tracking(sections);
    if (!cfg.tracking && !cfg.microgrid) throw ConfigError(0, "config defines neither a tracking network nor a microgrid");
    return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
    return parse_scenario_config(in);
}

}  // namespace corp
