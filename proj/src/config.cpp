#include "lrt/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace lrt {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool valid_key(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

std::vector<std::string> split_list(const std::string& raw, int line) {
    std::string body = trim(raw);
    if (body.size() < 2 || body.front() != '[' || body.back() != ']')
        throw ConfigError("expected a [..] list", line);
    body = body.substr(1, body.size() - 2);
    std::vector<std::string> out;
    std::string tok;
    std::istringstream is(body);
    while (std::getline(is, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

double parse_double(const std::string& s, int line) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw ConfigError("'" + s + "' is not a number", line);
    return v;
}

std::size_t parse_size(const std::string& s, int line) {
    const double v = parse_double(s, line);
    if (v < 0.0 || v != double(std::size_t(v)))
        throw ConfigError("'" + s + "' is not a non-negative integer", line);
    return std::size_t(v);
}

}  // namespace

const ConfigNode::Entry& ConfigNode::require(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("missing required key '" + key + "'", line);
    it->second.used = true;
    return it->second;
}

std::string ConfigNode::get_string(const std::string& key) const { return require(key).value; }

std::string ConfigNode::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

double ConfigNode::get_double(const std::string& key) const {
    const Entry& e = require(key);
    return parse_double(e.value, e.line);
}

double ConfigNode::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::size_t ConfigNode::get_size(const std::string& key) const {
    const Entry& e = require(key);
    return parse_size(e.value, e.line);
}

std::size_t ConfigNode::get_size(const std::string& key, std::size_t fallback) const {
    return has(key) ? get_size(key) : fallback;
}

bool ConfigNode::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const Entry& e = require(key);
    if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
    if (e.value == "false" || e.value == "no" || e.value == "0") return false;
    throw ConfigError("'" + e.value + "' is not a boolean", e.line);
}

std::vector<double> ConfigNode::get_double_list(const std::string& key) const {
    const Entry& e = require(key);
    std::vector<double> out;
    for (const std::string& tok : split_list(e.value, e.line))
        out.push_back(parse_double(tok, e.line));
    return out;
}

std::vector<std::string> ConfigNode::get_string_list(const std::string& key) const {
    const Entry& e = require(key);
    return split_list(e.value, e.line);
}

const ConfigNode* ConfigNode::section(const std::string& key) const {
    auto it = sections.find(key);
    return it == sections.end() ? nullptr : &it->second;
}

void ConfigNode::set_path(const std::string& dotted, const std::string& value) {
    ConfigNode* node = this;
    std::size_t pos = 0;
    for (;;) {
        const std::size_t dot = dotted.find('.', pos);
        if (dot == std::string::npos) break;
        node = &node->sections[dotted.substr(pos, dot - pos)];
        pos = dot + 1;
    }
    const std::string key = dotted.substr(pos);
    if (!valid_key(key)) throw ConfigError("bad override path '" + dotted + "'", 0);
    node->values[key] = Entry{value, 0, false};
}

void ConfigNode::check_all_used(const std::string& prefix) const {
    for (const auto& [key, entry] : values)
        if (!entry.used)
            throw ConfigError("unrecognized key '" + prefix + key + "'", entry.line);
    for (const auto& [name, sub] : sections) sub.check_all_used(prefix + name + ".");
}

ConfigNode parse_config_text(std::istream& is) {
    ConfigNode root;
    std::vector<ConfigNode*> stack{&root};
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        if (s == "}") {
            if (stack.size() == 1) throw ConfigError("unmatched '}'", lineno);
            stack.pop_back();
            continue;
        }
        if (s.back() == '{') {
            const std::string name = trim(s.substr(0, s.size() - 1));
            if (!valid_key(name)) throw ConfigError("bad section name '" + name + "'", lineno);
            ConfigNode& parent = *stack.back();
            if (parent.sections.count(name))
                throw ConfigError("duplicate section '" + name + "'", lineno);
            ConfigNode& sub = parent.sections[name];
            sub.line = lineno;
            stack.push_back(&sub);
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value', a section, or '}'", lineno);
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (!valid_key(key)) throw ConfigError("bad key '" + key + "'", lineno);
        if (value.empty()) throw ConfigError("empty value for '" + key + "'", lineno);
        ConfigNode& parent = *stack.back();
        if (parent.values.count(key)) throw ConfigError("duplicate key '" + key + "'", lineno);
        parent.values[key] = ConfigNode::Entry{value, lineno, false};
    }
    if (stack.size() != 1) throw ConfigError("unterminated section", lineno);
    return root;
}

ConfigNode parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file '" + path + "'", 0);
    return parse_config_text(is);
}

void write_config_text(std::ostream& os, const ConfigNode& node, int indent) {
    const std::string pad(std::size_t(indent) * 2, ' ');
    for (const auto& [key, entry] : node.values) os << pad << key << " = " << entry.value << '\n';
    for (const auto& [name, sub] : node.sections) {
        os << pad << name << " {\n";
        write_config_text(os, sub, indent + 1);
        os << pad << "}\n";
    }
}

namespace {

ModelBundle build_bundle(const ConfigNode& m, const PinvConfig& pinv) {
    const std::string name = m.get_string("name");
    if (name == "spin_lattice") {
        SpinLatticeParams p;
        p.Lx = m.get_size("Lx", p.Lx);
        p.Ly = m.get_size("Ly", p.Ly);
        p.Jx = m.get_double("Jx", p.Jx);
        p.Jy = m.get_double("Jy", p.Jy);
        p.Jz = m.get_double("Jz", p.Jz);
        p.hx = m.get_double("hx", p.hx);
        p.hz = m.get_double("hz", p.hz);
        p.gamma = m.get_double("gamma", p.gamma);
        p.M0 = m.get_size("M0", p.M0);
        return build_spin_lattice(p, pinv);
    }
    if (name == "cavity_array") {
        FafParams p;
        p.n_modes = m.get_size("n_modes", p.n_modes);
        p.Delta = m.get_double("Delta", p.Delta);
        p.U = m.get_double("U", p.U);
        p.J = m.get_double("J", p.J);
        p.G = m.get_double("G", p.G);
        p.gamma = m.get_double("gamma", p.gamma);
        p.eta = m.get_double("eta", p.eta);
        p.M_pm = m.get_size("M_pm", p.M_pm);
        p.n_cut = m.get_size("n_cut", p.n_cut);
        return build_faf(p, pinv);
    }
    if (name == "cat_gate") {
        CatGateParams p;
        const std::string gate = m.get_string("gate", "z");
        if (gate == "z")
            p.gate = CatGate::Z;
        else if (gate == "zz")
            p.gate = CatGate::ZZ;
        else if (gate == "zzz")
            p.gate = CatGate::ZZZ;
        else
            throw ConfigError("gate must be z, zz or zzz", m.line);
        p.alpha_sq = m.get_double("alpha_sq", p.alpha_sq);
        p.kappa1 = m.get_double("kappa1", p.kappa1);
        p.kappa2 = m.get_double("kappa2", p.kappa2);
        p.epsilon = m.get_double("epsilon", p.epsilon);
        p.M_pm = m.get_size("M_pm", p.M_pm);
        p.n_cut = m.get_size("n_cut", p.n_cut);
        p.q_max = int(m.get_size("q_max", std::size_t(p.q_max)));
        const std::string init = m.get_string("init", "cat_plus");
        if (init == "cat_plus")
            p.init = CatInit::cat_plus;
        else if (init == "coherent")
            p.init = CatInit::coherent;
        else
            throw ConfigError("init must be cat_plus or coherent", m.line);
        return build_cat_gate(p, pinv);
    }
    throw ConfigError("unknown model '" + name + "'", m.line);
}

}  // namespace

RunSetup load_run_setup(const ConfigNode& root) {
    RunSetup s;
    s.engine = root.get_string("engine", "lrtdvp");
    if (s.engine != "lrtdvp" && s.engine != "oracle" && s.engine != "baseline")
        throw ConfigError("engine must be lrtdvp, oracle or baseline", root.line);
    s.seed = root.get_size("seed", 1);

    const ConfigNode* model = root.section("model");
    if (!model) throw ConfigError("missing model section", root.line);

    const ConfigNode* solver = root.section("solver");
    if (solver) {
        s.solver.t0 = solver->get_double("t0", 0.0);
        s.solver.abs_tol = solver->get_double("abs_tol", s.solver.abs_tol);
        s.solver.rel_tol = solver->get_double("rel_tol", s.solver.rel_tol);
        const double ms = solver->get_double("max_step", 0.0);
        if (ms > 0.0) s.solver.max_step = ms;
        s.solver.initial_step = solver->get_double("initial_step", 0.0);
        s.solver.trace_tol = solver->get_double("trace_tol", s.solver.trace_tol);
        s.solver.gram_refresh_tol =
            solver->get_double("gram_refresh_tol", s.solver.gram_refresh_tol);
        s.solver.output_points = solver->get_size("n_samples", s.solver.output_points);
        if (solver->has("sample_times")) s.solver.output_times = solver->get_double_list("sample_times");
        s.solver.record_chi_trace = solver->get_bool("record_chi_trace", true);
        s.solver.dense_limit = solver->get_size("dense_limit", s.solver.dense_limit);
    }

    s.bundle = build_bundle(*model, s.solver.pinv);

    double t_end = s.bundle.t_end_hint;
    if (solver && solver->has("t1")) t_end = solver->get_double("t1");
    if (t_end <= s.solver.t0)
        throw ConfigError("solver.t1 is required and must exceed t0",
                          solver ? solver->line : root.line);
    s.solver.t1 = t_end;

    if (root.has("observables")) {
        for (const std::string& want : root.get_string_list("observables")) {
            bool found = false;
            for (const Observable& o : s.bundle.observables)
                if (o.name == want) {
                    s.observables.push_back(o);
                    found = true;
                    break;
                }
            if (!found) throw ConfigError("model has no observable named '" + want + "'", root.line);
        }
    } else {
        s.observables = s.bundle.observables;
    }

    const ConfigNode* rank = root.section("rank");
    s.rank_adaptive = rank && rank->get_bool("enabled", true);
    if (rank) {
        const std::string variant = rank->get_string("chi_variant", "projected_trace");
        if (variant == "projected_trace")
            s.policy.variant = ChiVariant::projected_trace;
        else if (variant == "residual_norm")
            s.policy.variant = ChiVariant::residual_norm;
        else if (variant == "probability_ratio")
            s.policy.variant = ChiVariant::probability_ratio;
        else
            throw ConfigError("unknown chi_variant '" + variant + "'", rank->line);
        const std::string rule = rank->get_string("inflation", "leakage_svd");
        if (rule == "leakage_svd")
            s.policy.rule = InflationRule::leakage_svd;
        else if (rule == "random_orthogonal")
            s.policy.rule = InflationRule::random_orthogonal;
        else
            throw ConfigError("unknown inflation rule '" + rule + "'", rank->line);
        s.policy.eps_max = rank->get_double("eps_max", s.policy.eps_max);
        s.policy.eps_min = rank->get_double("eps_min", s.policy.eps_min);
        s.policy.M_min = rank->get_size("M_min", s.policy.M_min);
        s.policy.M_max = rank->get_size("M_max", s.policy.M_max);
        s.policy.checkpoint_dt = rank->get_double("checkpoint_dt", s.policy.checkpoint_dt);
        s.policy.hysteresis_steps = int(rank->get_size("hysteresis", 1));
        s.policy.retry_budget = int(rank->get_size("retry_budget", 5));
    }
    s.policy.seed = s.seed;

    const ConfigNode* baseline = root.section("baseline");
    if (s.engine == "baseline") {
        if (!baseline) throw ConfigError("engine 'baseline' needs a baseline section", root.line);
        s.baseline_dt = baseline->get_double("dt");
        if (s.baseline_dt <= 0.0)
            throw ConfigError("baseline.dt must be positive", baseline->line);
        s.baseline_eps = baseline->get_double("eps_max", rank ? s.policy.eps_max : 1e-4);
        s.baseline_M_min = baseline->get_size("M_min", 1);
        s.baseline_M_max = baseline->get_size("M_max", 0);
    } else if (baseline) {
        // consume so an unused block is not reported as a typo
        baseline->get_double("dt", 0.0);
        baseline->get_double("eps_max", 0.0);
        baseline->get_size("M_min", 1);
        baseline->get_size("M_max", 0);
    }

    const ConfigNode* output = root.section("output");
    if (output) {
        s.prefix = output->get_string("prefix", s.prefix);
        s.write_final_state = output->get_bool("write_final_state", false);
    }
    return s;
}

SweepSpec read_sweep_spec(const ConfigNode& root) {
    SweepSpec spec;
    const ConfigNode* sweep = root.section("sweep");
    if (!sweep) return spec;
    spec.active = true;
    spec.parameter = sweep->get_string("parameter");
    spec.values = sweep->get_string_list("values");
    if (spec.values.empty()) throw ConfigError("sweep.values is empty", sweep->line);
    return spec;
}

}  // namespace lrt
