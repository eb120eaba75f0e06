#include "rcv/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rcv/errors.hpp"

namespace rcv {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct KvMap {
    // section -> key -> value, insertion order irrelevant (schema is fixed)
    std::map<std::string, std::map<std::string, std::string>> m;
    std::set<std::string> consumed;

    void set(const std::string& sec, const std::string& key,
             const std::string& val) {
        m[sec][key] = val;
    }
    const std::string* find(const std::string& sec, const std::string& key) {
        auto s = m.find(sec);
        if (s == m.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        consumed.insert(sec + "." + key);
        return &k->second;
    }
    std::string get(const std::string& sec, const std::string& key,
                    const std::string& def) {
        const std::string* v = find(sec, key);
        return v ? *v : def;
    }
    double get_num(const std::string& sec, const std::string& key, double def) {
        const std::string* v = find(sec, key);
        if (!v) return def;
        try {
            size_t pos = 0;
            const double x = std::stod(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("");
            return x;
        } catch (...) {
            throw UsageError("config: bad number for " + sec + "." + key + ": " + *v);
        }
    }
    long get_int(const std::string& sec, const std::string& key, long def) {
        const double x = get_num(sec, key, double(def));
        if (x != std::floor(x)) throw UsageError("config: " + sec + "." + key + " must be an integer");
        return long(x);
    }
    uint64_t get_u64(const std::string& sec, const std::string& key, uint64_t def) {
        const std::string* v = find(sec, key);
        if (!v) return def;
        try {
            size_t pos = 0;
            const unsigned long long x = std::stoull(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("");
            return x;
        } catch (...) {
            throw UsageError("config: bad seed for " + sec + "." + key + ": " + *v);
        }
    }
    void check_all_consumed() const {
        for (const auto& [sec, kv] : m)
            for (const auto& [key, val] : kv)
                if (!consumed.count(sec + "." + key))
                    throw UsageError("config: unknown key " + sec + "." + key);
    }
};

KvMap parse_kv(const std::string& text) {
    KvMap kv;
    std::istringstream in(text);
    std::string line, sec;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw UsageError("config line " + std::to_string(lineno) +
                                 ": malformed section header");
            sec = trim(t.substr(1, t.size() - 2));
            if (sec.empty())
                throw UsageError("config line " + std::to_string(lineno) +
                                 ": empty section name");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) +
                             ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (key.empty())
            throw UsageError("config line " + std::to_string(lineno) + ": empty key");
        if (sec.empty())
            throw UsageError("config line " + std::to_string(lineno) +
                             ": key outside any [section]");
        kv.set(sec, key, val);
    }
    return kv;
}

TopologyKind topology_kind_from_name(const std::string& s) {
    if (s == "directed") return TopologyKind::DirectedRandom;
    if (s == "undirected") return TopologyKind::UndirectedRandom;
    if (s == "smallworld") return TopologyKind::SmallWorld;
    throw UsageError("config: unknown topology kind: " + s);
}

std::string topology_kind_name(TopologyKind k) {
    switch (k) {
    case TopologyKind::DirectedRandom: return "directed";
    case TopologyKind::UndirectedRandom: return "undirected";
    case TopologyKind::SmallWorld: return "smallworld";
    }
    return "?";
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::vector<double> parse_rho_grid(const std::string& text) {
    std::vector<double> grid;
    if (text.find(':') != std::string::npos) {
        double lo, step, hi;
        char c1, c2;
        std::istringstream ss(text);
        if (!(ss >> lo >> c1 >> step >> c2 >> hi) || c1 != ':' || c2 != ':' ||
            !(step > 0) || hi < lo)
            throw UsageError("config: bad rho range (want lo:step:hi): " + text);
        // inclusive endpoint modulo roundoff
        const long count = long(std::floor((hi - lo) / step + 1e-9)) + 1;
        grid.reserve(size_t(count));
        for (long i = 0; i < count; ++i) grid.push_back(lo + double(i) * step);
        return grid;
    }
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            size_t pos = 0;
            grid.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument("");
        } catch (...) {
            throw UsageError("config: bad rho value: " + item);
        }
    }
    if (grid.empty()) throw UsageError("config: empty rho grid");
    return grid;
}

SweepSpec parse_sweep_spec(const std::string& text,
                           const std::vector<std::string>& overrides) {
    KvMap kv = parse_kv(text);
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        const auto dot = ov.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw UsageError("override must look like section.key=value: " + ov);
        kv.set(trim(ov.substr(0, dot)), trim(ov.substr(dot + 1, eq - dot - 1)),
               trim(ov.substr(eq + 1)));
    }

    SweepSpec spec;

    const std::string kind = kv.get("system", "kind", "");
    if (kind.empty()) throw UsageError("config: system.kind is required");
    spec.system.kind = system_kind_from_name(kind);

    // per-system encoding defaults
    switch (spec.system.kind) {
    case SystemKind::NlseAB:
    case SystemKind::NlseKM:
    case SystemKind::NlseCollision:
        spec.system.encoding = Encoding::Magnitude;
        break;
    case SystemKind::KSE: spec.system.encoding = Encoding::RealScalar; break;
    case SystemKind::CGLE: spec.system.encoding = Encoding::RealImagSplit; break;
    }
    if (const std::string* enc = kv.find("system", "encoding"))
        spec.system.encoding = encoding_from_name(*enc);

    switch (spec.system.kind) {
    case SystemKind::NlseAB:
    case SystemKind::NlseKM:
        spec.system.nlse.a = kv.get_num("system", "a",
                                        spec.system.kind == SystemKind::NlseKM ? 0.7 : 0.25);
        spec.system.nlse.x_points = int(kv.get_int("system", "x_points", 64));
        spec.system.nlse.dt = kv.get_num("system", "dt", 0.0);
        spec.system.nlse.role_swap = (spec.system.kind == SystemKind::NlseKM);
        break;
    case SystemKind::NlseCollision:
        spec.system.nlse.a1 = kv.get_num("system", "a1", 0.14);
        spec.system.nlse.a2 = kv.get_num("system", "a2", 0.34);
        spec.system.nlse.x_points = int(kv.get_int("system", "x_points", 64));
        spec.system.nlse.dt = kv.get_num("system", "dt", 0.0);
        break;
    case SystemKind::KSE: {
        KseParams& p = spec.system.kse;
        p.domain_length = kv.get_num("system", "domain_length", p.domain_length);
        p.x_points = int(kv.get_int("system", "x_points", p.x_points));
        p.dt = kv.get_num("system", "dt", p.dt);
        p.integrate_dt = kv.get_num("system", "integrate_dt", p.integrate_dt);
        p.transient_time = kv.get_num("system", "transient_time", p.transient_time);
        p.lyapunov_max = kv.get_num("system", "lyapunov_max", p.lyapunov_max);
        p.seed = kv.get_u64("system", "seed", p.seed);
        break;
    }
    case SystemKind::CGLE: {
        CglParams& p = spec.system.cgle;
        p.alpha_disp = kv.get_num("system", "alpha", p.alpha_disp);
        p.beta_disp = kv.get_num("system", "beta", p.beta_disp);
        p.domain_length = kv.get_num("system", "domain_length", p.domain_length);
        p.x_points = int(kv.get_int("system", "x_points", p.x_points));
        p.sample_dt = kv.get_num("system", "dt", p.sample_dt);
        p.integrate_dt = kv.get_num("system", "integrate_dt", p.integrate_dt);
        p.transient_time = kv.get_num("system", "transient_time", p.transient_time);
        p.lyapunov_max = kv.get_num("system", "lyapunov_max", p.lyapunov_max);
        p.seed = kv.get_u64("system", "seed", p.seed);
        break;
    }
    }

    spec.esn.n = int(kv.get_int("esn", "n", 0));
    spec.esn.input_scale = kv.get_num("esn", "input_scale", 1.0);
    spec.esn.transient_steps = int(kv.get_int("esn", "transient_steps", 10));
    spec.esn.ridge = kv.get_num("esn", "ridge", 1e-4);

    spec.topology.kind =
        topology_kind_from_name(kv.get("topology", "kind", "directed"));
    spec.topology.n = spec.esn.n;
    spec.topology.avg_degree = kv.get_num("topology", "avg_degree", 3.0);
    spec.topology.rewire_prob = kv.get_num("topology", "rewire_prob", 0.0);

    const std::string* grid = kv.find("sweep", "rho_grid");
    if (!grid) throw UsageError("config: sweep.rho_grid is required");
    spec.rho_grid = parse_rho_grid(*grid);
    spec.ensemble_size = int(kv.get_int("sweep", "ensemble_size", 1));
    spec.train_steps = kv.get_int("sweep", "train_steps", 0);
    spec.horizon = kv.get_int("sweep", "horizon", 0);
    const std::string sm = kv.get("sweep", "start_mode", "warm");
    if (sm == "warm") spec.start_mode = StartMode::Warm;
    else if (sm == "cold") spec.start_mode = StartMode::Cold;
    else throw UsageError("config: start_mode must be warm or cold: " + sm);
    spec.warmup_steps = kv.get_int("sweep", "warmup_steps", 100);
    spec.master_seed = kv.get_u64("sweep", "master_seed", 0);

    spec.valley_threshold = kv.get_num("valley", "threshold", 0.5);
    spec.valley_horizon = kv.get_int("valley", "horizon", 0);

    kv.check_all_consumed();
    validate_spec(spec);
    return spec;
}

SweepSpec load_sweep_spec(const std::string& path,
                          const std::vector<std::string>& overrides) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open config: " + path);
    std::ostringstream body;
    body << f.rdbuf();
    return parse_sweep_spec(body.str(), overrides);
}

std::string render_config(const SweepSpec& spec) {
    std::ostringstream o;
    o << "[system]\n";
    o << "kind = " << system_kind_name(spec.system.kind) << "\n";
    o << "encoding = " << encoding_name(spec.system.encoding) << "\n";
    switch (spec.system.kind) {
    case SystemKind::NlseAB:
    case SystemKind::NlseKM:
        o << "a = " << g17(spec.system.nlse.a) << "\n";
        o << "x_points = " << spec.system.nlse.x_points << "\n";
        o << "dt = " << g17(spec.system.nlse.dt) << "\n";
        break;
    case SystemKind::NlseCollision:
        o << "a1 = " << g17(spec.system.nlse.a1) << "\n";
        o << "a2 = " << g17(spec.system.nlse.a2) << "\n";
        o << "x_points = " << spec.system.nlse.x_points << "\n";
        o << "dt = " << g17(spec.system.nlse.dt) << "\n";
        break;
    case SystemKind::KSE: {
        const KseParams& p = spec.system.kse;
        o << "domain_length = " << g17(p.domain_length) << "\n";
        o << "x_points = " << p.x_points << "\n";
        o << "dt = " << g17(p.dt) << "\n";
        o << "integrate_dt = " << g17(p.integrate_dt) << "\n";
        o << "transient_time = " << g17(p.transient_time) << "\n";
        o << "lyapunov_max = " << g17(p.lyapunov_max) << "\n";
        o << "seed = " << p.seed << "\n";
        break;
    }
    case SystemKind::CGLE: {
        const CglParams& p = spec.system.cgle;
        o << "alpha = " << g17(p.alpha_disp) << "\n";
        o << "beta = " << g17(p.beta_disp) << "\n";
        o << "domain_length = " << g17(p.domain_length) << "\n";
        o << "x_points = " << p.x_points << "\n";
        o << "dt = " << g17(p.sample_dt) << "\n";
        o << "integrate_dt = " << g17(p.integrate_dt) << "\n";
        o << "transient_time = " << g17(p.transient_time) << "\n";
        o << "lyapunov_max = " << g17(p.lyapunov_max) << "\n";
        o << "seed = " << p.seed << "\n";
        break;
    }
    }
    o << "\n[esn]\n";
    o << "n = " << spec.esn.n << "\n";
    o << "input_scale = " << g17(spec.esn.input_scale) << "\n";
    o << "transient_steps = " << spec.esn.transient_steps << "\n";
    o << "ridge = " << g17(spec.esn.ridge) << "\n";
    o << "\n[topology]\n";
    o << "kind = " << topology_kind_name(spec.topology.kind) << "\n";
    o << "avg_degree = " << g17(spec.topology.avg_degree) << "\n";
    o << "rewire_prob = " << g17(spec.topology.rewire_prob) << "\n";
    o << "\n[sweep]\n";
    o << "rho_grid = ";
    for (size_t i = 0; i < spec.rho_grid.size(); ++i)
        o << (i ? "," : "") << g17(spec.rho_grid[i]);
    o << "\n";
    o << "ensemble_size = " << spec.ensemble_size << "\n";
    o << "train_steps = " << spec.train_steps << "\n";
    o << "horizon = " << spec.horizon << "\n";
    o << "start_mode = " << (spec.start_mode == StartMode::Warm ? "warm" : "cold") << "\n";
    o << "warmup_steps = " << spec.warmup_steps << "\n";
    o << "master_seed = " << spec.master_seed << "\n";
    o << "\n[valley]\n";
    o << "threshold = " << g17(spec.valley_threshold) << "\n";
    o << "horizon = " << spec.valley_horizon << "\n";
    return o.str();
}

} // namespace rcv
