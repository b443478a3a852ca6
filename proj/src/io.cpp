#include "robsched/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "robsched/rng.hpp"

namespace robsched {

using nlohmann::json;

namespace {

json require_field(const json& j, const char* name, const char* context) {
    auto it = j.find(name);
    if (it == j.end())
        throw ParseError(std::string(context) + ": missing required field '" + name + "'");
    return *it;
}

int to_int(const json& j, const char* what) {
    if (!j.is_number_integer())
        throw ParseError(std::string(what) + " must be an integer");
    return j.get<int>();
}

double to_num(const json& j, const char* what) {
    if (!j.is_number())
        throw ParseError(std::string(what) + " must be a number");
    return j.get<double>();
}

} // namespace

Instance parse_native(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("native instance: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("native instance: top level must be an object");
    int version = to_int(require_field(doc, "version", "native instance"), "version");
    if (version != 1)
        throw ParseError("native instance: unsupported version " + std::to_string(version));

    Instance inst;
    json res = require_field(doc, "resources", "native instance");
    if (!res.is_array()) throw ParseError("native instance: 'resources' must be an array");
    for (const auto& c : res) inst.capacities.push_back(to_int(c, "capacity"));

    json acts = require_field(doc, "activities", "native instance");
    if (!acts.is_array() || acts.empty())
        throw ParseError("native instance: 'activities' must be a non-empty array");
    std::vector<Activity> parsed;
    for (const auto& a : acts) {
        Activity act;
        act.id = to_int(require_field(a, "id", "activity"), "activity id");
        act.mean_duration = to_num(require_field(a, "d0", "activity"), "activity d0");
        if (a.contains("sigma")) act.sigma = to_num(a["sigma"], "activity sigma");
        json dem = require_field(a, "demands", "activity");
        if (!dem.is_array()) throw ParseError("activity demands must be an array");
        for (const auto& d : dem) act.demands.push_back(to_int(d, "demand"));
        parsed.push_back(std::move(act));
    }
    std::sort(parsed.begin(), parsed.end(),
              [](const Activity& a, const Activity& b) { return a.id < b.id; });
    for (size_t i = 0; i < parsed.size(); ++i)
        if (parsed[i].id != static_cast<int>(i))
            throw ParseError("native instance: activity ids must be contiguous from 0, got id " +
                             std::to_string(parsed[i].id) + " at position " + std::to_string(i));
    inst.activities = std::move(parsed);

    json cons = require_field(doc, "constraints", "native instance");
    if (!cons.is_array()) throw ParseError("native instance: 'constraints' must be an array");
    for (const auto& c : cons) {
        TemporalConstraint tc;
        tc.from = to_int(require_field(c, "from", "constraint"), "constraint from");
        tc.to = to_int(require_field(c, "to", "constraint"), "constraint to");
        std::string kind = require_field(c, "kind", "constraint").get<std::string>();
        if (kind == "min")
            tc.kind = LagKind::Min;
        else if (kind == "max")
            tc.kind = LagKind::Max;
        else
            throw ParseError("constraint kind must be 'min' or 'max', got '" + kind + "'");
        tc.lag = to_num(require_field(c, "lag", "constraint"), "constraint lag");
        if (c.contains("duration_bearing")) tc.duration_bearing = c["duration_bearing"].get<bool>();
        inst.constraints.push_back(tc);
    }
    return inst;
}

std::string write_native(const Instance& inst) {
    json doc;
    doc["version"] = 1;
    doc["resources"] = inst.capacities;
    json acts = json::array();
    for (const Activity& a : inst.activities) {
        json ja;
        ja["id"] = a.id;
        ja["d0"] = a.mean_duration;
        ja["sigma"] = a.sigma;
        ja["demands"] = a.demands;
        acts.push_back(ja);
    }
    doc["activities"] = acts;
    json cons = json::array();
    for (const TemporalConstraint& c : inst.constraints) {
        json jc;
        jc["from"] = c.from;
        jc["to"] = c.to;
        jc["kind"] = c.kind == LagKind::Min ? "min" : "max";
        jc["lag"] = c.lag;
        if (c.duration_bearing) jc["duration_bearing"] = true;
        cons.push_back(jc);
    }
    doc["constraints"] = cons;
    return doc.dump(2) + "\n";
}

namespace {

std::vector<std::vector<std::string>> token_lines(const std::string& text) {
    std::vector<std::vector<std::string>> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        for (char& ch : line)
            if (ch == '[' || ch == ']' || ch == '\r') ch = ' ';
        std::istringstream ls(line);
        std::vector<std::string> toks;
        std::string t;
        while (ls >> t) toks.push_back(t);
        if (!toks.empty()) lines.push_back(std::move(toks));
    }
    return lines;
}

int parse_int_tok(const std::string& t, const char* what, size_t lineno) {
    try {
        size_t pos = 0;
        int v = std::stoi(t, &pos);
        if (pos != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("line ") + std::to_string(lineno) + ": " + what +
                         " expected an integer, got '" + t + "'");
    }
}

double parse_num_tok(const std::string& t, const char* what, size_t lineno) {
    try {
        size_t pos = 0;
        double v = std::stod(t, &pos);
        if (pos != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("line ") + std::to_string(lineno) + ": " + what +
                         " expected a number, got '" + t + "'");
    }
}

} // namespace

Instance parse_progen_max(const std::string& text) {
    auto lines = token_lines(text);
    if (lines.empty()) throw ParseError("progen: empty file");
    if (lines[0].size() < 4) throw ParseError("progen: header needs N Kr Kn Kd");
    int n = parse_int_tok(lines[0][0], "N", 1);
    int kr = parse_int_tok(lines[0][1], "Kr", 1);
    int kn = parse_int_tok(lines[0][2], "Kn", 1);
    int kd = parse_int_tok(lines[0][3], "Kd", 1);
    if (n < 0 || kr < 0) throw ParseError("progen: negative counts in header");
    if (kn > 0 || kd > 0)
        throw ParseError("progen: non-renewable/doubly-constrained resources are not supported");

    size_t need = 1 + 2 * static_cast<size_t>(n + 2) + 1;
    if (lines.size() < need)
        throw ParseError("progen: expected " + std::to_string(need) + " lines, got " +
                         std::to_string(lines.size()));

    struct Arc {
        int from, to;
        bool weighted;
        double weight;
    };
    std::vector<Arc> arcs;
    for (int i = 0; i < n + 2; ++i) {
        const auto& toks = lines[1 + i];
        size_t lineno = 2 + i;
        if (toks.size() < 3) throw ParseError("line " + std::to_string(lineno) + ": truncated precedence line");
        int id = parse_int_tok(toks[0], "activity id", lineno);
        if (id != i)
            throw ParseError("line " + std::to_string(lineno) + ": expected activity " +
                             std::to_string(i) + ", got " + std::to_string(id));
        int nsucc = parse_int_tok(toks[2], "successor count", lineno);
        size_t rest = toks.size() - 3;
        bool weighted;
        if (rest == static_cast<size_t>(nsucc))
            weighted = false;
        else if (rest == 2 * static_cast<size_t>(nsucc))
            weighted = true;
        else
            throw ParseError("line " + std::to_string(lineno) + ": successor count " +
                             std::to_string(nsucc) + " does not match " + std::to_string(rest) +
                             " trailing tokens");
        for (int s = 0; s < nsucc; ++s) {
            int to = parse_int_tok(toks[3 + s], "successor", lineno);
            if (to < 0 || to > n + 1)
                throw ParseError("line " + std::to_string(lineno) + ": successor " +
                                 std::to_string(to) + " out of range");
            Arc a{i, to, weighted, 0.0};
            if (weighted) a.weight = parse_num_tok(toks[3 + nsucc + s], "arc weight", lineno);
            arcs.push_back(a);
        }
    }

    Instance inst;
    inst.capacities.assign(kr, 0);
    inst.activities.resize(n + 2);
    for (int i = 0; i < n + 2; ++i) {
        const auto& toks = lines[1 + (n + 2) + i];
        size_t lineno = 2 + (n + 2) + i;
        if (toks.size() != 3 + static_cast<size_t>(kr))
            throw ParseError("line " + std::to_string(lineno) + ": requirement line needs id, mode, duration and " +
                             std::to_string(kr) + " demands");
        int id = parse_int_tok(toks[0], "activity id", lineno);
        if (id != i)
            throw ParseError("line " + std::to_string(lineno) + ": expected activity " +
                             std::to_string(i) + ", got " + std::to_string(id));
        Activity& a = inst.activities[i];
        a.id = i;
        a.mean_duration = parse_num_tok(toks[2], "duration", lineno);
        a.sigma = 0.0;
        for (int k = 0; k < kr; ++k)
            a.demands.push_back(parse_int_tok(toks[3 + k], "demand", lineno));
    }

    const auto& caps = lines[1 + 2 * (n + 2)];
    if (caps.size() != static_cast<size_t>(kr))
        throw ParseError("progen: capacity line needs " + std::to_string(kr) + " values, got " +
                         std::to_string(caps.size()));
    for (int k = 0; k < kr; ++k)
        inst.capacities[k] = parse_int_tok(caps[k], "capacity", lines.size());

    for (const Arc& a : arcs) {
        TemporalConstraint tc;
        if (!a.weighted) {
            // end-to-start precedence
            tc = {a.from, a.to, LagKind::Min, 0.0, true};
        } else if (a.weight >= 0.0) {
            tc = {a.from, a.to, LagKind::Min, a.weight, false};
        } else {
            // start-to-start lower bound with negative weight encodes a
            // maximum lag on the reversed pair
            tc = {a.to, a.from, LagKind::Max, -a.weight, false};
        }
        inst.constraints.push_back(tc);
    }
    return inst;
}

std::string write_progen_max(const Instance& inst) {
    std::ostringstream os;
    int n = inst.real_count();
    int kr = inst.resource_count();
    os << n << '\t' << kr << '\t' << 0 << '\t' << 0 << '\n';

    struct OutArc {
        int to;
        double weight;
    };
    std::vector<std::vector<OutArc>> out(inst.node_count());
    for (const TemporalConstraint& c : inst.constraints) {
        if (c.kind == LagKind::Min) {
            double w = c.lag + (c.duration_bearing ? inst.activities[c.from].mean_duration : 0.0);
            out[c.from].push_back({c.to, w});
        } else {
            out[c.to].push_back({c.from, -c.lag});
        }
    }
    auto put_num = [&os](double v) {
        if (v == std::floor(v))
            os << static_cast<long long>(v);
        else
            os << v;
    };
    for (int i = 0; i < inst.node_count(); ++i) {
        os << i << '\t' << 1 << '\t' << out[i].size();
        for (const OutArc& a : out[i]) os << '\t' << a.to;
        for (const OutArc& a : out[i]) {
            os << '\t' << '[';
            put_num(a.weight);
            os << ']';
        }
        os << '\n';
    }
    for (int i = 0; i < inst.node_count(); ++i) {
        const Activity& a = inst.activities[i];
        os << i << '\t' << 1 << '\t';
        put_num(a.mean_duration);
        for (int d : a.demands) os << '\t' << d;
        os << '\n';
    }
    for (int k = 0; k < kr; ++k) os << inst.capacities[k] << (k + 1 == kr ? "" : "\t");
    os << '\n';
    return os.str();
}

JspInstance parse_jsp(const std::string& text) {
    auto lines = token_lines(text);
    if (lines.empty()) throw ParseError("jsp: empty file");
    if (lines[0].size() < 2) throw ParseError("jsp: header needs job and machine counts");
    int n = parse_int_tok(lines[0][0], "job count", 1);
    int m = parse_int_tok(lines[0][1], "machine count", 1);
    if (n <= 0 || m <= 0) throw ParseError("jsp: job and machine counts must be positive");
    if (lines.size() < 1 + static_cast<size_t>(n))
        throw ParseError("jsp: expected " + std::to_string(n) + " job lines, got " +
                         std::to_string(lines.size() - 1));
    JspInstance jsp;
    jsp.machines = m;
    for (int j = 0; j < n; ++j) {
        const auto& toks = lines[1 + j];
        size_t lineno = 2 + j;
        if (toks.size() % 2 != 0)
            throw ParseError("line " + std::to_string(lineno) + ": expected (machine, duration) pairs");
        std::vector<JspOp> ops;
        for (size_t t = 0; t < toks.size(); t += 2) {
            JspOp op;
            op.machine = parse_int_tok(toks[t], "machine", lineno);
            op.duration = parse_num_tok(toks[t + 1], "duration", lineno);
            if (op.machine < 0 || op.machine >= m)
                throw ParseError("line " + std::to_string(lineno) + ": machine " +
                                 std::to_string(op.machine) + " out of range [0, " +
                                 std::to_string(m - 1) + "]");
            if (op.duration < 0.0)
                throw ParseError("line " + std::to_string(lineno) + ": negative duration");
            ops.push_back(op);
        }
        jsp.jobs.push_back(std::move(ops));
    }
    return jsp;
}

std::string write_jsp(const JspInstance& jsp) {
    std::ostringstream os;
    os << jsp.jobs.size() << ' ' << jsp.machines << '\n';
    for (const auto& job : jsp.jobs) {
        for (size_t i = 0; i < job.size(); ++i) {
            if (i) os << ' ';
            os << job[i].machine << ' ';
            if (job[i].duration == std::floor(job[i].duration))
                os << static_cast<long long>(job[i].duration);
            else
                os << job[i].duration;
        }
        os << '\n';
    }
    return os.str();
}

Instance jsp_to_rcpsp(const JspInstance& jsp) {
    Instance inst;
    inst.capacities.assign(jsp.machines, 1);
    int total = 0;
    for (const auto& job : jsp.jobs) total += static_cast<int>(job.size());

    Activity source;
    source.id = 0;
    source.demands.assign(jsp.machines, 0);
    inst.activities.push_back(source);
    int next_id = 1;
    for (const auto& job : jsp.jobs) {
        int prev = -1;
        for (const JspOp& op : job) {
            Activity a;
            a.id = next_id++;
            a.mean_duration = op.duration;
            a.sigma = 0.0;
            a.demands.assign(jsp.machines, 0);
            a.demands[op.machine] = 1;
            inst.activities.push_back(a);
            if (prev >= 0)
                inst.constraints.push_back({prev, a.id, LagKind::Min, 0.0, true});
            prev = a.id;
        }
    }
    Activity sink;
    sink.id = total + 1;
    sink.demands.assign(jsp.machines, 0);
    inst.activities.push_back(sink);
    return inst;
}

JspInstance generate_jsp(int jobs, int machines, uint64_t seed) {
    JspInstance jsp;
    jsp.machines = machines;
    for (int j = 0; j < jobs; ++j) {
        Rng rng(derive_stream(seed, static_cast<uint64_t>(j)));
        std::vector<int> order(machines);
        for (int m = 0; m < machines; ++m) order[m] = m;
        rng.shuffle(order);
        std::vector<JspOp> ops;
        for (int m = 0; m < machines; ++m)
            ops.push_back({order[m], static_cast<double>(rng.uniform_int(1, 99))});
        jsp.jobs.push_back(std::move(ops));
    }
    return jsp;
}

json pos_to_json(const Pos& pos) {
    json doc;
    doc["version"] = 1;
    doc["nodes"] = pos.node_count;
    json edges = json::array();
    for (const PosEdge& e : pos.edges) {
        json je;
        je["from"] = e.from;
        je["to"] = e.to;
        je["kind"] = e.kind == PosEdge::Kind::Chain ? "chain" : "precedence";
        je["lag"] = e.lag;
        je["duration_bearing"] = e.duration_bearing;
        edges.push_back(je);
    }
    doc["edges"] = edges;
    json chains = json::array();
    for (size_t k = 0; k < pos.chains.size(); ++k) {
        json jc;
        jc["resource"] = k;
        jc["units"] = pos.chains[k];
        chains.push_back(jc);
    }
    doc["chains"] = chains;
    return doc;
}

Pos pos_from_json(const json& doc) {
    Pos pos;
    pos.node_count = to_int(require_field(doc, "nodes", "pos"), "pos nodes");
    for (const auto& je : require_field(doc, "edges", "pos")) {
        PosEdge e;
        e.from = to_int(require_field(je, "from", "pos edge"), "edge from");
        e.to = to_int(require_field(je, "to", "pos edge"), "edge to");
        std::string kind = require_field(je, "kind", "pos edge").get<std::string>();
        if (kind == "chain")
            e.kind = PosEdge::Kind::Chain;
        else if (kind == "precedence")
            e.kind = PosEdge::Kind::Precedence;
        else
            throw ParseError("pos edge kind must be 'chain' or 'precedence', got '" + kind + "'");
        e.lag = to_num(require_field(je, "lag", "pos edge"), "edge lag");
        e.duration_bearing = require_field(je, "duration_bearing", "pos edge").get<bool>();
        if (e.from < 0 || e.from >= pos.node_count || e.to < 0 || e.to >= pos.node_count)
            throw ParseError("pos edge references node outside [0, nodes)");
        pos.edges.push_back(e);
    }
    for (const auto& jc : require_field(doc, "chains", "pos")) {
        int k = to_int(require_field(jc, "resource", "pos chain"), "chain resource");
        if (k != static_cast<int>(pos.chains.size()))
            throw ParseError("pos chains must be listed once per resource in order");
        pos.chains.push_back(jc["units"].get<std::vector<std::vector<int>>>());
    }
    return pos;
}

std::string write_pos(const Pos& pos) { return pos_to_json(pos).dump(2) + "\n"; }

Pos parse_pos(const std::string& text) {
    try {
        return pos_from_json(json::parse(text));
    } catch (const json::exception& e) {
        throw ParseError(std::string("pos document: ") + e.what());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

} // namespace robsched
