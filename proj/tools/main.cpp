#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "robsched/io.hpp"
#include "robsched/montecarlo.hpp"
#include "robsched/search.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using robsched::Chaining;
using robsched::Instance;
using robsched::Rule;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

double wall_ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

struct SigmaSpec {
    std::optional<double> constant;
    std::optional<double> proportional;

    bool set() const { return constant || proportional; }
    std::string describe() const {
        if (constant) return fmt_short(*constant);
        if (proportional) return "proportional:" + fmt_short(*proportional);
        return "";
    }
};

SigmaSpec parse_sigma_flags(const std::optional<double>& sigma, const std::string& mode) {
    SigmaSpec spec;
    if (sigma) spec.constant = *sigma;
    if (!mode.empty()) {
        const std::string prefix = "proportional:";
        if (mode.rfind(prefix, 0) != 0)
            throw std::runtime_error("unknown --sigma-mode (expected proportional:<factor>)");
        const double f = std::stod(mode.substr(prefix.size()));
        if (f < 0) throw std::runtime_error("sigma factor must be nonnegative");
        spec.proportional = f;
        spec.constant.reset();
    }
    return spec;
}

void apply_sigma(Instance& inst, const SigmaSpec& spec) {
    if (!spec.set()) return;
    for (auto& a : inst.activities) {
        if (a.id == 0 || a.id == inst.sink()) continue;
        a.sigma = spec.constant ? *spec.constant : *spec.proportional * a.mean_duration;
    }
}

Instance load_instance(const std::string& path, const SigmaSpec& sigma) {
    Instance inst = robsched::parse_native(robsched::read_file(path));
    apply_sigma(inst, sigma);
    const auto vr = robsched::validate_instance(inst);
    if (!vr.ok) {
        std::string msg = "invalid instance " + path;
        for (const auto& issue : vr.issues) msg += "\n  " + issue;
        throw std::runtime_error(msg);
    }
    return inst;
}

Rule parse_rule(const std::string& s) {
    if (s == "sla") return Rule::Sla;
    if (s == "gnla") return Rule::Gnla;
    throw std::runtime_error("unknown rule '" + s + "' (expected sla or gnla)");
}

std::string rule_name(Rule r) { return r == Rule::Sla ? "sla" : "gnla"; }

Chaining parse_chaining(const std::string& s) {
    if (s == "basic") return Chaining::Basic;
    if (s == "flexible") return Chaining::Flexible;
    if (s == "feedback") return Chaining::Feedback;
    throw std::runtime_error("unknown chaining '" + s + "'");
}

std::string chaining_name(Chaining c) {
    switch (c) {
        case Chaining::Basic: return "basic";
        case Chaining::Flexible: return "flexible";
        default: return "feedback";
    }
}

void check_epsilon(double eps) {
    if (!(eps > 0.0) || eps > 1.0) throw std::runtime_error("epsilon out of (0,1]");
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text;
    else
        robsched::write_file(out_path, text);
}

// variant token: rule name optionally followed by +og / +rc / a bare trailing
// + (extra iterations standing in for the ordering-generation budget)
struct Variant {
    std::string name;
    Rule rule = Rule::Gnla;
    bool og = false;
    bool rc = false;
    bool plus_iterations = false;
};

Variant parse_variant(const std::string& token) {
    Variant v;
    v.name = token;
    std::string head = token;
    std::vector<std::string> mods;
    if (auto p = token.find('+'); p != std::string::npos) {
        head = token.substr(0, p);
        std::string rest = token.substr(p + 1);
        std::size_t start = 0;
        while (true) {
            const auto q = rest.find('+', start);
            mods.push_back(rest.substr(start, q == std::string::npos ? q : q - start));
            if (q == std::string::npos) break;
            start = q + 1;
        }
    }
    v.rule = parse_rule(head);
    for (const auto& m : mods) {
        if (m == "og") v.og = true;
        else if (m == "rc") v.rc = true;
        else if (m.empty()) v.plus_iterations = true;
        else throw std::runtime_error("unknown variant modifier '+" + m + "' in '" + token + "'");
    }
    return v;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_csv(s)) out.push_back(std::stod(item));
    return out;
}

nlohmann::json decisions_json(const std::vector<robsched::OrderDecision>& decisions) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : decisions) {
        arr.push_back({{"a", d.a},
                       {"b", d.b},
                       {"decision", d.decision},
                       {"index_value", d.index_value},
                       {"samples_used", d.samples_used},
                       {"inserted", d.inserted}});
    }
    return arr;
}

int cmd_solve(const std::string& instance_path, const std::string& rule_s, double epsilon,
              const SigmaSpec& sigma, int iterations, uint64_t seed, int retries,
              const std::string& chaining_s, bool og, int og_samples, double og_threshold,
              double escape, bool no_sweep, const std::string& out_path,
              const std::string& pos_path, const std::string& trace_path) {
    check_epsilon(epsilon);
    const Instance inst = load_instance(instance_path, sigma);

    robsched::SearchConfig config;
    config.rule = parse_rule(rule_s);
    config.epsilon = epsilon;
    config.max_iterations = iterations;
    config.escape_probability = escape;
    config.retries = retries;
    config.chaining = parse_chaining(chaining_s);
    config.ordering = og;
    config.og_samples = og_samples;
    config.og_threshold = og_threshold;
    config.seed = seed;
    config.record_trace = !trace_path.empty();
    config.no_sweep = no_sweep;

    const robsched::RobustResult res = robsched::robust_local_search(inst, config);

    nlohmann::json doc;
    doc["manifest"] = {{"command", "solve"},
                       {"version", kVersion},
                       {"instance", instance_path},
                       {"rule", rule_s},
                       {"epsilon", epsilon},
                       {"sigma", sigma.set() ? nlohmann::json(sigma.describe()) : nlohmann::json()},
                       {"iterations", iterations},
                       {"seed", seed},
                       {"retries", retries},
                       {"chaining", chaining_s},
                       {"og", og},
                       {"og_samples", og_samples},
                       {"og_threshold", og_threshold},
                       {"escape", escape},
                       {"no_sweep", no_sweep}};
    doc["result"] = {{"feasible", res.feasible_found},
                     {"robust_makespan",
                      res.feasible_found ? nlohmann::json(res.robust_makespan) : nlohmann::json()},
                     {"iterations", res.iterations_used},
                     {"feasible_fraction", res.feasible_fraction},
                     {"rule", rule_name(res.rule)},
                     {"epsilon", res.epsilon},
                     {"seed", res.seed}};
    if (og) doc["result"]["ordering_decisions"] = decisions_json(res.decisions);
    if (res.feasible_found) doc["pos"] = robsched::pos_to_json(res.pos);

    emit(doc.dump(2) + "\n", out_path);
    if (!out_path.empty()) std::cout << doc.dump(2) << "\n";
    if (!pos_path.empty() && res.feasible_found)
        robsched::write_file(pos_path, robsched::write_pos(res.pos));
    if (!trace_path.empty()) {
        nlohmann::json tr = nlohmann::json::array();
        for (const auto& e : res.trace) {
            tr.push_back({{"iteration", e.iteration},
                          {"state_feasible", e.state_feasible},
                          {"move", std::string(1, e.move)},
                          {"move_changed", e.move_changed},
                          {"neighbor_feasible", e.neighbor_feasible},
                          {"s_star", e.s_star},
                          {"s_now", e.s_now},
                          {"accepted", e.accepted},
                          {"escape_draw", e.escape_draw}});
        }
        robsched::write_file(trace_path, nlohmann::json{{"entries", tr}}.dump(2) + "\n");
    }
    return res.feasible_found ? 0 : 2;
}

int cmd_evaluate(const std::string& instance_path, const std::string& pos_path,
                 const std::string& rule_s, double epsilon, const SigmaSpec& sigma, int samples,
                 uint64_t seed, std::optional<double> fstar_flag,
                 std::optional<double> lower_bound, const std::string& dump_path,
                 const std::string& out_path) {
    check_epsilon(epsilon);
    if (lower_bound && *lower_bound <= 0.0) throw std::runtime_error("lower bound must be positive");
    const Instance inst = load_instance(instance_path, sigma);
    const robsched::Pos pos = robsched::parse_pos(robsched::read_file(pos_path));
    if (pos.node_count != inst.node_count())
        throw std::runtime_error("POS does not match the instance (node counts differ)");

    const Rule rule = parse_rule(rule_s);
    const auto t0 = std::chrono::steady_clock::now();
    const double fstar = fstar_flag ? *fstar_flag : robsched::pos_fitness(pos, inst, rule, epsilon);
    const robsched::EvaluationReport rep =
        robsched::evaluate_pos(pos, inst, samples, epsilon, fstar, seed, lower_bound);
    const double ms = wall_ms_since(t0);

    std::ostringstream csv;
    csv << "# robsched evaluate " << kVersion << "\n";
    csv << "# instance=" << instance_path << " pos=" << pos_path << " rule=" << rule_s
        << " epsilon=" << fmt_short(epsilon) << " sigma=" << sigma.describe()
        << " samples=" << samples << " seed=" << seed << "\n";
    csv << "instance,rule,epsilon,sigma,samples,seed,fstar,quantile,violation_rate,"
           "violation_rate_feasible,ipr,mnpm,wall_ms\n";
    csv << instance_path << "," << rule_s << "," << fmt_short(epsilon) << ","
        << sigma.describe() << "," << samples << "," << seed << "," << fmt(fstar) << ","
        << fmt(rep.quantile) << "," << fmt(rep.violation_rate) << ","
        << fmt(rep.violation_rate_feasible) << "," << fmt(rep.ipr) << ","
        << (rep.mnpm ? fmt(*rep.mnpm) : "") << "," << fmt_short(ms) << "\n";
    emit(csv.str(), out_path);
    if (!out_path.empty()) std::cout << csv.str();

    if (!dump_path.empty()) {
        std::ostringstream dump;
        for (double m : rep.makespans) dump << fmt(m) << "\n";
        robsched::write_file(dump_path, dump.str());
    }
    return 0;
}

struct BenchRow {
    std::size_t index = 0;
    std::string instance;
    Variant variant;
    double sigma = 0.0;
    double epsilon = 0.0;
    int repeat = 0;
    uint64_t seed = 0;
    // results
    bool feasible = false;
    int iterations = 0;
    double robust_makespan = 0.0;
    double wall_ms = 0.0;
};

int cmd_bench(const std::vector<std::string>& inputs, const std::string& variants_s,
              const std::string& sigmas_s, const std::string& epsilons_s, int repeats,
              int iterations, uint64_t seed, int jobs, int og_samples, double og_threshold,
              int retries, const std::string& out_path) {
    std::vector<std::string> files;
    for (const auto& in : inputs) {
        namespace fs = std::filesystem;
        if (fs::is_directory(in)) {
            std::vector<std::string> found;
            for (const auto& e : fs::directory_iterator(in))
                if (e.is_regular_file() && e.path().extension() == ".json")
                    found.push_back(e.path().string());
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else if (fs::exists(in)) {
            files.push_back(in);
        } else {
            throw std::runtime_error("no such instance file or directory: " + in);
        }
    }
    if (files.empty()) throw std::runtime_error("no instances found");

    std::vector<Variant> variants;
    for (const auto& t : split_csv(variants_s)) variants.push_back(parse_variant(t));
    if (variants.empty()) throw std::runtime_error("no variants given");
    const std::vector<double> sigmas = split_doubles(sigmas_s);
    const std::vector<double> epsilons = split_doubles(epsilons_s);
    if (sigmas.empty() || epsilons.empty()) throw std::runtime_error("empty sigma or epsilon grid");
    for (double e : epsilons) check_epsilon(e);
    if (repeats < 1) throw std::runtime_error("repeats must be >= 1");

    std::vector<BenchRow> rows;
    std::size_t index = 0;
    for (const auto& f : files)
        for (const auto& v : variants)
            for (double s : sigmas)
                for (double e : epsilons)
                    for (int r = 0; r < repeats; ++r) {
                        BenchRow row;
                        row.index = index;
                        row.instance = f;
                        row.variant = v;
                        row.sigma = s;
                        row.epsilon = e;
                        row.repeat = r;
                        row.seed = robsched::derive_stream(seed, static_cast<uint64_t>(index));
                        rows.push_back(row);
                        ++index;
                    }

    auto run_row = [&](BenchRow& row) {
        SigmaSpec spec;
        spec.constant = row.sigma;
        const Instance inst = load_instance(row.instance, spec);
        robsched::SearchConfig config;
        config.rule = row.variant.rule;
        config.epsilon = row.epsilon;
        config.max_iterations = iterations;
        config.retries = retries;
        config.chaining = row.variant.rc ? Chaining::Feedback : Chaining::Basic;
        config.ordering = row.variant.og;
        config.og_samples = og_samples;
        config.og_threshold = og_threshold;
        config.seed = row.seed;
        if (row.variant.plus_iterations) {
            const auto pairs = robsched::pairs_selection(inst);
            config.max_iterations += static_cast<int>(pairs.size()) * og_samples;
        }
        const auto t0 = std::chrono::steady_clock::now();
        const robsched::RobustResult res = robsched::robust_local_search(inst, config);
        row.wall_ms = wall_ms_since(t0);
        row.feasible = res.feasible_found;
        row.iterations = res.iterations_used;
        row.robust_makespan = res.feasible_found ? res.robust_makespan : 0.0;
    };

    if (jobs <= 1) {
        for (auto& row : rows) run_row(row);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= rows.size()) break;
                    run_row(rows[i]);
                }
            });
        for (auto& th : pool) th.join();
    }

    std::ostringstream csv;
    csv << "# robsched bench " << kVersion << "\n";
    csv << "# variants=" << variants_s << " sigmas=" << sigmas_s << " epsilons=" << epsilons_s
        << " repeats=" << repeats << " iterations=" << iterations << " seed=" << seed << "\n";
    csv << "row,instance,variant,rule,sigma,epsilon,repeat,seed,feasible,iterations,"
           "robust_makespan,wall_ms\n";
    for (const auto& row : rows) {
        csv << "run," << row.instance << "," << row.variant.name << ","
            << rule_name(row.variant.rule) << "," << fmt_short(row.sigma) << ","
            << fmt_short(row.epsilon) << "," << row.repeat << "," << row.seed << ","
            << (row.feasible ? 1 : 0) << "," << row.iterations << ","
            << (row.feasible ? fmt(row.robust_makespan) : "") << "," << fmt_short(row.wall_ms)
            << "\n";
    }
    for (std::size_t i = 0; i < rows.size();) {
        std::size_t j = i;
        int feasible = 0;
        double sum = 0.0;
        double ms = 0.0;
        while (j < rows.size() && rows[j].instance == rows[i].instance &&
               rows[j].variant.name == rows[i].variant.name && rows[j].sigma == rows[i].sigma &&
               rows[j].epsilon == rows[i].epsilon) {
            if (rows[j].feasible) {
                ++feasible;
                sum += rows[j].robust_makespan;
            }
            ms += rows[j].wall_ms;
            ++j;
        }
        const auto count = static_cast<double>(j - i);
        csv << "agg," << rows[i].instance << "," << rows[i].variant.name << ","
            << rule_name(rows[i].variant.rule) << "," << fmt_short(rows[i].sigma) << ","
            << fmt_short(rows[i].epsilon) << ",,," << feasible << "," << rows[i].iterations << ","
            << (feasible > 0 ? fmt(sum / feasible) : "") << "," << fmt_short(ms / count) << "\n";
        i = j;
    }
    emit(csv.str(), out_path);
    if (!out_path.empty()) std::cout << csv.str();
    return 0;
}

int cmd_convert(const std::string& input_path, const std::string& from, const SigmaSpec& sigma,
                const std::string& out_path) {
    const std::string text = robsched::read_file(input_path);
    Instance inst;
    if (from == "progen-max") {
        inst = robsched::parse_progen_max(text);
    } else if (from == "jsp") {
        inst = robsched::jsp_to_rcpsp(robsched::parse_jsp(text));
    } else {
        throw std::runtime_error("unknown input format '" + from + "' (expected progen-max or jsp)");
    }
    apply_sigma(inst, sigma);
    const auto vr = robsched::validate_instance(inst);
    if (!vr.ok) {
        std::string msg = "converted instance is invalid";
        for (const auto& issue : vr.issues) msg += "\n  " + issue;
        throw std::runtime_error(msg);
    }
    emit(robsched::write_native(inst), out_path);
    return 0;
}

int cmd_gen_jsp(int jobs, int machines, uint64_t seed, const std::string& out_path) {
    if (jobs < 1 || machines < 1) throw std::runtime_error("jobs and machines must be >= 1");
    emit(robsched::write_jsp(robsched::generate_jsp(jobs, machines, seed)), out_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust RCPSP/max scheduling: partial order schedules via decision-rule "
                 "moment propagation inside a randomized local search"};
    app.set_version_flag("--version", std::string("robsched ") + kVersion);
    app.require_subcommand(1);

    // solve
    std::string instance_path, rule_s = "gnla", chaining_s = "basic";
    double epsilon = 0.1, escape = 0.01, og_threshold = 0.6;
    std::optional<double> sigma_flag;
    std::string sigma_mode;
    int iterations = 1000, retries = 30, og_samples = 100;
    uint64_t seed = 1;
    bool og = false, no_sweep = false;
    std::string out_path, pos_path, trace_path;

    auto* solve = app.add_subcommand("solve", "run the robust local search on one instance");
    solve->add_option("instance", instance_path, "native instance file")->required();
    solve->add_option("--rule", rule_s, "decision rule: sla | gnla");
    solve->add_option("--epsilon", epsilon, "risk level in (0,1]");
    solve->add_option("--sigma", sigma_flag, "override every real activity's sigma");
    solve->add_option("--sigma-mode", sigma_mode, "proportional:<f> sets sigma = f * duration");
    solve->add_option("--iterations", iterations, "fitness evaluations (initial list included)");
    solve->add_option("--seed", seed, "rng seed");
    solve->add_option("--retries", retries, "random start draws per activity");
    solve->add_option("--chaining", chaining_s, "basic | flexible | feedback");
    solve->add_flag("--og", og, "run ordering generation first");
    solve->add_option("--og-samples", og_samples, "sampled lists per selected pair");
    solve->add_option("--og-threshold", og_threshold, "index-value decision threshold");
    solve->add_option("--escape", escape, "probability of accepting an infeasible neighbor");
    solve->add_flag("--no-sweep", no_sweep, "disable the deterministic window sweep");
    solve->add_option("--out", out_path, "write the result JSON here as well");
    solve->add_option("--pos", pos_path, "write the winning POS document here");
    solve->add_option("--trace", trace_path, "record and write the acceptance trace here");

    // evaluate
    std::string eval_pos_path, dump_path;
    int samples = 1000;
    std::optional<double> fstar_flag, lower_bound;
    auto* evaluate = app.add_subcommand("evaluate", "Monte Carlo evaluation of a POS document");
    evaluate->add_option("instance", instance_path, "native instance file")->required();
    evaluate->add_option("--pos", eval_pos_path, "POS document to execute")->required();
    evaluate->add_option("--rule", rule_s, "decision rule used for F* when --fstar is absent");
    evaluate->add_option("--epsilon", epsilon, "risk level in (0,1]");
    evaluate->add_option("--sigma", sigma_flag, "override every real activity's sigma");
    evaluate->add_option("--sigma-mode", sigma_mode, "proportional:<f> sets sigma = f * duration");
    evaluate->add_option("--samples", samples, "Monte Carlo samples");
    evaluate->add_option("--seed", seed, "rng seed");
    evaluate->add_option("--fstar", fstar_flag, "robust makespan to test against");
    evaluate->add_option("--lower-bound", lower_bound, "instance lower bound for mnpm");
    evaluate->add_option("--dump", dump_path, "write per-sample makespans here");
    evaluate->add_option("--out", out_path, "write the CSV here as well");

    // bench
    std::vector<std::string> bench_inputs;
    std::string variants_s = "gnla", sigmas_s = "1", epsilons_s = "0.1";
    int repeats = 10, jobs = 1;
    auto* bench = app.add_subcommand("bench", "grid of runs over instances and configurations");
    bench->add_option("inputs", bench_inputs, "instance files or directories")->required();
    bench->add_option("--variants", variants_s, "comma list, e.g. gnla,gnla+rc,gnla+og+rc,gnla+");
    bench->add_option("--sigmas", sigmas_s, "comma list of sigma overrides");
    bench->add_option("--epsilons", epsilons_s, "comma list of risk levels");
    bench->add_option("--repeats", repeats, "runs per grid cell");
    bench->add_option("--iterations", iterations, "fitness evaluations per run");
    bench->add_option("--seed", seed, "base seed; per-run seeds are derived from it");
    bench->add_option("--jobs", jobs, "worker threads");
    bench->add_option("--og-samples", og_samples, "sampled lists per selected pair");
    bench->add_option("--og-threshold", og_threshold, "index-value decision threshold");
    bench->add_option("--retries", retries, "random start draws per activity");
    bench->add_option("--out", out_path, "write the CSV here as well");

    // convert
    std::string from_format;
    auto* convert = app.add_subcommand("convert", "convert progen-max or jsp input to native JSON");
    convert->add_option("input", instance_path, "input file")->required();
    convert->add_option("--from", from_format, "input format: progen-max | jsp")->required();
    convert->add_option("--sigma", sigma_flag, "assign every real activity this sigma");
    convert->add_option("--sigma-mode", sigma_mode, "proportional:<f> sets sigma = f * duration");
    convert->add_option("--out", out_path, "write the native instance here");

    // gen-jsp
    int gen_jobs = 0, gen_machines = 0;
    auto* gen = app.add_subcommand("gen-jsp", "generate a random job shop instance");
    gen->add_option("--jobs", gen_jobs, "job count")->required();
    gen->add_option("--machines", gen_machines, "machine count")->required();
    gen->add_option("--seed", seed, "rng seed");
    gen->add_option("--out", out_path, "write the JSP text here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const SigmaSpec sigma = parse_sigma_flags(sigma_flag, sigma_mode);
        if (solve->parsed())
            return cmd_solve(instance_path, rule_s, epsilon, sigma, iterations, seed, retries,
                             chaining_s, og, og_samples, og_threshold, escape, no_sweep,
                             out_path, pos_path, trace_path);
        if (evaluate->parsed())
            return cmd_evaluate(instance_path, eval_pos_path, rule_s, epsilon, sigma, samples,
                                seed, fstar_flag, lower_bound, dump_path, out_path);
        if (bench->parsed())
            return cmd_bench(bench_inputs, variants_s, sigmas_s, epsilons_s, repeats, iterations,
                             seed, jobs, og_samples, og_threshold, retries, out_path);
        if (convert->parsed()) return cmd_convert(instance_path, from_format, sigma, out_path);
        if (gen->parsed()) return cmd_gen_jsp(gen_jobs, gen_machines, seed, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
