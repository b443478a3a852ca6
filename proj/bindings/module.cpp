#include <optional>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "robsched/io.hpp"
#include "robsched/montecarlo.hpp"
#include "robsched/search.hpp"

namespace py = pybind11;

namespace {

using robsched::Chaining;
using robsched::Instance;
using robsched::Pos;
using robsched::Rule;

Rule parse_rule(const std::string& s) {
    if (s == "sla") return Rule::Sla;
    if (s == "gnla") return Rule::Gnla;
    throw std::invalid_argument("unknown rule '" + s + "' (expected sla or gnla)");
}

Chaining parse_chaining(const std::string& s) {
    if (s == "basic") return Chaining::Basic;
    if (s == "flexible") return Chaining::Flexible;
    if (s == "feedback") return Chaining::Feedback;
    throw std::invalid_argument("unknown chaining '" + s + "'");
}

Instance load(const std::string& text) {
    Instance inst = robsched::parse_native(text);
    const auto vr = robsched::validate_instance(inst);
    if (!vr.ok) {
        std::string msg = "invalid instance";
        for (const auto& issue : vr.issues) msg += "; " + issue;
        throw std::invalid_argument(msg);
    }
    return inst;
}

Pos load_pos(const std::string& text, const Instance& inst) {
    Pos pos = robsched::parse_pos(text);
    if (pos.node_count != inst.node_count())
        throw std::invalid_argument("POS does not match the instance (node counts differ)");
    return pos;
}

std::string solve(const std::string& instance_json, const std::string& rule, double epsilon,
                  int iterations, uint64_t seed, const std::string& chaining, bool ordering,
                  int og_samples) {
    const Instance inst = load(instance_json);
    robsched::SearchConfig config;
    config.rule = parse_rule(rule);
    config.epsilon = epsilon;
    config.max_iterations = iterations;
    config.chaining = parse_chaining(chaining);
    config.ordering = ordering;
    config.og_samples = og_samples;
    config.seed = seed;
    const robsched::RobustResult res = robsched::robust_local_search(inst, config);

    nlohmann::json doc;
    doc["feasible"] = res.feasible_found;
    doc["robust_makespan"] =
        res.feasible_found ? nlohmann::json(res.robust_makespan) : nlohmann::json();
    doc["iterations"] = res.iterations_used;
    doc["feasible_fraction"] = res.feasible_fraction;
    doc["rule"] = rule;
    doc["epsilon"] = res.epsilon;
    doc["seed"] = res.seed;
    if (res.feasible_found) doc["pos"] = robsched::pos_to_json(res.pos);
    if (ordering) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& d : res.decisions)
            arr.push_back({{"a", d.a},
                           {"b", d.b},
                           {"decision", d.decision},
                           {"index_value", d.index_value},
                           {"samples_used", d.samples_used},
                           {"inserted", d.inserted}});
        doc["ordering_decisions"] = arr;
    }
    return doc.dump();
}

double fitness(const std::string& instance_json, const std::string& pos_json,
               const std::string& rule, double epsilon) {
    const Instance inst = load(instance_json);
    const Pos pos = load_pos(pos_json, inst);
    return robsched::pos_fitness(pos, inst, parse_rule(rule), epsilon);
}

std::string evaluate(const std::string& instance_json, const std::string& pos_json, int samples,
                     double epsilon, std::optional<double> fstar, uint64_t seed,
                     std::optional<double> lower_bound, const std::string& rule,
                     bool include_makespans) {
    const Instance inst = load(instance_json);
    const Pos pos = load_pos(pos_json, inst);
    const double f =
        fstar ? *fstar : robsched::pos_fitness(pos, inst, parse_rule(rule), epsilon);
    const robsched::EvaluationReport rep =
        robsched::evaluate_pos(pos, inst, samples, epsilon, f, seed, lower_bound);

    nlohmann::json doc;
    doc["samples"] = rep.samples;
    doc["epsilon"] = rep.epsilon;
    doc["fstar"] = rep.fstar;
    doc["mean"] = rep.mean;
    doc["variance"] = rep.variance;
    doc["quantile"] = rep.quantile;
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& [eps, q] : rep.quantile_grid) grid.push_back({{"epsilon", eps}, {"quantile", q}});
    doc["quantile_grid"] = grid;
    doc["violation_rate"] = rep.violation_rate;
    doc["violation_rate_feasible"] = rep.violation_rate_feasible;
    doc["ipr"] = rep.ipr;
    doc["mnpm"] = rep.mnpm ? nlohmann::json(*rep.mnpm) : nlohmann::json();
    if (include_makespans) doc["makespans"] = rep.makespans;
    return doc.dump();
}

std::string convert_progen(const std::string& text, double sigma) {
    Instance inst = robsched::parse_progen_max(text);
    for (auto& a : inst.activities)
        if (a.id != 0 && a.id != inst.sink()) a.sigma = sigma;
    const auto vr = robsched::validate_instance(inst);
    if (!vr.ok) throw std::invalid_argument("converted instance is invalid");
    return robsched::write_native(inst);
}

std::string convert_jsp(const std::string& text, double sigma) {
    Instance inst = robsched::jsp_to_rcpsp(robsched::parse_jsp(text));
    for (auto& a : inst.activities)
        if (a.id != 0 && a.id != inst.sink()) a.sigma = sigma;
    const auto vr = robsched::validate_instance(inst);
    if (!vr.ok) throw std::invalid_argument("converted instance is invalid");
    return robsched::write_native(inst);
}

std::string normalize(const std::string& instance_json) { return robsched::write_native(load(instance_json)); }

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "robust partial order scheduling under duration uncertainty";
    m.attr("__version__") = "0.1.0";

    m.def("normalize", &normalize, py::arg("instance_json"),
          "validate an instance document and return its canonical form");
    m.def("solve", &solve, py::arg("instance_json"), py::arg("rule") = "gnla",
          py::arg("epsilon") = 0.1, py::arg("iterations") = 1000, py::arg("seed") = 1,
          py::arg("chaining") = "basic", py::arg("ordering") = false,
          py::arg("og_samples") = 100,
          "run the randomized local search; returns a JSON result with the pos");
    m.def("fitness", &fitness, py::arg("instance_json"), py::arg("pos_json"),
          py::arg("rule") = "gnla", py::arg("epsilon") = 0.1,
          "robust makespan bound of a pos document under one decision rule");
    m.def("evaluate", &evaluate, py::arg("instance_json"), py::arg("pos_json"),
          py::arg("samples") = 1000, py::arg("epsilon") = 0.1,
          py::arg("fstar") = std::nullopt, py::arg("seed") = 1,
          py::arg("lower_bound") = std::nullopt, py::arg("rule") = "gnla",
          py::arg("include_makespans") = false,
          "Monte Carlo execution of a pos; returns a JSON report");
    m.def("convert_progen", &convert_progen, py::arg("text"), py::arg("sigma") = 0.0,
          "convert a progen-max document to the native JSON format");
    m.def("convert_jsp", &convert_jsp, py::arg("text"), py::arg("sigma") = 0.0,
          "convert a job shop document to the native JSON format");
}
