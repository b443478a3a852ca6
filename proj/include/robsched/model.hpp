#pragma once

#include <string>
#include <vector>

namespace robsched {

// RCPSP/max with start-to-start time lags. Activities are indexed by id;
// id 0 and id N+1 are the dummy source and sink (zero duration, no demands).
enum class LagKind { Min, Max };

struct TemporalConstraint {
    int from = 0;
    int to = 0;
    LagKind kind = LagKind::Min;
    double lag = 0.0;
    // A duration-bearing MIN constraint is end-to-start: st(to) >= st(from) +
    // dur(from) + lag, with the stochastic duration carried into the decision
    // rules. Used by the JSP conversion and the validation-added sink edges.
    bool duration_bearing = false;

    bool operator==(const TemporalConstraint&) const = default;
};

struct Activity {
    int id = 0;
    double mean_duration = 0.0;
    double sigma = 0.0;
    std::vector<int> demands;

    bool operator==(const Activity&) const = default;
};

struct Instance {
    std::vector<Activity> activities; // index == id, dummies included
    std::vector<int> capacities;
    std::vector<TemporalConstraint> constraints;

    int node_count() const { return static_cast<int>(activities.size()); }
    int real_count() const { return node_count() - 2; }
    int source() const { return 0; }
    int sink() const { return node_count() - 1; }
    int resource_count() const { return static_cast<int>(capacities.size()); }
    bool is_real(int id) const { return id > 0 && id < sink(); }

    bool operator==(const Instance&) const = default;
};

struct ValidationResult {
    bool ok = false;
    std::vector<std::string> issues;
};

// Checks structural validity and normalizes in place: dummy shape enforced,
// reals without an incoming MIN edge get a lag-0 MIN edge from the source,
// reals without an outgoing MIN edge get a duration-bearing lag-0 MIN edge
// to the sink.
ValidationResult validate_instance(Instance& inst);

struct Schedule {
    std::vector<double> starts; // index == activity id
};

struct TemporalViolation {
    TemporalConstraint constraint;
    double gap = 0.0; // amount by which the constraint is missed
};

struct ResourceViolation {
    int resource = 0;
    double time = 0.0;
    int usage = 0;
    int capacity = 0;
};

struct FeasibilityReport {
    bool ok = false;
    std::vector<TemporalViolation> temporal;
    std::vector<ResourceViolation> resource;
    double makespan = 0.0; // max end time over real activities
};

std::vector<double> nominal_durations(const Instance& inst);

// Feasibility of a concrete schedule under the given realized durations.
// Resource usage is computed on half-open intervals [start, start + dur).
FeasibilityReport check_schedule(const Instance& inst, const Schedule& s,
                                 const std::vector<double>& durations);

// Precedence DAG = MIN constraints with lag >= 0 (these force direction).
std::vector<std::vector<int>> precedence_adjacency(const Instance& inst);

// Transitive closure of a DAG given as adjacency lists.
class Reachability {
public:
    Reachability() = default;
    Reachability(int n, const std::vector<std::vector<int>>& adj);
    bool reaches(int u, int v) const { return bits_[static_cast<size_t>(u) * n_ + v] != 0; }
    bool related(int u, int v) const { return reaches(u, v) || reaches(v, u); }
    int size() const { return n_; }

private:
    int n_ = 0;
    std::vector<char> bits_;
};

Reachability precedence_closure(const Instance& inst);

// Partial order schedule: the original precedence edges plus the chaining
// edges; chains record which activities share each resource unit.
struct PosEdge {
    enum class Kind { Precedence, Chain };
    int from = 0;
    int to = 0;
    Kind kind = Kind::Precedence;
    double lag = 0.0;
    bool duration_bearing = false;

    bool operator==(const PosEdge&) const = default;
};

struct Pos {
    int node_count = 0;
    std::vector<PosEdge> edges;
    // chains[k][u] = activity ids served by unit u of resource k, in order
    std::vector<std::vector<std::vector<int>>> chains;

    bool operator==(const Pos&) const = default;
};

// Edges that participate in earliest-start / decision-rule evaluation:
// chain edges, duration-bearing edges, and nonnegative-lag precedence edges.
inline bool evaluation_edge(const PosEdge& e) {
    return e.kind == PosEdge::Kind::Chain || e.duration_bearing || e.lag >= 0.0;
}

// Kahn order over adjacency lists; empty result signals a cycle (for n > 0).
std::vector<int> topological_order(int n, const std::vector<std::vector<int>>& adj);

} // namespace robsched
