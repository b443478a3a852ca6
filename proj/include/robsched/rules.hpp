#pragma once

#include <functional>
#include <map>
#include <vector>

#include "robsched/model.hpp"

namespace robsched {

// Moments of the segregated components of a zero-mean perturbation z,
// split as z = z+ - z- with z+ = max(z, 0), z- = max(-z, 0).
struct SegregatedMoments {
    double mu_p = 0.0;  // E[z+]
    double mu_m = 0.0;  // E[z-]
    double var_p = 0.0; // Var[z+]
    double var_m = 0.0; // Var[z-]
};

SegregatedMoments normal_segregated_moments(double sigma);
// uniform on [-a, a]
SegregatedMoments uniform_segregated_moments(double a);

struct MomentPair {
    double mean = 0.0;
    double var = 0.0;
};

// Segregated linear decision rule: value(z) = c0 + sum_k cplus[k] z_k+ +
// sum_k cminus[k] z_k-, all coefficients nonnegative. Serial composition is
// exact; a max is bounded by componentwise coefficient maxima.
struct SlaForm {
    double c0 = 0.0;
    std::map<int, double> cplus;
    std::map<int, double> cminus;

    bool operator==(const SlaForm&) const = default;
};

SlaForm sla_sum(const SlaForm& a, const SlaForm& b);
SlaForm sla_max(const SlaForm& a, const SlaForm& b);
// The start-time bound across a max keeps only the positive components of
// each branch (the true value never exceeds the c+ part of its own bound).
SlaForm sla_drop_negative(const SlaForm& f);

// Exact mean/variance of the form under independent perturbations; the
// per-activity cross term is the covariance -2 c+ c- mu_p mu_m. A negative
// total (impossible for valid moment inputs) is clamped to 0 and counted.
MomentPair sla_form_moments(const SlaForm& f,
                            const std::function<SegregatedMoments(int)>& moments,
                            int* clamp_count = nullptr);

// Upper bounds on mean and variance of max(A, B) for independent operands
// with nonnegative mean bounds.
MomentPair gnla_max_pair(MomentPair a, MomentPair b);
// Tighter leaf variant when both operands are centered normals.
MomentPair gnla_max_pair_normal(double sigma_a, double sigma_b);

// Pairing heuristic: sort by variance, non-increasing, pair adjacent; an odd
// element stays single. Returns groups of indices into the input.
std::vector<std::vector<int>> group_pairs(const std::vector<double>& variances);

struct GnlaOperand {
    MomentPair pair;
    bool normal_leaf = false; // operand is exactly a centered normal
    double sigma = 0.0;
};

// Tournament reduction of max over many operands using group_pairs at every
// level. `plan` overrides the first-level grouping (testing hook).
MomentPair gnla_max_multi(const std::vector<GnlaOperand>& ops);
MomentPair gnla_max_multi_planned(const std::vector<GnlaOperand>& ops,
                                  const std::vector<std::vector<int>>& plan);

// One-sided Chebyshev bound: mean + sqrt((1-eps)/eps) * sqrt(var).
double robust_fitness(MomentPair p, double epsilon);
double chebyshev_factor(double epsilon);

enum class Rule { Sla, Gnla };

// Decision-rule propagation over the POS evaluation DAG.
MomentPair gnla_eval(const Pos& pos, const Instance& inst);
SlaForm sla_eval(const Pos& pos, const Instance& inst);
MomentPair sla_eval_moments(const Pos& pos, const Instance& inst, int* clamp_count = nullptr);

double pos_fitness(const Pos& pos, const Instance& inst, Rule rule, double epsilon);

} // namespace robsched
