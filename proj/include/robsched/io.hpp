#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "robsched/model.hpp"

namespace robsched {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Native instance document: JSON object with version/resources/activities/
// constraints. write_native emits the canonical form (sorted keys, indent 2,
// duration_bearing omitted when false); parse(write(x)) == x.
Instance parse_native(const std::string& text);
std::string write_native(const Instance& inst);

// ProGen/max .sch layout: header "N Kr Kn Kd", N+2 precedence lines
// "id mode #succ succ... [weights...]", N+2 requirement lines
// "id mode duration demands...", final capacity line. Positive successor
// weights become MIN lags, negative weights MAX lags on the reversed pair;
// missing weights mean end-to-start precedence (duration-bearing, lag 0).
// Nonzero Kn/Kd is rejected. Sigmas are 0 after import.
Instance parse_progen_max(const std::string& text);
std::string write_progen_max(const Instance& inst);

struct JspOp {
    int machine = 0;
    double duration = 0.0;

    bool operator==(const JspOp&) const = default;
};

struct JspInstance {
    int machines = 0;
    std::vector<std::vector<JspOp>> jobs;

    bool operator==(const JspInstance&) const = default;
};

// Header "n M", then one line per job of (machine, duration) pairs,
// machines 0-based.
JspInstance parse_jsp(const std::string& text);
std::string write_jsp(const JspInstance& jsp);

// One unary resource per machine; operations become unit-demand activities;
// consecutive operations of a job are linked end-to-start (duration-bearing
// MIN lag 0) so the decision rules carry the predecessor's stochastic
// duration.
Instance jsp_to_rcpsp(const JspInstance& jsp);

// Seeded generator: durations uniform on [1, 99], one visit per machine per
// job in random order.
JspInstance generate_jsp(int jobs, int machines, uint64_t seed);

nlohmann::json pos_to_json(const Pos& pos);
Pos pos_from_json(const nlohmann::json& j);
std::string write_pos(const Pos& pos);
Pos parse_pos(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace robsched
