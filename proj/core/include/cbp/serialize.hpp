#pragma once

#include <string>

#include "cbp/collapse.hpp"
#include "cbp/coupling.hpp"
#include "cbp/engine.hpp"

namespace cbp {

// floats print with 17 significant digits, '.' decimal, no locale
std::string format_g17(double x);

std::string lifted_run_to_json(const LiftedRun& run);

// nodes as {address, mark, birth_time}; the root's address is ""
std::string marked_tree_to_json(const MarkedTree& tree);

// {"n": ..., "vertices": [{"id", "out_degree"}], "edges": [{"src", "dst",
// "mult"}]}
std::string graph_to_json(const CollapsedGraph& g);
CollapsedGraph graph_from_json(const std::string& text);

// self-loops and multiplicities rendered; refuses n > 200
std::string graph_to_dot(const CollapsedGraph& g);

std::string coupling_outcome_to_json(const CouplingOutcome& out);

const char* coupling_failure_name(CouplingFailure f);

}  // namespace cbp
