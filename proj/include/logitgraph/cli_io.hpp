#pragma once

// File formats and the command-line front end.
//
// Game:        {"players": 2, "actions": [2, 2], "payoffs": [[...], [...]]}
// TargetPoint: {"tilde_u": [[...], ...], "y_bar": [[...], ...]}
//
// Tensors use the flat layout of game.hpp. Every real is written with 17
// significant digits, so serialized doubles read back bit for bit.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "logitgraph/experiments.hpp"
#include "logitgraph/game.hpp"
#include "logitgraph/logit_solver.hpp"

namespace logitgraph {

/// Throws ParseError naming the offending JSON path.
Game parse_game(std::string_view text);

/// Opponent means of tilde_u above 1e-6 are a ParseError unless
/// `project_tilde` is set, in which case they are subtracted.
TargetPoint parse_target_point(std::string_view text, bool project_tilde = false);

/// Reads the JSON written by to_json(const GraphPoint&).
GraphPoint parse_graph_point(std::string_view text);

std::string to_json(const Game& game);
std::string to_json(const TargetPoint& t);
std::string to_json(const KMRepresentation& km);
std::string to_json(const GraphPoint& point);
std::string to_json(const PathTrace& trace);
std::string to_json(const ConvergenceReport& report);
std::string to_json(const RankReport& report);
std::string to_json(const VerificationReport& report);

// Tensor-valued results use the long format field,player,index,value.
std::string to_csv(const TargetPoint& t);
std::string to_csv(const KMRepresentation& km);
std::string to_csv(const GraphPoint& point);
/// Header n,player,action,probability,residual; one row per action per entry.
std::string to_csv(const PathTrace& trace);
std::string to_csv(const ConvergenceReport& report);
std::string to_csv(const RankReport& report);
std::string to_csv(const VerificationReport& report);

/// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;      // usage, parse or validation error; failed verify
inline constexpr int kExitConvergence = 2;  // a solver did not converge

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace logitgraph
