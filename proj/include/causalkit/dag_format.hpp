#pragma once

// Line-based causal diagram files:
//
//   # comment
//   node <name>           (optional, edges declare their endpoints)
//   treatment <name>
//   outcome <name>
//   conditioned <name>
//   latent <name>
//   edge <parent> <child>
//
// Names are any run of non-space characters not containing '#'.

#include <string>
#include <string_view>

#include "causalkit/dag.hpp"

namespace causalkit {

/// Throws Error(SyntaxError) or Error(SemanticError); `Error::line()` points
/// at the offending line. The result passes `validate`.
CausalDag parse_dag(std::string_view text);

CausalDag load_dag_file(const std::string& path);

/// Canonical form: node lines in declaration order, then role lines sorted by
/// node, then edge lines in declaration order.
std::string serialize_dag(const CausalDag& dag);

}  // namespace causalkit
