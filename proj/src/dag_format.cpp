#include "causalkit/dag_format.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "causalkit/error.hpp"

namespace causalkit {

namespace {

std::vector<std::string> tokenize(std::string_view line) {
  auto hash = line.find('#');
  if (hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<std::string> tokens;
  std::istringstream in{std::string(line)};
  for (std::string t; in >> t;) tokens.push_back(t);
  return tokens;
}

}  // namespace

CausalDag parse_dag(std::string_view text) {
  CausalDag dag;
  std::istringstream in{std::string(text)};
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    const std::string& keyword = tokens[0];
    auto expect_args = [&](std::size_t n) {
      if (tokens.size() != n + 1) {
        throw Error(ErrorCode::SyntaxError,
                    "line " + std::to_string(lineno) + ": '" + keyword + "' takes " +
                        std::to_string(n) + " argument(s)",
                    lineno);
      }
    };
    if (keyword == "edge") {
      expect_args(2);
      if (tokens[1] == tokens[2]) {
        throw Error(ErrorCode::SyntaxError,
                    "line " + std::to_string(lineno) + ": self-loop on '" + tokens[1] + "'",
                    lineno, {tokens[1]});
      }
      if (dag.has_edge(tokens[1], tokens[2])) {
        throw Error(ErrorCode::SemanticError,
                    "line " + std::to_string(lineno) + ": duplicate edge " + tokens[1] +
                        " -> " + tokens[2],
                    lineno);
      }
      dag.add_edge(tokens[1], tokens[2]);
    } else if (keyword == "node") {
      expect_args(1);
      dag.add_node(tokens[1]);
    } else if (auto role = parse_role(keyword); role && *role != Role::plain) {
      expect_args(1);
      const std::string& name = tokens[1];
      Role existing = dag.role_of(name);
      if (existing != Role::plain && existing != *role) {
        throw Error(ErrorCode::SemanticError,
                    "line " + std::to_string(lineno) + ": '" + name + "' already has role " +
                        std::string(to_string(existing)),
                    lineno, {name});
      }
      if (*role == Role::treatment || *role == Role::outcome) {
        auto nodes = dag.nodes_with_role(*role);
        nodes.erase(name);
        if (!nodes.empty()) {
          throw Error(ErrorCode::SemanticError,
                      "line " + std::to_string(lineno) + ": second " + keyword + " '" + name +
                          "' (already '" + *nodes.begin() + "')",
                      lineno, {name});
        }
      }
      dag.set_role(name, *role);
    } else {
      throw Error(ErrorCode::SyntaxError,
                  "line " + std::to_string(lineno) + ": unknown keyword '" + keyword + "'",
                  lineno);
    }
  }
  try {
    validate(dag);
  } catch (const Error& e) {
    throw Error(ErrorCode::SemanticError, e.what(), 0, e.nodes());
  }
  return dag;
}

CausalDag load_dag_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_dag(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.message(), e.line(), e.nodes());
  }
}

std::string serialize_dag(const CausalDag& dag) {
  std::string out;
  for (const auto& n : dag.nodes) out += "node " + n + "\n";
  for (const auto& [name, role] : dag.roles) {
    if (role != Role::plain) out += std::string(to_string(role)) + " " + name + "\n";
  }
  for (const auto& e : dag.edges) out += "edge " + e.parent + " " + e.child + "\n";
  return out;
}

}  // namespace causalkit
