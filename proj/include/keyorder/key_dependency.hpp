#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "keyorder/model.hpp"

namespace keyorder {

enum class KeyKind : std::uint8_t {
  SymKey,
  AsymPrivKey,
  SigKey,
  KdfInput,
  /// Fresh/msg atom inside a protected payload. Carried nodes only anchor
  /// edges and join classes through unification; a class made solely of
  /// carried nodes is not a key class.
  Carried,
  /// Carried value that a `Secret_*` action of the same rule declares
  /// secret; it keeps its class even without a keyed use.
  SecrecyTarget,
};

std::string_view to_string(KeyKind kind);

/// One syntactic key occurrence: a distinct term within one rule.
struct KeyNode {
  std::size_t rule;  // index into Model::rules
  std::string rule_name;
  Term occurrence;
  std::string label;
  KeyKind kind;
  /// The occurrence is a fresh variable bound by an Fr premise of its rule.
  bool fresh_bound = false;
};

enum class DependencyKind : std::uint8_t { Secrecy, Authenticity };

std::string_view to_string(DependencyKind kind);

/// `from` depends on `to`. Endpoints index into a node list.
struct DependencyEdge {
  std::size_t from;
  std::size_t to;
  DependencyKind kind;
  friend auto operator<=>(const DependencyEdge&, const DependencyEdge&) = default;
};

struct ExtractOptions {
  /// Also add authenticity edges for keys carried under senc/aenc.
  bool extended_authenticity = false;
};

class CyclicDependency : public std::runtime_error {
 public:
  explicit CyclicDependency(std::vector<std::string> cycle);
  /// Class labels along the cycle; the first label is repeated at the end.
  const std::vector<std::string>& cycle() const { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

/// Acyclic graph over key classes. Each stored edge is irreflexive and may
/// carry both dependency kinds.
class KeyClassDag {
 public:
  struct KeyClass {
    std::string label;
    std::vector<std::size_t> members;  // node indices, ascending
  };
  struct Edge {
    std::size_t from;
    std::size_t to;
    bool secrecy = false;
    bool authenticity = false;
    bool has(DependencyKind k) const {
      return k == DependencyKind::Secrecy ? secrecy : authenticity;
    }
    friend bool operator==(const Edge&, const Edge&) = default;
  };

  KeyClassDag() = default;

  /// Builds from class labels and typed edges. Self-loops are dropped with a
  /// warning; duplicate edges merge. Throws CyclicDependency.
  static KeyClassDag from_edges(std::vector<KeyClass> classes,
                                const std::vector<DependencyEdge>& edges);

  const std::vector<KeyClass>& classes() const { return classes_; }
  /// Sorted by (from, to).
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::size_t size() const { return classes_.size(); }
  std::optional<std::size_t> find(std::string_view label) const;
  const std::string& label(std::size_t c) const { return classes_[c].label; }
  const Edge* edge(std::size_t from, std::size_t to) const;

 private:
  std::vector<KeyClass> classes_;
  std::vector<Edge> edges_;
  std::vector<std::string> warnings_;
};

std::vector<KeyNode> collect_key_nodes(const Model& m);

/// Node-level edges from extraction rules 1 (secrecy via encryption),
/// 2 (authenticity via signing) and 3 (kdf inputs).
std::vector<DependencyEdge> extract_edges(const Model& m, const std::vector<KeyNode>& nodes,
                                          ExtractOptions options = {},
                                          std::vector<std::string>* warnings = nullptr);

/// Class id per node. Ids are dense and ordered by each class's smallest node.
std::vector<std::size_t> unify_equivalent_keys(const Model& m, const std::vector<KeyNode>& nodes);

KeyClassDag build_class_dag(const std::vector<KeyNode>& nodes,
                            const std::vector<DependencyEdge>& edges,
                            const std::vector<std::size_t>& partition);

KeyClassDag transitive_reduction(const KeyClassDag& d);

/// Reachability over edges of the selected kinds (both by default);
/// result[a][b] iff a path of length >= 1 leads from a to b.
std::vector<std::vector<bool>> closure(const KeyClassDag& d,
                                       std::optional<DependencyKind> kind = std::nullopt);

/// Linear extension: depended-upon classes first, ties by label.
std::vector<std::size_t> linearize(const KeyClassDag& d);

/// Longest dependency path, counted in edges.
std::size_t max_chain_length(const KeyClassDag& d);

std::string emit_dot(const KeyClassDag& d);

/// One label per line in priority order, then `#` lines summarising edges.
std::string emit_order(const KeyClassDag& d);

struct Extraction {
  std::vector<KeyNode> nodes;
  std::vector<DependencyEdge> edges;
  std::vector<std::size_t> partition;
  KeyClassDag dag;
  std::vector<std::string> warnings;
};

/// Full pipeline: nodes, edges, unification, quotient DAG.
Extraction extract(const Model& m, ExtractOptions options = {});

}  // namespace keyorder
