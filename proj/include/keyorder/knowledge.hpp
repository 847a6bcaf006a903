#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "keyorder/term.hpp"

namespace keyorder {

/// The attacker's own fresh value `~adv`. It is always derivable but never
/// part of the analyzed set.
Term attacker_nonce();

/// Dolev-Yao attacker knowledge. Stores the analyzed set: every received
/// term plus everything obtainable from it by projection and decryption
/// with derivable keys. Composition is answered on demand by derivable(),
/// bounded by the composition depth. Public constants are always known.
class KnowledgeSet {
 public:
  explicit KnowledgeSet(int composition_depth = 8) : depth_(composition_depth) {}

  /// Adds a ground term and re-saturates the analyzed set.
  void add(const Term& t);

  bool derivable(const Term& t) const { return derivable(t, depth_); }
  bool derivable(const Term& t, int depth) const;

  const std::set<Term>& analyzed() const { return analyzed_; }
  /// Analyzed applications with the given head symbol.
  const std::vector<Term>& with_head(const std::string& symbol) const;
  /// Analyzed fresh names.
  const std::vector<Term>& fresh_names() const { return fresh_; }
  /// Analyzed atoms (fresh names and constants).
  const std::vector<Term>& atoms() const { return atoms_; }

  int composition_depth() const { return depth_; }
  std::size_t size() const { return analyzed_.size(); }
  bool contains(const Term& t) const { return analyzed_.count(t) > 0; }

  friend bool operator==(const KnowledgeSet& a, const KnowledgeSet& b) {
    return a.analyzed_ == b.analyzed_;
  }

 private:
  void insert(const Term& t, std::vector<Term>& work);

  int depth_;
  std::set<Term> analyzed_;
  std::map<std::string, std::vector<Term>, std::less<>> by_head_;
  std::vector<Term> fresh_;
  std::vector<Term> atoms_;
  /// Encryptions whose key is not derivable yet.
  std::vector<Term> pending_;
};

}  // namespace keyorder
