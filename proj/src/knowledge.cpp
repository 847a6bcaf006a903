#include "keyorder/knowledge.hpp"

#include <algorithm>

namespace keyorder {

namespace {

/// Key needed to open an encryption, if the term is one.
std::optional<Term> opening_key(const Term& t) {
  if (t.is_apply("senc")) return t.arg(1);
  if (t.is_apply("aenc") && t.arg(1).is_apply("pk")) return t.arg(1).arg(0);
  return std::nullopt;
}

}  // namespace

Term attacker_nonce() { return Term::fresh_name("adv"); }

const std::vector<Term>& KnowledgeSet::with_head(const std::string& symbol) const {
  static const std::vector<Term> empty;
  auto it = by_head_.find(symbol);
  return it == by_head_.end() ? empty : it->second;
}

void KnowledgeSet::insert(const Term& t, std::vector<Term>& work) {
  if (!analyzed_.insert(t).second) return;
  switch (t.kind()) {
    case TermKind::FreshName:
      fresh_.push_back(t);
      atoms_.push_back(t);
      break;
    case TermKind::Constant:
      atoms_.push_back(t);
      break;
    case TermKind::Apply:
      by_head_[t.name()].push_back(t);
      if (t.is_apply("pair")) {
        work.push_back(t.arg(0));
        work.push_back(t.arg(1));
      } else if (auto key = opening_key(t)) {
        if (derivable(*key))
          work.push_back(t.arg(0));
        else
          pending_.push_back(t);
      }
      break;
    default:
      break;
  }
}

void KnowledgeSet::add(const Term& t) {
  std::vector<Term> work{normalize(t)};
  while (!work.empty()) {
    while (!work.empty()) {
      Term u = std::move(work.back());
      work.pop_back();
      insert(u, work);
    }
    // New knowledge may open pending encryptions.
    auto opened = std::stable_partition(pending_.begin(), pending_.end(),
                                        [&](const Term& e) { return !derivable(*opening_key(e)); });
    for (auto it = opened; it != pending_.end(); ++it) work.push_back(it->arg(0));
    pending_.erase(opened, pending_.end());
  }
}

bool KnowledgeSet::derivable(const Term& t, int depth) const {
  if (t.kind() == TermKind::Constant) return true;
  if (analyzed_.count(t)) return true;
  if (!t.is_apply()) return t == attacker_nonce();
  if (t.arity() == 0) return true;
  if (depth <= 1) return false;
  return std::all_of(t.args().begin(), t.args().end(),
                     [&](const Term& a) { return derivable(a, depth - 1); });
}

}  // namespace keyorder
