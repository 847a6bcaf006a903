#include "keyorder/synth.hpp"

#include <charconv>
#include <random>
#include <sstream>
#include <stdexcept>

namespace keyorder {

ChainSpec parse_ordering(std::string_view text, ChainSpec base) {
  if (text == "dep") {
    base.ordering = LemmaOrdering::Dependency;
  } else if (text == "none") {
    base.ordering = LemmaOrdering::None;
  } else if (text.starts_with("rand:")) {
    std::string_view num = text.substr(5);
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), seed);
    if (num.empty() || ec != std::errc{} || ptr != num.data() + num.size())
      throw std::invalid_argument("invalid seed in ordering '" + std::string(text) + "'");
    base.ordering = LemmaOrdering::Random;
    base.seed = seed;
  } else {
    throw std::invalid_argument("unknown ordering '" + std::string(text) +
                                "' (expected dep, none or rand:SEED)");
  }
  return base;
}

std::vector<std::size_t> lemma_order(const ChainSpec& spec) {
  std::vector<std::size_t> order;
  for (std::size_t i = 1; i <= spec.depth; ++i) order.push_back(i);
  if (spec.ordering == LemmaOrdering::Random && order.size() > 1) {
    std::mt19937_64 rng(spec.seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
  }
  return order;
}

Model generate_chain_model(const ChainSpec& spec) {
  if (spec.depth < 2 || spec.depth % 2 != 0)
    throw std::invalid_argument("chain depth must be an even number of at least 2, got " +
                                std::to_string(spec.depth));
  const bool reuse = spec.reuse && spec.ordering != LemmaOrdering::None;

  std::ostringstream os;
  os << "theory PingPong" << spec.depth << "\nbegin\n\n"
     << "builtins: symmetric-encryption\n\n"
     << "rule Setup:\n"
     << "  [ Fr(~k0) ]\n"
     << "  --[ Setup() ]->\n"
     << "  [ !PSK('A', ~k0), !PSK('B', ~k0) ]\n\n";

  for (std::size_t i = 1; i <= spec.depth; ++i) {
    const char role = i % 2 == 1 ? 'A' : 'B';
    const std::string cur = "k" + std::to_string(i);
    const std::string prev = "k" + std::to_string(i - 1);
    os << "rule Send_" << cur << ":\n  [ ";
    if (i == 1) {
      os << "!PSK('A', " << prev << ")[+], ";
    } else {
      const std::string older = "k" + std::to_string(i - 2);
      if (i == 2)
        os << "!PSK('B', " << older << ")[+], ";
      else
        os << "St_" << role << "_" << i - 2 << "(" << older << ")[+], ";
      os << "In(<'m" << i - 1 << "', senc(" << prev << ", " << older << ")>)[+], ";
    }
    os << "Fr(~" << cur << ") ]\n"
       << "  --[ Secret_" << cur << "('" << role << "', ~" << cur << ") ]->\n"
       << "  [ St_" << role << "_" << i << "(~" << cur << "), Out(<'m" << i << "', senc(~" << cur
       << ", " << prev << ")>) ]\n\n";
  }

  for (std::size_t i : lemma_order(spec)) {
    os << "lemma secret_k" << i << (reuse ? " [reuse]" : "") << ":\n"
       << "  all-traces\n"
       << "  \"All P x #i. Secret_k" << i << "(P, x) @ #i ==> not (Ex #j. K(x) @ #j)\"\n\n";
  }
  os << "end\n";
  return parse_model(os.str());
}

}  // namespace keyorder
