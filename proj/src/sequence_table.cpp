#include "apd/sequence_table.hpp"

#include <algorithm>

namespace apd {

void SequenceTable::add(const Sequence& seq, double mass) {
  if (seq.size() > horizon_) throw ValidationError("sequence longer than table horizon");
  for (TokenId t : seq) {
    if (t >= vocab_size_) throw ValidationError("sequence token outside table vocabulary");
  }
  entries_[seq] += mass;
}

double SequenceTable::prob(const Sequence& seq) const {
  auto it = entries_.find(seq);
  return it == entries_.end() ? 0.0 : it->second;
}

double SequenceTable::total() const noexcept {
  double s = 0.0;
  for (const auto& [seq, p] : entries_) s += p;
  return s;
}

SequenceTable SequenceTable::pushforward(std::size_t length, std::optional<TokenId> eos) const {
  SequenceTable out(vocab_size_, std::min(length, horizon_));
  for (const auto& [seq, p] : entries_) {
    Sequence s(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(std::min(length, seq.size())));
    truncate_at_eos(s, eos);
    out.add(s, p);
  }
  return out;
}

void truncate_at_eos(Sequence& tokens, std::optional<TokenId> eos) {
  if (!eos) return;
  auto it = std::find(tokens.begin(), tokens.end(), *eos);
  if (it != tokens.end()) tokens.erase(it + 1, tokens.end());
}

}  // namespace apd
