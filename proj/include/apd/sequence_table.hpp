#pragma once

#include <cstddef>
#include <map>

#include "apd/core.hpp"

namespace apd {

/// Probability table over token sequences of length at most `horizon`
/// drawn from a vocabulary of `vocab_size` tokens. Absent sequences have
/// probability zero. Two tables are comparable only over the same space.
class SequenceTable {
 public:
  SequenceTable(std::size_t vocab_size, std::size_t horizon)
      : vocab_size_(vocab_size), horizon_(horizon) {}

  std::size_t vocab_size() const noexcept { return vocab_size_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// Adds `mass` to `seq` (entries are created on first use).
  void add(const Sequence& seq, double mass);
  double prob(const Sequence& seq) const;
  double total() const noexcept;

  const std::map<Sequence, double>& entries() const noexcept { return entries_; }

  bool same_space(const SequenceTable& other) const noexcept {
    return vocab_size_ == other.vocab_size_ && horizon_ == other.horizon_;
  }

  /// Keeps the first `length` tokens of every sequence, then cuts each one
  /// after its first `eos` token (if given). Masses of colliding sequences add.
  SequenceTable pushforward(std::size_t length, std::optional<TokenId> eos) const;

 private:
  std::size_t vocab_size_;
  std::size_t horizon_;
  std::map<Sequence, double> entries_;
};

/// Cuts `tokens` just after the first occurrence of `eos`.
void truncate_at_eos(Sequence& tokens, std::optional<TokenId> eos);

}  // namespace apd
