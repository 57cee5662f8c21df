#pragma once

#include <string>
#include <vector>

#include "osoa/prob.hpp"

namespace osoa {

/// Prefix codebook plus its decode tree. The tree is full (every internal
/// node has two children), so the Kraft sum of the code lengths is exactly 1.
class HuffmanCodebook {
 public:
  /// Builds the tree by repeatedly merging the two least probable nodes.
  /// Selection order: probability ascending, then earlier-created node
  /// (leaves in symbol order precede internal nodes). The strictly less
  /// probable node of a pair becomes the right child; on a probability tie
  /// the earlier-created node goes left. Left edges emit 0, right edges 1.
  static HuffmanCodebook build(const Pmf& pmf);

  const std::string& code(Symbol s) const { return codes_[s]; }
  std::size_t alphabet_size() const { return codes_.size(); }

  std::string encode(std::span<const Symbol> syms) const;

  /// FIFO decode. Throws if the string ends inside a codeword.
  std::vector<Symbol> decode(const std::string& bits) const;

  double expected_length(const Pmf& pmf) const;

 private:
  struct Node {
    int left = -1;
    int right = -1;
    Symbol symbol = 0;  // valid when leaf
  };

  std::vector<std::string> codes_;
  std::vector<Node> nodes_;  // decode tree, root last
};

}  // namespace osoa
