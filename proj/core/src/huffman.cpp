#include "osoa/huffman.hpp"

#include <algorithm>
#include <queue>

namespace osoa {

HuffmanCodebook HuffmanCodebook::build(const Pmf& pmf) {
  const std::size_t n = pmf.size();
  if (n < 2) throw FormatError("huffman needs at least 2 symbols");

  HuffmanCodebook cb;
  cb.nodes_.reserve(2 * n - 1);
  for (std::size_t i = 0; i < n; ++i)
    cb.nodes_.push_back(Node{-1, -1, static_cast<Symbol>(i)});

  struct Entry {
    double prob;
    int seq;   // creation order; leaves are 0..n-1
    int node;
  };
  auto later = [](const Entry& a, const Entry& b) {
    if (a.prob != b.prob) return a.prob > b.prob;
    return a.seq > b.seq;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(later)> heap(later);
  for (std::size_t i = 0; i < n; ++i)
    heap.push(Entry{pmf[i], static_cast<int>(i), static_cast<int>(i)});

  int next_seq = static_cast<int>(n);
  while (heap.size() > 1) {
    Entry first = heap.top();
    heap.pop();
    Entry second = heap.top();
    heap.pop();
    // first is the less probable (or the earlier-created on a tie, which
    // then goes left instead).
    int left, right;
    if (first.prob == second.prob) {
      left = first.node;
      right = second.node;
    } else {
      left = second.node;
      right = first.node;
    }
    cb.nodes_.push_back(Node{left, right, 0});
    heap.push(Entry{first.prob + second.prob, next_seq++,
                    static_cast<int>(cb.nodes_.size()) - 1});
  }

  cb.codes_.assign(n, {});
  struct Frame {
    int node;
    std::string prefix;
  };
  std::vector<Frame> stack{{static_cast<int>(cb.nodes_.size()) - 1, ""}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const Node& node = cb.nodes_[f.node];
    if (node.left < 0) {
      cb.codes_[node.symbol] = std::move(f.prefix);
      continue;
    }
    stack.push_back({node.right, f.prefix + "1"});
    stack.push_back({node.left, f.prefix + "0"});
  }
  return cb;
}

std::string HuffmanCodebook::encode(std::span<const Symbol> syms) const {
  std::string out;
  for (Symbol s : syms) {
    if (s >= codes_.size()) throw FormatError("symbol outside alphabet");
    out += codes_[s];
  }
  return out;
}

std::vector<Symbol> HuffmanCodebook::decode(const std::string& bits) const {
  std::vector<Symbol> out;
  const int root = static_cast<int>(nodes_.size()) - 1;
  int node = root;
  for (char c : bits) {
    if (c != '0' && c != '1') throw FormatError("bit string contains non-bit");
    node = (c == '0') ? nodes_[node].left : nodes_[node].right;
    if (nodes_[node].left < 0) {
      out.push_back(nodes_[node].symbol);
      node = root;
    }
  }
  if (node != root) throw FormatError("trailing bits form no complete codeword");
  return out;
}

double HuffmanCodebook::expected_length(const Pmf& pmf) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < codes_.size(); ++i)
    sum += pmf[i] * static_cast<double>(codes_[i].size());
  return sum;
}

}  // namespace osoa
