#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace ltlinfer::detail {

/// Tarjan's algorithm without recursion. `succ(v)` must return a range of
/// vertex ids; `active(v)` filters the vertex set. Returns the component id
/// of every vertex (-1 for inactive ones) and the number of components.
template <typename Succ, typename Active>
std::pair<std::vector<int>, int> scc(int n, Succ&& succ, Active&& active) {
  std::vector<int> comp(n, -1), index(n, -1), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  int counter = 0, ncomp = 0;

  struct Frame {
    int v;
    std::vector<int> next;
    std::size_t pos;
  };
  std::vector<Frame> frames;

  for (int root = 0; root < n; ++root) {
    if (!active(root) || index[root] >= 0) continue;
    auto open = [&](int v) {
      index[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack[v] = 1;
      std::vector<int> next;
      for (int w : succ(v)) {
        if (active(w)) next.push_back(w);
      }
      frames.push_back({v, std::move(next), 0});
    };
    open(root);
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.pos < f.next.size()) {
        int w = f.next[f.pos++];
        if (index[w] < 0) {
          open(w);
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      int v = f.v;
      if (low[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = ncomp;
        } while (w != v);
        ++ncomp;
      }
      frames.pop_back();
      if (!frames.empty()) {
        int parent = frames.back().v;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  return {std::move(comp), ncomp};
}

}  // namespace ltlinfer::detail
