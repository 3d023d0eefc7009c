#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "liangyi/errors.hpp"
#include "liangyi/random.hpp"
#include "liangyi/solver/candidates.hpp"
#include "liangyi/solver/config.hpp"
#include "liangyi/solver/tour.hpp"
#include "liangyi/tsp/instance.hpp"

namespace liangyi {

// Solver run limit. In steps mode a step is one candidate exchange evaluated
// by the local search, counted across the initial descent and every
// perturb-and-reoptimize link; wall_clock mode checks elapsed time before
// each improvement attempt instead.
struct Budget {
  enum class Mode { steps, wall_clock };
  Mode mode = Mode::steps;
  int steps = 150;
  double seconds = 0.1;

  static Budget of_steps(int s) { return Budget{Mode::steps, s, 0.0}; }
  static Budget of_seconds(double t) { return Budget{Mode::wall_clock, 0, t}; }

  void validate() const {
    if (mode == Mode::steps && steps <= 0)
      throw ValidationError("budget: steps must be positive");
    if (mode == Mode::wall_clock && !(seconds > 0))
      throw ValidationError("budget: seconds must be positive");
  }

  std::string to_string() const {
    return mode == Mode::steps ? "steps:" + std::to_string(steps)
                               : "seconds:" + std::to_string(seconds);
  }

  friend bool operator==(const Budget&, const Budget&) = default;
};

namespace detail {

// Gains must exceed this fraction of the current tour length; summed
// distances on a 10^6 grid carry rounding noise far above an absolute 1e-12.
inline constexpr double kGainEpsilon = 1e-12;

// Hilbert-curve index of (x, y) on a 2^16 x 2^16 lattice.
inline std::uint64_t hilbert_index(std::uint32_t x, std::uint32_t y) {
  constexpr std::uint32_t side = 1u << 16;
  std::uint64_t d = 0;
  for (std::uint32_t s = side / 2; s > 0; s /= 2) {
    const std::uint32_t rx = (x & s) ? 1 : 0;
    const std::uint32_t ry = (y & s) ? 1 : 0;
    d += static_cast<std::uint64_t>(s) * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        x = side - 1 - x;
        y = side - 1 - y;
      }
      std::swap(x, y);
    }
  }
  return d;
}

inline std::vector<int> random_permutation_tour(int n, Rng& rng) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(order[i], order[uniform_below(rng, static_cast<std::uint64_t>(i) + 1)]);
  return order;
}

inline std::vector<int> nearest_neighbor_tour(const TspInstance& ins, Rng& rng) {
  const int n = ins.n();
  std::vector<char> used(n, 0);
  std::vector<int> order;
  order.reserve(n);
  int cur = static_cast<int>(uniform_below(rng, n));
  used[cur] = 1;
  order.push_back(cur);
  while (static_cast<int>(order.size()) < n) {
    int best = -1;
    double best_d = 0.0;
    for (int c = 0; c < n; ++c) {
      if (used[c]) continue;
      const double d = ins.dist(cur, c);
      if (best < 0 || d < best_d) {
        best = c;
        best_d = d;
      }
    }
    used[best] = 1;
    order.push_back(best);
    cur = best;
  }
  return order;
}

inline std::vector<int> greedy_edge_tour(const TspInstance& ins) {
  const int n = ins.n();
  struct Edge {
    double d;
    int a, b;
  };
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) edges.push_back({ins.dist(a, b), a, b});
  std::sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) {
    if (l.d != r.d) return l.d < r.d;
    if (l.a != r.a) return l.a < r.a;
    return l.b < r.b;
  });
  std::vector<int> parent(n), degree(n, 0);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<std::vector<int>> adj(n);
  int added = 0;
  for (const Edge& e : edges) {
    if (added == n - 1) break;
    if (degree[e.a] >= 2 || degree[e.b] >= 2) continue;
    const int ra = find(e.a), rb = find(e.b);
    if (ra == rb) continue;
    parent[ra] = rb;
    ++degree[e.a];
    ++degree[e.b];
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
    ++added;
  }
  // The edges form one Hamiltonian path; walk it from an endpoint.
  int start = 0;
  while (degree[start] != 1) ++start;
  std::vector<int> order;
  order.reserve(n);
  int prev = -1, cur = start;
  while (cur >= 0) {
    order.push_back(cur);
    int next = -1;
    for (int v : adj[cur])
      if (v != prev) next = v;
    prev = cur;
    cur = next;
  }
  return order;
}

inline std::vector<int> space_filling_curve_tour(const TspInstance& ins) {
  const int n = ins.n();
  std::vector<std::uint64_t> key(n);
  const double scale = 65536.0 / static_cast<double>(ins.grid);
  for (int c = 0; c < n; ++c) {
    const auto x = static_cast<std::uint32_t>(std::min(65535.0, ins.cities[c].x * scale));
    const auto y = static_cast<std::uint32_t>(std::min(65535.0, ins.cities[c].y * scale));
    key[c] = hilbert_index(x, y);
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });
  return order;
}

// Three distinct cut points in [1, n-1], ascending.
inline std::array<int, 3> three_cuts(int n, Rng& rng) {
  std::array<int, 3> cut{};
  for (int i = 0; i < 3; ++i) {
    bool fresh;
    do {
      cut[i] = uniform_int(rng, 1, n - 1);
      fresh = true;
      for (int j = 0; j < i; ++j) fresh = fresh && cut[j] != cut[i];
    } while (!fresh);
  }
  std::sort(cut.begin(), cut.end());
  return cut;
}

// A B C D -> A C B D with B = [a, b), C = [b, c).
inline void apply_double_bridge(std::vector<int>& order, int a, int b, int c) {
  std::rotate(order.begin() + a, order.begin() + b, order.begin() + c);
}

inline void perturb(std::vector<int>& order, Perturbation kind, Rng& rng) {
  const int n = static_cast<int>(order.size());
  switch (kind) {
    case Perturbation::double_bridge: {
      auto cut = three_cuts(n, rng);
      apply_double_bridge(order, cut[0], cut[1], cut[2]);
      break;
    }
    case Perturbation::segment_reversal: {
      const int start = uniform_int(rng, 0, n - 1);
      const int len = uniform_int(rng, 2, std::max(2, n - 2));
      for (int i = 0, j = len - 1; i < j; ++i, --j)
        std::swap(order[(start + i) % n], order[(start + j) % n]);
      break;
    }
    case Perturbation::three_city_exchange: {
      auto pos = three_cuts(n + 1, rng);  // distinct values in [1, n]
      const int p = pos[0] - 1, q = pos[1] - 1, r = pos[2] - 1;
      const int a = order[p], b = order[q], c = order[r];
      order[p] = c;
      order[q] = a;
      order[r] = b;
      break;
    }
    case Perturbation::segment_double_bridge: {
      const int max_len = std::max(1, std::min(3, (n - 1) / 3));
      const int l1 = uniform_int(rng, 1, max_len);
      const int l2 = uniform_int(rng, 1, max_len);
      const int l3 = uniform_int(rng, 1, max_len);
      const int start = uniform_int(rng, 0, n - 1);
      std::rotate(order.begin(), order.begin() + start, order.end());
      apply_double_bridge(order, l1, l1 + l2, l1 + l2 + l3);
      break;
    }
  }
}

// Lin-Kernighan style improvement by chains of sequential 2-opt flips.
// Starting from edge (t1, t2) the search adds (t2, t3), removes (t3, t4) and
// closes with (t4, t1); while the closed tour is not shorter it continues from
// t4 up to `depth` flips, retrying `breadth[level]` alternatives on the way.
class LocalSearch {
 public:
  LocalSearch(const TspInstance& ins, const CandidateLists& cands, const SolverConfig& cfg)
      : ins_(ins),
        cands_(cands),
        n_(ins.n()),
        depth_(cfg.search_depth()),
        width_(cfg.search_width()),
        breadth_(backtrack_breadths(cfg.backtrack_index())),
        pos_(n_) {}

  // Runs improvement attempts until a local optimum is reached (returns
  // true), the total work reaches `work_limit`, or `out_of_time()` holds
  // before an attempt. An attempt cut off by the work limit is rolled back.
  template <typename Clock>
  bool optimize(std::vector<int>& order, long long work_limit, Clock&& out_of_time) {
    order_ = &order;
    limit_ = work_limit;
    aborted_ = false;
    for (int i = 0; i < n_; ++i) pos_[order[i]] = i;
    eps_ = kGainEpsilon * std::max(1.0, tour_length(ins_, order));
    std::deque<int> queue(order.begin(), order.end());
    std::vector<char> queued(n_, 1);
    while (!queue.empty()) {
      if (out_of_time()) {
        order_ = nullptr;
        return false;
      }
      const int t1 = queue.front();
      queue.pop_front();
      queued[t1] = 0;
      for (bool forward : {true, false}) {
        touched_.clear();
        const bool improved = improve_from(t1, forward);
        if (aborted_) {
          order_ = nullptr;
          return false;
        }
        if (improved) {
          touched_.push_back(t1);
          for (int c : touched_)
            if (!queued[c]) {
              queued[c] = 1;
              queue.push_back(c);
            }
          break;
        }
      }
    }
    order_ = nullptr;
    return true;
  }

  long long work() const { return work_; }

 private:
  struct Alternative {
    int t3, t4;
    double gain;
  };

  int succ(int c, bool fwd) const {
    const int p = pos_[c];
    return (*order_)[fwd ? (p + 1 == n_ ? 0 : p + 1) : (p == 0 ? n_ - 1 : p - 1)];
  }

  // Reverses the path from `from` to `to` walked in the given orientation.
  void reverse_path(int from, int to, bool fwd) {
    int i = pos_[fwd ? from : to];
    int j = pos_[fwd ? to : from];
    int len = (j - i + n_) % n_ + 1;
    auto& ord = *order_;
    for (int s = 0; s < len / 2; ++s) {
      std::swap(ord[i], ord[j]);
      pos_[ord[i]] = i;
      pos_[ord[j]] = j;
      i = (i + 1 == n_) ? 0 : i + 1;
      j = (j == 0) ? n_ - 1 : j - 1;
    }
  }

  bool improve_from(int t1, bool fwd) {
    const int t2 = succ(t1, fwd);
    return step(0, t1, t2, ins_.dist(t1, t2), fwd);
  }

  bool step(int level, int t1, int t2, double open_gain, bool fwd) {
    std::vector<Alternative> alts;
    const auto& near = cands_.near[t2];
    const int scan = std::min<int>(width_, static_cast<int>(near.size()));
    const int t2_next = succ(t2, fwd);
    for (int i = 0; i < scan; ++i) {
      if (work_ >= limit_) {
        aborted_ = true;
        return false;
      }
      ++work_;
      const int t3 = near[i];
      if (t3 == t1 || t3 == t2_next) continue;
      const double g1 = open_gain - ins_.dist(t2, t3);
      if (g1 <= eps_) continue;
      const int t4 = succ(t3, !fwd);
      alts.push_back({t3, t4, g1 + ins_.dist(t3, t4)});
    }
    std::stable_sort(alts.begin(), alts.end(),
                     [](const Alternative& a, const Alternative& b) { return a.gain > b.gain; });
    const int breadth =
        level < static_cast<int>(breadth_.size()) ? breadth_[level] : 1;
    const int tries = std::min<int>(breadth, static_cast<int>(alts.size()));
    for (int a = 0; a < tries; ++a) {
      const Alternative alt = alts[a];
      reverse_path(t2, alt.t4, fwd);
      if (alt.gain - ins_.dist(alt.t4, t1) > eps_) {
        touched_.insert(touched_.end(), {t2, alt.t3, alt.t4});
        return true;
      }
      if (level + 1 < depth_ && step(level + 1, t1, alt.t4, alt.gain, fwd)) {
        touched_.insert(touched_.end(), {t2, alt.t3, alt.t4});
        return true;
      }
      reverse_path(alt.t4, t2, fwd);
      if (aborted_) return false;
    }
    return false;
  }

  const TspInstance& ins_;
  const CandidateLists& cands_;
  int n_;
  int depth_;
  int width_;
  const std::vector<int>& breadth_;
  std::vector<int>* order_ = nullptr;
  double eps_ = kGainEpsilon;
  long long work_ = 0;
  long long limit_ = 0;
  bool aborted_ = false;
  std::vector<int> pos_;
  std::vector<int> touched_;
};

inline std::vector<int> initial_tour(const TspInstance& ins, InitStrategy init, Rng& rng) {
  switch (init) {
    case InitStrategy::random_permutation: return random_permutation_tour(ins.n(), rng);
    case InitStrategy::nearest_neighbor: return nearest_neighbor_tour(ins, rng);
    case InitStrategy::greedy_edge: return greedy_edge_tour(ins);
    case InitStrategy::space_filling_curve: return space_filling_curve_tour(ins);
  }
  return random_permutation_tour(ins.n(), rng);
}

}  // namespace detail

// Diagnostics of one solve call.
struct SolveTrace {
  double initial_length = 0.0;
  int kicks = 0;
  long long work = 0;
};

// Chained local search. Deterministic in (cfg, ins, seed) under a steps
// budget; a budget of s + 1 steps replays the first s steps exactly.
inline Tour solve(const SolverConfig& cfg, const TspInstance& ins, std::uint64_t seed,
                  const Budget& budget, const CandidateLists& cands, SolveTrace* trace = nullptr) {
  if (ins.n() < 4) throw StructuralError("solve: need at least 4 cities, got " + std::to_string(ins.n()));
  cfg.validate();
  budget.validate();
  Rng rng = make_rng(seed);
  const auto started = std::chrono::steady_clock::now();

  std::vector<int> current = detail::initial_tour(ins, cfg.init(), rng);
  double best_len = tour_length(ins, current);
  if (trace) trace->initial_length = best_len;
  std::vector<int> best = current;
  detail::LocalSearch ls(ins, cands, cfg);

  const bool by_steps = budget.mode == Budget::Mode::steps;
  const long long work_limit = by_steps ? budget.steps : std::numeric_limits<long long>::max();
  auto out_of_time = [&] {
    if (by_steps) return false;
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
    return elapsed.count() >= budget.seconds;
  };
  int kicks = 0;
  for (;;) {
    const bool converged = ls.optimize(current, work_limit, out_of_time);
    const double len = tour_length(ins, current);
    if (len < best_len) {
      best = current;
      best_len = len;
    }
    if (!converged || ls.work() >= work_limit || out_of_time()) break;
    current = best;
    detail::perturb(current, cfg.perturbation(), rng);
    ++kicks;
  }
  if (trace) {
    trace->kicks = kicks;
    trace->work = ls.work();
  }
  return Tour{std::move(best), best_len};
}

inline Tour solve(const SolverConfig& cfg, const TspInstance& ins, std::uint64_t seed,
                  const Budget& budget) {
  if (ins.n() < 4) throw StructuralError("solve: need at least 4 cities, got " + std::to_string(ins.n()));
  return solve(cfg, ins, seed, budget, CandidateLists::build(ins));
}

}  // namespace liangyi
