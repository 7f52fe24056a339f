#pragma once

#include <cstddef>
#include <vector>

#include "bpdo/common.hpp"

namespace bpdo::par {

int thread_count();
void set_thread_count(int t);

// Work scheduling granularity for blocked reductions.  The block layout is a
// function of the element count only, so sums are bit-identical for every
// thread count, and the serial path produces the same bits as the parallel
// one.
inline constexpr std::size_t kBlock = 4096;

namespace detail {
// Combine partials by halving passes over adjacent pairs: a fixed tree whose
// shape depends only on the partial count.
template <class T>
T tree_combine(std::vector<T>& parts) {
  if (parts.empty()) return T{};
  std::size_t len = parts.size();
  while (len > 1) {
    std::size_t half = (len + 1) / 2;
    for (std::size_t i = 0; i + half < len; ++i) parts[i] += parts[i + half];
    len = half;
  }
  return parts[0];
}
}  // namespace detail

void run_blocks(std::size_t nblocks, bool parallel, void* ctx,
                void (*body)(void*, std::size_t));

template <class T, class F>
T block_sum(std::size_t count, F&& term, bool parallel = true) {
  if (count == 0) return T{};
  std::size_t nblocks = (count + kBlock - 1) / kBlock;
  std::vector<T> parts(nblocks, T{});
  struct Ctx {
    std::size_t count;
    std::vector<T>* parts;
    F* term;
  } ctx{count, &parts, &term};
  run_blocks(
      nblocks, parallel, &ctx, +[](void* p, std::size_t b) {
        auto& c = *static_cast<Ctx*>(p);
        std::size_t lo = b * kBlock;
        std::size_t hi = lo + kBlock < c.count ? lo + kBlock : c.count;
        T acc{};
        for (std::size_t i = lo; i < hi; ++i) acc += (*c.term)(i);
        (*c.parts)[b] = acc;
      });
  return detail::tree_combine(parts);
}

// Parallel loop over independent items; each item is touched exactly once.
template <class F>
void for_each(std::size_t count, F&& body, bool parallel = true) {
  if (count == 0) return;
  struct Ctx {
    F* body;
  } ctx{&body};
  run_blocks(
      count, parallel, &ctx,
      +[](void* p, std::size_t i) { (*static_cast<Ctx*>(p)->body)(i); });
}

// Max of nonnegative terms; associative and exact, so plain reduction order
// does not matter.
template <class F>
double max_term(std::size_t count, F&& term, bool parallel = true) {
  if (count == 0) return 0.0;
  std::size_t nblocks = (count + kBlock - 1) / kBlock;
  std::vector<double> parts(nblocks, 0.0);
  struct Ctx {
    std::size_t count;
    std::vector<double>* parts;
    F* term;
  } ctx{count, &parts, &term};
  run_blocks(
      nblocks, parallel, &ctx, +[](void* p, std::size_t b) {
        auto& c = *static_cast<Ctx*>(p);
        std::size_t lo = b * kBlock;
        std::size_t hi = lo + kBlock < c.count ? lo + kBlock : c.count;
        double m = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
          double v = (*c.term)(i);
          if (v > m) m = v;
        }
        (*c.parts)[b] = m;
      });
  double m = 0.0;
  for (double v : parts)
    if (v > m) m = v;
  return m;
}

}  // namespace bpdo::par
