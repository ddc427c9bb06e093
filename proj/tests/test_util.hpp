#pragma once

#include <random>
#include <vector>

#include "ck/linalg.hpp"

namespace ck::testutil {

/// Deterministic pseudo-random source for property tests.
class Rng {
 public:
  explicit Rng(unsigned seed = 20260826u) : m_gen(seed) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(m_gen); }

  Rat rational(int num_range = 3, int max_den = 3) {
    return Rat(uniform(-num_range, num_range), uniform(1, max_den));
  }

  TrigPoly trig(int m, int max_terms = 3, int max_freq = 1) {
    TrigPoly f(m);
    int nterms = uniform(0, max_terms);
    for (int t = 0; t < nterms; ++t) {
      std::vector<int> k(m);
      for (int i = 0; i < m; ++i) k[i] = uniform(-max_freq, max_freq);
      f.add_term(uniform(0, 1) == 1, std::move(k), rational());
    }
    return f;
  }

  std::vector<TrigPoly> section(int rank, int m, int max_terms = 2, int max_freq = 1) {
    std::vector<TrigPoly> out;
    out.reserve(rank);
    for (int i = 0; i < rank; ++i) out.push_back(trig(m, max_terms, max_freq));
    return out;
  }

 private:
  std::mt19937 m_gen;
};

}  // namespace ck::testutil
