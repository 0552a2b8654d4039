// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference implementations in long double, written without
// the engine's helpers.
#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace canweave::oracle {

using Matrix = std::vector<std::vector<long double>>;

struct CmmLists {
  std::vector<std::string> positive;
  std::vector<std::string> negative;
};

/// Counts token occurrences per class, then repeatedly takes the best
/// remaining word: highest (pos+1)/(neg+1) for the positive list, lowest for
/// the negative list, alphabetical on ties.
inline CmmLists source_cmm(const std::vector<std::pair<int, std::vector<std::string>>> &docs, std::size_t m) {
  std::map<std::string, std::pair<long long, long long>> counts;  // word -> (neg, pos)
  for (const auto &[label, tokens] : docs)
    for (const auto &t : tokens) (label == 1 ? counts[t].second : counts[t].first) += 1;
  auto pick = [&](bool positive) {
    std::vector<std::string> chosen;
    std::map<std::string, bool> used;
    for (std::size_t r = 0; r < m; ++r) {
      const std::string *best = nullptr;
      long long bp = 0, bn = 0;
      for (const auto &[word, c] : counts) {  // std::map iterates alphabetically
        if (used[word]) continue;
        const long long p = c.second + 1, n = c.first + 1;
        if (!best) {
          best = &word, bp = p, bn = n;
          continue;
        }
        // p/n vs bp/bn, strictly better only.
        const bool better = positive ? p * bn > bp * n : p * bn < bp * n;
        if (better) best = &word, bp = p, bn = n;
      }
      used[*best] = true;
      chosen.push_back(*best);
    }
    return chosen;
  };
  return {pick(true), pick(false)};
}

inline long double cosine(const std::vector<long double> &a, const std::vector<long double> &b) {
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct Match {
  std::vector<std::size_t> indices;
  std::vector<long double> scores;
};

/// Score of entry m = max over the first valid_len words of cosine; top-k by
/// repeated scans, lower index on ties.
inline Match dynamic_match(const Matrix &words, std::size_t valid_len, const Matrix &memory, std::size_t k) {
  std::vector<long double> score(memory.size());
  for (std::size_t m = 0; m < memory.size(); ++m) {
    long double best = -2;
    for (std::size_t l = 0; l < valid_len; ++l) best = std::max(best, cosine(memory[m], words[l]));
    score[m] = best;
  }
  Match out;
  std::vector<bool> taken(memory.size(), false);
  for (std::size_t r = 0; r < k; ++r) {
    std::size_t arg = memory.size();
    for (std::size_t m = 0; m < memory.size(); ++m)
      if (!taken[m] && (arg == memory.size() || score[m] > score[arg])) arg = m;
    taken[arg] = true;
    out.indices.push_back(arg);
    out.scores.push_back(score[arg]);
  }
  return out;
}

/// softmax_l(q . tanh(W w_l + b)) over the first valid_len words.
inline std::vector<long double> attention(const Matrix &words, std::size_t valid_len, const std::vector<long double> &q,
                                          const Matrix &w, const std::vector<long double> &b) {
  std::vector<long double> logits(valid_len);
  for (std::size_t l = 0; l < valid_len; ++l) {
    long double z = 0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      long double pre = b[j];
      for (std::size_t i = 0; i < q.size(); ++i) pre += w[j][i] * words[l][i];
      z += q[j] * std::tanh(pre);
    }
    logits[l] = z;
  }
  long double top = logits[0];
  for (auto x : logits) top = std::max(top, x);
  long double total = 0;
  for (auto &x : logits) total += (x = std::exp(x - top));
  for (auto &x : logits) x /= total;
  return logits;
}

inline long double mmd(const Matrix &source, const Matrix &target) {
  long double total = 0;
  for (std::size_t i = 0; i < source[0].size(); ++i) {
    long double ms = 0, mt = 0;
    for (const auto &row : source) ms += row[i];
    for (const auto &row : target) mt += row[i];
    const long double diff = ms / source.size() - mt / target.size();
    total += diff * diff;
  }
  return std::sqrt(total);
}

inline long double sym_kl(const std::vector<long double> &p, const std::vector<long double> &q) {
  long double kl = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    kl += p[i] * (std::log(p[i] + 1e-8L) - std::log(q[i] + 1e-8L)) + q[i] * (std::log(q[i] + 1e-8L) - std::log(p[i] + 1e-8L));
  return kl;
}

/// Masses are per-sample summed attention (total K each); normalized by K,
/// symKL clipped at 10, negated mean per domain, domains added.
inline long double distribution_loss(const std::vector<std::pair<std::vector<long double>, std::vector<long double>>> &src,
                                     const std::vector<std::pair<std::vector<long double>, std::vector<long double>>> &tgt,
                                     std::size_t k) {
  auto domain = [&](const auto &samples) -> long double {
    if (samples.empty()) return 0;
    long double total = 0;
    for (const auto &[pos, neg] : samples) {
      std::vector<long double> p = pos, q = neg;
      for (auto &x : p) x /= k;
      for (auto &x : q) x /= k;
      total += std::min<long double>(sym_kl(p, q), 10);
    }
    return -total / samples.size();
  };
  return domain(src) + domain(tgt);
}

}  // namespace canweave::oracle
