#pragma once
// Brute-force reference implementations. They are written from the formulas
// directly and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace oracle {

// 'C' consistent, 'X' contradictory, 'M' missing.
inline double recall(const std::string& verdicts) {
  if (verdicts.empty()) return 0.0;
  long double hit = 0;
  for (char v : verdicts) hit += (v == 'C') ? 1 : 0;
  return static_cast<double>(hit / static_cast<long double>(verdicts.size()));
}

inline double precision(const std::string& verdicts) {
  long double c = 0, answered = 0;
  for (char v : verdicts) {
    if (v == 'C') c += 1;
    if (v == 'C' || v == 'X') answered += 1;
  }
  return answered == 0 ? 0.0 : static_cast<double>(c / answered);
}

inline double checklist(double r, double p) {
  return static_cast<double>((static_cast<long double>(r) + 2.0L * p) / 3.0L);
}

inline double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  long double s = 0;
  for (double x : xs) s += x;
  return static_cast<double>(s / xs.size());
}

// Written as "fraction of the ramp covered", from the knots.
inline double length_penalty(std::size_t len, std::size_t lm, std::size_t lc) {
  const long double lo = static_cast<long double>(lm) - static_cast<long double>(lc);
  const long double hi = lm;
  const long double x = len;
  if (x <= lo) return 0.0;
  if (x > hi) return -1.0;
  return static_cast<double>(-(x - lo) / (hi - lo));
}

inline double fact(double r, double p, double t, double k, double l, double m) {
  return static_cast<double>(static_cast<long double>(k) * r +
                             static_cast<long double>(l) * p +
                             static_cast<long double>(m) * t);
}

inline std::vector<double> advantages(const std::vector<double>& rewards) {
  const long double n = rewards.size();
  long double mu = 0;
  for (double r : rewards) mu += r;
  mu /= n;
  long double var = 0;
  for (double r : rewards) var += (r - mu) * (r - mu);
  const long double sd = std::sqrt(var / n);
  std::vector<double> out;
  for (double r : rewards) out.push_back(sd < 1e-12L ? 0.0 : static_cast<double>((r - mu) / sd));
  return out;
}

inline std::vector<double> softmax(const std::vector<double>& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  long double z = 0;
  for (double x : logits) z += std::exp(static_cast<long double>(x - mx));
  std::vector<double> p;
  for (double x : logits) p.push_back(static_cast<double>(std::exp(static_cast<long double>(x - mx)) / z));
  return p;
}

inline double kl(const std::vector<double>& logits_p, const std::vector<double>& logits_q) {
  const auto p = softmax(logits_p);
  const auto q = softmax(logits_q);
  long double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0) s += p[i] * (std::log(static_cast<long double>(p[i])) - std::log(static_cast<long double>(q[i])));
  }
  return static_cast<double>(s);
}

// Clipped surrogate for one group, straight from the definition.
// logits: [positions][vocab]; responses are token id sequences.
struct ObjectiveInput {
  std::vector<std::vector<double>> logits;
  std::vector<std::vector<double>> ref_logits;
  std::vector<std::vector<std::size_t>> responses;
  std::vector<std::vector<double>> old_logps;
  std::vector<double> advantages;
  double epsilon = 0.2;
  double beta = 0.0;
};

inline double objective(const ObjectiveInput& in) {
  long double total = 0;
  for (std::size_t i = 0; i < in.responses.size(); ++i) {
    const auto& seq = in.responses[i];
    long double per = 0;
    for (std::size_t t = 0; t < seq.size(); ++t) {
      const auto p = softmax(in.logits[t]);
      const double ratio = std::exp(std::log(p[seq[t]]) - in.old_logps[i][t]);
      const double a = in.advantages[i];
      const double clipped = std::clamp(ratio, 1 - in.epsilon, 1 + in.epsilon);
      const double surrogate = std::min(ratio * a, clipped * a);
      per += surrogate - in.beta * kl(in.logits[t], in.ref_logits[t]);
    }
    total += per / seq.size();
  }
  return static_cast<double>(total / in.responses.size());
}

struct Counts {
  std::size_t s = 0;
  std::size_t n = 0;
};

// Closed forms: uncapped recall gives 2S/(S+N+K); capped gives 2P/(P+1).
inline double f1_at_k(Counts c, std::size_t k) {
  if (c.s == 0) return 0.0;
  if (c.s < k) return 2.0 * c.s / static_cast<double>(c.s + c.n + k);
  const double p = static_cast<double>(c.s) / (c.s + c.n);
  return 2.0 * p / (p + 1.0);
}

}  // namespace oracle
