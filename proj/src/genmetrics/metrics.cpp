#include "sentiaug/genmetrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "sentiaug/corpus/vocab.hpp"
#include "sentiaug/numerics/tensor.hpp"
#include "sentiaug/numerics/random.hpp"

namespace sentiaug::metrics {

namespace {

using NgramCounts = std::unordered_map<std::string, int>;

std::string ngram_key(const Sequence& s, std::size_t start, std::size_t n) {
  std::string key(n * sizeof(int), '\0');
  std::memcpy(key.data(), s.data() + start, n * sizeof(int));
  return key;
}

NgramCounts count_ngrams(const Sequence& s, std::size_t n) {
  NgramCounts out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++out[ngram_key(s, i, n)];
  return out;
}

}  // namespace

BleuConfig BleuConfig::preset(std::size_t n) {
  if (n < 2 || n > 5) throw std::invalid_argument("BLEU preset must be 2..5, got " + std::to_string(n));
  BleuConfig c;
  c.max_n = n;
  return c;
}

void BleuConfig::validate() const {
  if (max_n < 1) throw std::invalid_argument("BleuConfig: max_n must be at least 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("BleuConfig: epsilon must be positive");
}

BleuDetail bleu_detail(const std::vector<Sequence>& references, const std::vector<Sequence>& hypotheses,
                       const BleuConfig& config) {
  config.validate();
  if (hypotheses.empty()) throw std::invalid_argument("bleu: empty hypothesis list");
  if (references.empty()) throw std::invalid_argument("bleu: empty reference set");
  const std::size_t N = config.max_n;

  std::vector<NgramCounts> max_ref(N);
  for (const auto& r : references) {
    for (std::size_t n = 1; n <= N; ++n) {
      for (const auto& [key, c] : count_ngrams(r, n)) {
        int& slot = max_ref[n - 1][key];
        slot = std::max(slot, c);
      }
    }
  }
  std::vector<std::size_t> ref_lens;
  for (const auto& r : references) ref_lens.push_back(r.size());
  std::sort(ref_lens.begin(), ref_lens.end());

  BleuDetail d;
  d.matches.assign(N, 0.0);
  d.totals.assign(N, 0.0);
  for (const auto& h : hypotheses) {
    const std::size_t c = h.size();
    d.hyp_length += static_cast<double>(c);
    auto it = std::lower_bound(ref_lens.begin(), ref_lens.end(), c);
    std::size_t best;
    if (it == ref_lens.end()) {
      best = ref_lens.back();
    } else if (*it == c || it == ref_lens.begin()) {
      best = *it;
    } else {
      const std::size_t above = *it, below = *(it - 1);
      best = (c - below <= above - c) ? below : above;
    }
    d.ref_length += static_cast<double>(best);
    for (std::size_t n = 1; n <= N; ++n) {
      for (const auto& [key, cnt] : count_ngrams(h, n)) {
        auto ref = max_ref[n - 1].find(key);
        if (ref != max_ref[n - 1].end()) d.matches[n - 1] += std::min(cnt, ref->second);
        d.totals[n - 1] += cnt;
      }
    }
  }

  double log_sum = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    const double m = d.matches[n] > 0.0 ? d.matches[n] : config.epsilon;
    const double t = d.totals[n] > 0.0 ? d.totals[n] : 1.0;
    d.precisions.push_back(m / t);
    log_sum += std::log(m / t);
  }
  if (config.brevity_penalty) {
    d.brevity = d.hyp_length > 0.0 ? std::exp(std::min(0.0, 1.0 - d.ref_length / d.hyp_length)) : 0.0;
  }
  d.score = std::clamp(d.brevity * std::exp(log_sum / static_cast<double>(N)), 0.0, 1.0);
  return d;
}

double bleu(const std::vector<Sequence>& references, const std::vector<Sequence>& hypotheses,
            const BleuConfig& config) {
  return bleu_detail(references, hypotheses, config).score;
}

double bleu(const std::vector<std::vector<std::string>>& references,
            const std::vector<std::vector<std::string>>& hypotheses, const BleuConfig& config) {
  std::unordered_map<std::string, int> ids;
  auto encode = [&](const std::vector<std::vector<std::string>>& in) {
    std::vector<Sequence> out;
    for (const auto& s : in) {
      Sequence seq;
      for (const auto& w : s) seq.push_back(ids.emplace(w, static_cast<int>(ids.size())).first->second);
      out.push_back(std::move(seq));
    }
    return out;
  };
  const auto refs = encode(references);
  return bleu(refs, encode(hypotheses), config);
}

Sequence strip_eos(const Sequence& seq) {
  auto it = std::find(seq.begin(), seq.end(), corpus::kEos);
  return Sequence(seq.begin(), it);
}

double nll_gen(const gan::Generator& gen, int category, const std::vector<Sequence>& sequences,
               std::uint64_t seed) {
  if (sequences.empty()) throw std::invalid_argument("nll_gen: empty sequence slice");
  num::NoGradGuard no_grad;
  double total = 0.0, tokens = 0.0;
  for (std::size_t start = 0, chunk = 0; start < sequences.size(); start += kEvalChunk, ++chunk) {
    const std::size_t end = std::min(sequences.size(), start + kEvalChunk);
    std::vector<Sequence> seqs(sequences.begin() + static_cast<std::ptrdiff_t>(start),
                               sequences.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<std::vector<double>> w;
    for (const auto& s : seqs) {
      if (s.empty()) throw std::invalid_argument("nll_gen: empty sequence");
      w.emplace_back(s.size(), 1.0);
      tokens += static_cast<double>(s.size());
    }
    const std::vector<int> cats(seqs.size(), category);
    total += gen.weighted_nll(cats, seqs, w, gen.init_state(cats, num::derive_seed(seed, chunk))).item();
  }
  return total / tokens;
}

double nll_div(const gan::Generator& gen, int category, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < kMinDivSamples) {
    throw std::invalid_argument("nll_div: needs at least " + std::to_string(kMinDivSamples) + " samples");
  }
  double total = 0.0, tokens = 0.0;
  for (std::size_t done = 0, chunk = 0; done < n_samples; done += kEvalChunk, ++chunk) {
    const std::vector<int> cats(std::min(kEvalChunk, n_samples - done), category);
    for (const auto& s : gen.sample_batch(cats, {gan::SampleMode::multinomial}, num::derive_seed(seed, chunk)).seqs) {
      total -= s.log_prob();
      tokens += static_cast<double>(s.tokens.size());
    }
  }
  return total / tokens;
}

std::vector<Sequence> sample_texts(const gan::Generator& gen, int category, std::size_t n, std::uint64_t seed) {
  std::vector<Sequence> out;
  for (std::size_t done = 0, chunk = 0; done < n; done += kEvalChunk, ++chunk) {
    const std::vector<int> cats(std::min(kEvalChunk, n - done), category);
    for (const auto& s : gen.sample_batch(cats, {gan::SampleMode::multinomial}, num::derive_seed(seed, chunk)).seqs)
      out.push_back(strip_eos(s.tokens));
  }
  return out;
}

}  // namespace sentiaug::metrics
