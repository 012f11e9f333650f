#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <queue>
#include <string>

#include "mdsc/error.hpp"
#include "mdsc/md_empirics.hpp"

namespace mdsc {

std::vector<std::vector<std::uint32_t>> type_class_words(const NType& q) {
  std::vector<std::uint32_t> word;
  for (std::size_t x = 0; x < q.size(); ++x) {
    word.insert(word.end(), static_cast<std::size_t>(q[x]), static_cast<std::uint32_t>(x));
  }
  std::vector<std::vector<std::uint32_t>> out;
  do {
    out.push_back(word);
  } while (std::next_permutation(word.begin(), word.end()));
  return out;
}

namespace {

double word_distortion(const DistortionSpec& d, const std::vector<std::uint32_t>& x,
                       const std::vector<std::uint32_t>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += d(x[i], y[i]);
  return s;
}

std::vector<std::uint32_t> decode_candidate(std::int64_t index, std::size_t n, std::size_t base) {
  std::vector<std::uint32_t> y(n);
  for (std::size_t i = n; i-- > 0;) {
    y[i] = static_cast<std::uint32_t>(index % static_cast<std::int64_t>(base));
    index /= static_cast<std::int64_t>(base);
  }
  return y;
}

}  // namespace

CoverResult greedy_type_cover(const NType& q, const DistortionSpec& d, double distortion,
                              const CoverOptions& options) {
  if (q.size() != d.source_size()) throw DimensionMismatch("type and distortion sizes differ");
  if (!(distortion >= 0.0) || !std::isfinite(distortion)) {
    throw DomainError("distortion level must be finite and >= 0");
  }
  const std::int64_t n = q.n();
  if (n < 1) throw DomainError("blocklength must be >= 1");

  const double class_size = std::round(std::exp(log_multinomial(q.counts())));
  const double candidates =
      std::pow(static_cast<double>(d.reproduction_size()), static_cast<double>(n));
  if (class_size > static_cast<double>(options.class_cap)) {
    throw BudgetExceeded("type class too large", {{"class_size", class_size}});
  }
  if (candidates > static_cast<double>(options.candidate_cap)) {
    throw BudgetExceeded("too many candidate codewords", {{"candidates", candidates}});
  }
  if (class_size * candidates > static_cast<double>(options.work_cap)) {
    throw BudgetExceeded("covering work exceeds the cap",
                         {{"work", class_size * candidates}});
  }

  const auto words = type_class_words(q);
  const std::size_t m = words.size();
  const auto num_candidates = static_cast<std::int64_t>(candidates);
  const double limit = static_cast<double>(n) * distortion;
  const double slack = 1e-9 * std::max(1.0, limit);

  std::vector<std::vector<std::uint32_t>> covers(static_cast<std::size_t>(num_candidates));
  for (std::int64_t c = 0; c < num_candidates; ++c) {
    const auto y = decode_candidate(c, static_cast<std::size_t>(n), d.reproduction_size());
    for (std::size_t w = 0; w < m; ++w) {
      if (word_distortion(d, words[w], y) <= limit + slack) {
        covers[static_cast<std::size_t>(c)].push_back(static_cast<std::uint32_t>(w));
      }
    }
  }

  // Lazy greedy: stored gains only overestimate, so a popped entry whose
  // recomputed gain matches is a true maximizer; equal gains pop by index.
  using Entry = std::pair<std::int64_t, std::int64_t>;  // (gain, -index)
  std::priority_queue<Entry> heap;
  for (std::int64_t c = 0; c < num_candidates; ++c) {
    const auto g = static_cast<std::int64_t>(covers[static_cast<std::size_t>(c)].size());
    if (g > 0) heap.emplace(g, -c);
  }
  std::vector<char> covered(m, 0);
  std::size_t remaining = m;
  CoverResult out;
  out.class_size = static_cast<std::int64_t>(m);
  while (remaining > 0 && !heap.empty()) {
    const auto [stored, neg] = heap.top();
    heap.pop();
    const std::int64_t c = -neg;
    std::int64_t gain = 0;
    for (auto w : covers[static_cast<std::size_t>(c)]) gain += covered[w] ? 0 : 1;
    if (gain == 0) continue;
    if (gain < stored) {
      heap.emplace(gain, neg);
      continue;
    }
    for (auto w : covers[static_cast<std::size_t>(c)]) {
      if (!covered[w]) {
        covered[w] = 1;
        --remaining;
      }
    }
    out.codebook.push_back(decode_candidate(c, static_cast<std::size_t>(n), d.reproduction_size()));
  }

  out.covered = std::all_of(words.begin(), words.end(), [&](const auto& x) {
    return std::any_of(out.codebook.begin(), out.codebook.end(), [&](const auto& y) {
      return word_distortion(d, x, y) <= limit + slack;
    });
  });
  const double nn = static_cast<double>(n);
  out.rate = std::log(static_cast<double>(out.codebook.size())) / nn;
  // R(Q, 0) is reached as the limit from above.
  out.rd_rate = rate_distortion_dms(q.as_pmf(), d, std::max(distortion, 1e-9)).rate;
  out.excess_over_rd = out.rate - out.rd_rate;
  return out;
}

void write_cover_listing(std::ostream& out, const CoverResult& cover) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "# rate=%.17g excess=%.17g\n", cover.rate, cover.excess_over_rd);
  out << buf;
  for (const auto& word : cover.codebook) {
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (i > 0) out << ' ';
      out << word[i];
    }
    out << '\n';
  }
}

}  // namespace mdsc
