#include "betadim/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <random>

namespace betadim::kernels {

int max_threads() { return omp_get_max_threads(); }

namespace {

using Mask = std::array<bool, 256>;

Mask make_mask(std::span<const Digit> run_digits) {
  Mask m{};
  for (Digit d : run_digits) m[d] = true;
  return m;
}

// Runs whose first digit lies in [lo, hi), scanning past hi to close them.
template <class Sink>
void scan_range(std::span<const Digit> w, const Mask& mask, std::size_t lo, std::size_t hi, Sink&& sink) {
  const std::size_t n = w.size();
  std::size_t i = std::max<std::size_t>(lo, 1);
  // A block that started before i belongs to the previous shard, or is the
  // unbounded leading block.
  if (i < hi && mask[w[i]] && w[i - 1] == w[i]) {
    const Digit d = w[i];
    while (i < hi && w[i] == d) ++i;
  }
  while (i < hi) {
    const Digit d = w[i];
    if (!mask[d]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && w[j] == d) ++j;
    // 0-based i is 1-based position i + 1; the left neighbour is position i.
    RawRun r{static_cast<std::int64_t>(i), static_cast<std::int64_t>(j + 1), d, j < n};
    sink(r);
    i = j;
  }
}

struct RecordSink {
  std::vector<RawRun>* out;
  std::int64_t best = 0;
  void operator()(const RawRun& r) {
    if (!r.complete) {
      out->push_back(r);
      return;
    }
    if (r.interior() >= best) {
      best = r.interior();
      out->push_back(r);
    }
  }
};

// Keeps global records across shards: a shard-local record is global iff it
// is at least the maximum of everything before it.
std::vector<RawRun> stitch_records(const std::vector<std::vector<RawRun>>& shards) {
  std::vector<RawRun> out;
  std::int64_t best = 0;
  for (const auto& shard : shards) {
    for (const auto& r : shard) {
      if (!r.complete) {
        out.push_back(r);
        continue;
      }
      if (r.interior() >= best) {
        best = r.interior();
        out.push_back(r);
      }
    }
  }
  return out;
}

}  // namespace

std::vector<RawRun> scan_runs_serial(std::span<const Digit> w, std::span<const Digit> run_digits, ScanMode mode) {
  const Mask mask = make_mask(run_digits);
  std::vector<RawRun> out;
  if (mode == ScanMode::All) {
    scan_range(w, mask, 0, w.size(), [&](const RawRun& r) { out.push_back(r); });
  } else {
    RecordSink sink{&out};
    scan_range(w, mask, 0, w.size(), sink);
  }
  return out;
}

std::vector<RawRun> scan_runs_parallel(std::span<const Digit> w, std::span<const Digit> run_digits, ScanMode mode) {
  const Mask mask = make_mask(run_digits);
  const std::size_t n = w.size();
  const std::size_t shards = std::max<std::size_t>(1, std::min<std::size_t>(n / 4096 + 1, 4 * max_threads()));
  std::vector<std::vector<RawRun>> parts(shards);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t s = 0; s < shards; ++s) {
    const std::size_t lo = n * s / shards;
    const std::size_t hi = n * (s + 1) / shards;
    if (mode == ScanMode::All) {
      scan_range(w, mask, lo, hi, [&](const RawRun& r) { parts[s].push_back(r); });
    } else {
      RecordSink sink{&parts[s]};
      scan_range(w, mask, lo, hi, sink);
    }
  }
  if (mode == ScanMode::Records) return stitch_records(parts);
  std::vector<RawRun> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

namespace {

bool bounded(std::span<const Digit> w, std::span<const Digit> bound) {
  for (std::size_t k = 0; k < w.size(); ++k) {
    for (std::size_t i = 0; k + i < w.size(); ++i) {
      if (w[k + i] < bound[i]) break;
      if (w[k + i] > bound[i]) return false;
    }
  }
  return true;
}

// Words with a fixed first digit, enumerated in odometer order.
std::uint64_t count_with_first(std::span<const Digit> bound, Digit top, std::size_t n, Digit first) {
  std::vector<Digit> w(n, 0);
  w[0] = first;
  std::uint64_t count = 0;
  for (;;) {
    if (bounded(w, bound)) ++count;
    std::size_t i = n;
    while (i > 1 && w[i - 1] == top) w[--i] = 0;
    if (i == 1) return count;
    ++w[i - 1];
  }
}

}  // namespace

std::uint64_t count_bounded_words_serial(std::span<const Digit> bound, Digit top, std::size_t n) {
  if (n == 0) return 1;
  std::uint64_t total = 0;
  for (unsigned d = 0; d <= top; ++d) total += count_with_first(bound, top, n, static_cast<Digit>(d));
  return total;
}

std::uint64_t count_bounded_words_parallel(std::span<const Digit> bound, Digit top, std::size_t n) {
  if (n == 0) return 1;
  std::uint64_t total = 0;
  const int digits = top + 1;
#pragma omp parallel for reduction(+ : total) schedule(dynamic)
  for (int d = 0; d < digits; ++d) total += count_with_first(bound, top, n, static_cast<Digit>(d));
  return total;
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void fill_chunk(std::span<Digit> out, std::span<const Digit> alphabet, std::uint64_t seed, std::size_t chunk) {
  const std::size_t lo = chunk * kFillChunk;
  const std::size_t hi = std::min(out.size(), lo + kFillChunk);
  std::mt19937_64 rng(splitmix(seed ^ splitmix(chunk)));
  const std::uint64_t k = alphabet.size();
  for (std::size_t i = lo; i < hi; ++i) out[i] = alphabet[rng() % k];
}

}  // namespace

void random_fill_serial(std::span<Digit> out, std::span<const Digit> alphabet, std::uint64_t seed) {
  const std::size_t chunks = (out.size() + kFillChunk - 1) / kFillChunk;
  for (std::size_t c = 0; c < chunks; ++c) fill_chunk(out, alphabet, seed, c);
}

void random_fill_parallel(std::span<Digit> out, std::span<const Digit> alphabet, std::uint64_t seed) {
  const std::size_t chunks = (out.size() + kFillChunk - 1) / kFillChunk;
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) fill_chunk(out, alphabet, seed, c);
}

}  // namespace betadim::kernels
