#pragma once

// Paper quality stratification: per-paper rating dispersion, Gaussian KDE over
// the dispersions, consistency threshold at the second density valley, and
// top / middle / bottom tail tier assignment.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "reviewlens/corpus_model.hpp"

namespace reviewlens::stratify {

// Population standard deviation (divide by N).
inline double review_score_std(std::span<const int> scores) {
  if (scores.empty()) throw Error(Errc::EmptyScores, "scores");
  const double n = static_cast<double>(scores.size());
  double mean = 0;
  for (int s : scores) mean += s;
  mean /= n;
  double ss = 0;
  for (int s : scores) ss += (s - mean) * (s - mean);
  return std::sqrt(ss / n);
}

struct SilvermanBandwidth {
  friend bool operator==(SilvermanBandwidth, SilvermanBandwidth) = default;
};
struct FixedBandwidth {
  double h = 0.1;
  friend bool operator==(FixedBandwidth, FixedBandwidth) = default;
};
using Bandwidth = std::variant<SilvermanBandwidth, FixedBandwidth>;

struct KdeConfig {
  Bandwidth bandwidth = SilvermanBandwidth{};
  int grid_points = 512;
  double grid_padding = 3.0;  // in bandwidth multiples

  void validate() const {
    if (grid_points < 128) throw Error(Errc::ConfigError, "kde.grid_points", "must be >= 128");
    if (!(grid_padding >= 0)) throw Error(Errc::ConfigError, "kde.grid_padding", "must be >= 0");
    if (auto* f = std::get_if<FixedBandwidth>(&bandwidth); f && !(f->h > 0))
      throw Error(Errc::ConfigError, "kde.bandwidth", "fixed bandwidth must be > 0");
  }

  friend bool operator==(const KdeConfig&, const KdeConfig&) = default;
};

struct DensityCurve {
  std::vector<double> xs;
  std::vector<double> ys;
  double bandwidth = 0;
};

inline double trapezoid(std::span<const double> xs, std::span<const double> ys) {
  double area = 0;
  for (std::size_t i = 1; i < xs.size(); ++i) area += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
  return area;
}

// Linear-interpolated quantile of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// h = 0.9 * min(sd, IQR / 1.34) * n^(-1/5), with the sample (n-1) standard
// deviation. A zero IQR falls back to sd alone.
inline double silverman_bandwidth(std::span<const double> samples) {
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / (n - 1));
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double spread = iqr > 0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(n, -0.2);
}

inline DensityCurve kde_density(std::span<const double> samples, const KdeConfig& cfg) {
  cfg.validate();
  if (samples.size() < 2) throw Error(Errc::TooFewSamples, std::to_string(samples.size()));
  auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it, hi = *hi_it;
  if (lo == hi) throw Error(Errc::DegenerateSample, std::to_string(lo), "all samples identical");

  const double h = std::holds_alternative<FixedBandwidth>(cfg.bandwidth)
                       ? std::get<FixedBandwidth>(cfg.bandwidth).h
                       : silverman_bandwidth(samples);
  const double start = lo - cfg.grid_padding * h;
  const double stop = hi + cfg.grid_padding * h;
  const auto m = static_cast<std::size_t>(cfg.grid_points);
  const double step = (stop - start) / static_cast<double>(m - 1);
  const double norm = 1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * std::numbers::pi));

  DensityCurve c;
  c.bandwidth = h;
  c.xs.resize(m);
  c.ys.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = i + 1 == m ? stop : start + step * static_cast<double>(i);
    double acc = 0;
    for (double s : samples) {
      const double u = (x - s) / h;
      acc += std::exp(-0.5 * u * u);
    }
    c.xs[i] = x;
    c.ys[i] = acc * norm;
  }
  return c;
}

// Interior strict local minima after collapsing runs of equal ys into a
// single point located at the run's midpoint, in ascending x.
inline std::vector<double> interior_minima(const DensityCurve& curve) {
  std::vector<double> px, py;
  for (std::size_t i = 0; i < curve.ys.size();) {
    std::size_t j = i;
    while (j + 1 < curve.ys.size() && curve.ys[j + 1] == curve.ys[i]) ++j;
    px.push_back(0.5 * (curve.xs[i] + curve.xs[j]));
    py.push_back(curve.ys[i]);
    i = j + 1;
  }
  std::vector<double> minima;
  for (std::size_t i = 1; i + 1 < py.size(); ++i)
    if (py[i] < py[i - 1] && py[i] < py[i + 1]) minima.push_back(px[i]);
  return minima;
}

inline double find_consistency_threshold(const DensityCurve& curve) {
  std::vector<double> minima = interior_minima(curve);
  if (minima.size() < 2) throw Error(Errc::NotEnoughMinima, std::to_string(minima.size()));
  return minima[1];
}

struct PaperScore {
  std::string paper_id;
  double aggregated_score = 0;
  double score_std = 0;
};

// Human overall ratings only; papers without a human review are skipped.
inline std::vector<PaperScore> paper_scores(const ValidatedCorpus& corpus) {
  std::vector<PaperScore> out;
  const auto& reviews = corpus.reviews();
  for (std::size_t i = 0; i < reviews.size();) {
    std::size_t j = i;
    std::vector<int> ratings;
    for (; j < reviews.size() && reviews[j].paper_id == reviews[i].paper_id; ++j)
      if (reviews[j].source.is_human()) ratings.push_back(reviews[j].overall_rating);
    if (!ratings.empty()) {
      double mean = std::accumulate(ratings.begin(), ratings.end(), 0.0) / static_cast<double>(ratings.size());
      out.push_back({reviews[i].paper_id, mean, review_score_std(ratings)});
    }
    i = j;
  }
  return out;
}

// Number of papers per tier: round-half-away-from-zero, at least one.
inline std::size_t tier_size(std::size_t survivors, double tail_fraction) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::round(tail_fraction * static_cast<double>(survivors))));
}

// Drops papers above the threshold, ranks the rest by score descending (ties:
// lower paper_id first) and labels the top k Good, the bottom k Weak and the k
// centred on the median rank Borderline. Output follows rank order.
inline std::vector<QualityTier> assign_quality_tiers(std::span<const PaperScore> papers, double threshold,
                                                     double tail_fraction) {
  if (!(tail_fraction > 0 && tail_fraction < 0.5))
    throw Error(Errc::ConfigError, "tail_fraction", "must lie in (0, 0.5)");
  std::vector<PaperScore> ranked;
  for (const PaperScore& p : papers)
    if (p.score_std <= threshold) ranked.push_back(p);
  std::sort(ranked.begin(), ranked.end(), [](const PaperScore& a, const PaperScore& b) {
    if (a.aggregated_score != b.aggregated_score) return a.aggregated_score > b.aggregated_score;
    return a.paper_id < b.paper_id;
  });

  const std::size_t n = ranked.size();
  const std::size_t k = tier_size(n, tail_fraction);
  if (3 * k > n) throw Error(Errc::TooFewPapers, std::to_string(n), "need " + std::to_string(3 * k));

  std::vector<QualityTier> out;
  auto take = [&](std::size_t first, Tier t) {
    for (std::size_t i = first; i < first + k; ++i)
      out.push_back({ranked[i].paper_id, t, ranked[i].aggregated_score, ranked[i].score_std});
  };
  take(0, Tier::Good);
  take((n - k) / 2, Tier::Borderline);
  take(n - k, Tier::Weak);
  return out;
}

struct StratifyResult {
  DensityCurve curve;
  double threshold = 0;
  std::vector<PaperScore> scores;
  std::vector<QualityTier> tiers;
};

inline StratifyResult stratify_corpus(const ValidatedCorpus& corpus, const KdeConfig& kde, double tail_fraction) {
  StratifyResult r;
  r.scores = paper_scores(corpus);
  std::vector<double> stds;
  stds.reserve(r.scores.size());
  for (const PaperScore& p : r.scores) stds.push_back(p.score_std);
  r.curve = kde_density(stds, kde);
  r.threshold = find_consistency_threshold(r.curve);
  r.tiers = assign_quality_tiers(r.scores, r.threshold, tail_fraction);
  return r;
}

}  // namespace reviewlens::stratify
