#include "costate/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "costate/rng.hpp"

namespace costate {

RawRecording filter_artifacts(const RawRecording& rec) {
  rec.validate();
  const std::size_t n = rec.length();
  std::size_t kept = 0;
  for (std::size_t t = 0; t < n; ++t)
    if (!rec.artifact_mask[t]) ++kept;
  if (kept == 0)
    throw DataError("recording " + rec.patient_id +
                    ": all samples are artifactual");

  RawRecording out;
  out.patient_id = rec.patient_id;
  out.sample_period = rec.sample_period;
  out.age = rec.age;
  out.artifact_mask.assign(kept, false);
  for (const auto& [name, series] : rec.channels) {
    std::vector<double> filtered;
    filtered.reserve(kept);
    for (std::size_t t = 0; t < n; ++t)
      if (!rec.artifact_mask[t]) filtered.push_back(series[t]);
    out.channels[name] = std::move(filtered);
  }
  return out;
}

std::vector<int> label_ih(const std::vector<double>& icpm, double threshold,
                          std::size_t min_duration) {
  if (icpm.empty()) throw DataError("label_ih: empty series");
  if (threshold <= 0.0) throw ConfigError("label_ih: threshold must be > 0");
  if (min_duration < 1)
    throw ConfigError("label_ih: min_duration must be >= 1");

  std::vector<int> y(icpm.size(), -1);
  std::size_t run_start = 0;
  bool in_run = false;
  for (std::size_t t = 0; t <= icpm.size(); ++t) {
    const bool high = t < icpm.size() && icpm[t] > threshold;
    if (high && !in_run) {
      in_run = true;
      run_start = t;
    } else if (!high && in_run) {
      in_run = false;
      if (t - run_start >= min_duration)
        for (std::size_t s = run_start; s < t; ++s) y[s] = +1;
    }
  }
  return y;
}

namespace {

// Linear interpolation between order statistics, inclusive: the p-quantile
// sits at index p * (n - 1) of the sorted series.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<double> standardize(const std::vector<double>& series) {
  if (series.size() < 4)
    throw DataError("standardize: need at least 4 samples, got " +
                    std::to_string(series.size()));
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(series.size());

  std::vector<double> sorted = series;
  std::sort(sorted.begin(), sorted.end());
  double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  if (iqr < 1e-9) iqr = 1.0;

  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i)
    out[i] = (series[i] - mean) / iqr;
  return out;
}

PatientRecord build_patient_record(const RawRecording& rec,
                                   const PreprocessOptions& opts) {
  std::vector<int> y_raw;
  if (opts.label_before_filter)
    y_raw = label_ih(rec.channel("ICPm"), opts.ih_threshold,
                     opts.ih_min_duration);

  RawRecording clean = filter_artifacts(rec);
  const std::size_t n = clean.length();

  std::vector<int> y;
  if (opts.label_before_filter) {
    y.reserve(n);
    for (std::size_t t = 0; t < rec.length(); ++t)
      if (!rec.artifact_mask[t]) y.push_back(y_raw[t]);
  } else {
    y = label_ih(clean.channel("ICPm"), opts.ih_threshold,
                 opts.ih_min_duration);
  }

  PatientRecord out;
  out.patient_id = clean.patient_id;
  out.y = std::move(y);
  out.X = Matrix(n, 6);
  for (std::size_t c = 0; c < kChannelNames.size(); ++c) {
    const auto& series = clean.channel(kChannelNames[c]);
    for (double v : series)
      if (std::isnan(v))
        throw DataError("recording " + clean.patient_id +
                        ": missing values remain in " +
                        std::string(kChannelNames[c]) +
                        "; run coverage selection first");
    const auto std_series = standardize(series);
    for (std::size_t t = 0; t < n; ++t) out.X.at(t, c) = std_series[t];
  }
  // Age is constant per patient (IQR would be 0), so it is scaled to
  // order 1 instead of standardized.
  const double age_scaled = clean.age / kAgeScaleYears;
  for (std::size_t t = 0; t < n; ++t) out.X.at(t, 5) = age_scaled;
  return out;
}

std::vector<RawRecording> select_by_coverage(
    const std::vector<RawRecording>& cohort, double min_fraction) {
  if (min_fraction < 0.0 || min_fraction > 1.0)
    throw ConfigError("select_by_coverage: min_fraction must be in [0, 1]");
  std::vector<RawRecording> kept;
  for (const auto& rec : cohort) {
    rec.validate();
    bool ok = true;
    for (const char* name : kChannelNames) {
      const auto& series = rec.channel(name);
      std::size_t present = 0;
      for (double v : series)
        if (!std::isnan(v)) ++present;
      if (static_cast<double>(present) <
          min_fraction * static_cast<double>(series.size())) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;

    RawRecording filled = rec;
    for (auto& [name, series] : filled.channels) {
      const std::size_t n = series.size();
      std::size_t prev = n;  // last non-missing index seen
      for (std::size_t t = 0; t < n; ++t) {
        if (!std::isnan(series[t])) {
          if (prev == n && t > 0) {
            // leading gap: extend first value backwards
            for (std::size_t s = 0; s < t; ++s) series[s] = series[t];
          } else if (prev != n && t > prev + 1) {
            const double lo = series[prev], hi = series[t];
            const double span = static_cast<double>(t - prev);
            for (std::size_t s = prev + 1; s < t; ++s)
              series[s] =
                  lo + (hi - lo) * static_cast<double>(s - prev) / span;
          }
          prev = t;
        }
      }
      if (prev == n)
        throw DataError("recording " + rec.patient_id + ": channel " + name +
                        " entirely missing");
      for (std::size_t s = prev + 1; s < n; ++s) series[s] = series[prev];
    }
    kept.push_back(std::move(filled));
  }
  if (kept.empty())
    throw DataError(
        "select_by_coverage: no patient meets the coverage threshold; "
        "lower min_fraction or check the data");
  return kept;
}

SplitPlan split_cohort(const std::vector<std::string>& patient_ids,
                       std::uint64_t seed, double train_fraction) {
  if (patient_ids.size() < 2)
    throw DataError("split_cohort: need at least 2 patients");
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw ConfigError("split_cohort: train_fraction must be in (0, 1)");

  std::vector<std::string> ids = patient_ids;
  std::sort(ids.begin(), ids.end());
  Rng rng(Rng::derive(seed, 0x5911u));
  // Fisher-Yates with the portable generator; std::shuffle is
  // implementation-defined.
  for (std::size_t i = ids.size() - 1; i > 0; --i)
    std::swap(ids[i], ids[rng.bounded(i + 1)]);

  const auto n_train = static_cast<std::size_t>(std::floor(
      train_fraction * static_cast<double>(ids.size()) + 0.5));
  SplitPlan plan;
  plan.seed = seed;
  plan.train_fraction = train_fraction;
  plan.train_ids.assign(ids.begin(), ids.begin() + n_train);
  plan.test_ids.assign(ids.begin() + n_train, ids.end());
  std::sort(plan.train_ids.begin(), plan.train_ids.end());
  std::sort(plan.test_ids.begin(), plan.test_ids.end());
  return plan;
}

std::string split_plan_to_json(const SplitPlan& plan) {
  nlohmann::ordered_json j;
  j["seed"] = plan.seed;
  j["train_fraction"] = plan.train_fraction;
  j["train"] = plan.train_ids;
  j["test"] = plan.test_ids;
  return j.dump(2) + "\n";
}

SplitPlan split_plan_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SplitPlan plan;
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.train_fraction = j.value("train_fraction", 0.8);
    plan.train_ids = j.at("train").get<std::vector<std::string>>();
    plan.test_ids = j.at("test").get<std::vector<std::string>>();
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("split plan: bad JSON: " + std::string(e.what()));
  }
}

}  // namespace costate
