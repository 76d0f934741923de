#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "costate/datagen.hpp"
#include "costate/matrix.hpp"

namespace costate {

// Model-ready record: X columns are the five standardized vitals plus
// age/18, y is the +-1 intracranial-hypertension label per sample. No
// artifacts, no missing values.
struct PatientRecord {
  std::string patient_id;
  Matrix X;            // N x 6
  std::vector<int> y;  // entries in {-1, +1}

  std::size_t length() const { return y.size(); }
};

struct SplitPlan {
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  std::vector<std::string> train_ids;  // sorted
  std::vector<std::string> test_ids;   // sorted
};

inline constexpr double kIhThresholdMmhg = 15.0;
inline constexpr std::size_t kIhMinDurationSamples = 48;
inline constexpr double kAgeScaleYears = 18.0;

// Remove flagged rows, preserving order. Errors if nothing remains.
RawRecording filter_artifacts(const RawRecording& rec);

// +1 exactly on samples inside a maximal contiguous run of icpm > threshold
// whose length >= min_duration; -1 elsewhere. Strict inequality.
std::vector<int> label_ih(const std::vector<double>& icpm,
                          double threshold = kIhThresholdMmhg,
                          std::size_t min_duration = kIhMinDurationSamples);

// (x - mean) / IQR with linear-interpolation quantiles; divides by 1.0
// when the IQR degenerates below 1e-9. Needs at least 4 samples.
std::vector<double> standardize(const std::vector<double>& series);

struct PreprocessOptions {
  double ih_threshold = kIhThresholdMmhg;
  std::size_t ih_min_duration = kIhMinDurationSamples;
  // Label on the raw series before artifact removal instead of after
  // (exposed because the dose rule's interaction with removed gaps is a
  // judgment call).
  bool label_before_filter = false;
};

// Artifact filtering + labeling + standardization for one recording.
// Labels always come from the unstandardized ICPm (the threshold is in
// mmHg).
PatientRecord build_patient_record(const RawRecording& rec,
                                   const PreprocessOptions& opts = {});

// Keep patients whose non-missing fraction is >= min_fraction in every
// required channel; fill remaining gaps by linear interpolation (nearest
// value at the edges).
std::vector<RawRecording> select_by_coverage(
    const std::vector<RawRecording>& cohort, double min_fraction = 0.5);

// Patient-level 80/20-style split; |train| = floor(fraction * P + 0.5),
// deterministic per seed, id lists sorted.
SplitPlan split_cohort(const std::vector<std::string>& patient_ids,
                       std::uint64_t seed, double train_fraction = 0.8);

std::string split_plan_to_json(const SplitPlan& plan);
SplitPlan split_plan_from_json(const std::string& text);

}  // namespace costate
