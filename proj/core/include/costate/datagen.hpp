#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "costate/errors.hpp"

namespace costate {

// Channel order is fixed everywhere: it is the CSV column order and the
// column order of the model input matrix (age is appended as a sixth
// channel during preprocessing).
inline constexpr std::array<const char*, 5> kChannelNames = {
    "ICPm", "BPm", "BPs", "BPd", "HRT"};

inline constexpr double kSamplePeriodSeconds = 60.0;

// One subject's raw minute-resolution recording. Missing values are NaN;
// artifact samples are flagged, not removed.
struct RawRecording {
  std::string patient_id;
  double sample_period = kSamplePeriodSeconds;
  std::map<std::string, std::vector<double>> channels;
  std::vector<bool> artifact_mask;
  double age = 0.0;  // years, constant per patient

  std::size_t length() const { return artifact_mask.size(); }
  const std::vector<double>& channel(const std::string& name) const;

  // Throws DataError if lengths disagree, a required channel is absent,
  // the sample period is not 60 s, or age is negative.
  void validate() const;
};

struct GeneratorSpec {
  std::uint64_t seed = 0;
  std::size_t n_patients = 0;
  std::size_t length_min = 96;  // at least two dose windows
  std::size_t length_max = 96;
  double episode_rate = 1.0;          // expected IH episodes per recording
  double episode_magnitude_min = 5.0;  // mmHg above the 15 mmHg threshold
  double episode_magnitude_max = 12.0;
  double artifact_fraction = 0.0;
  double coupling_strength = 0.5;  // cross-channel response during episodes

  void validate() const;  // ConfigError naming the offending field
};

// Deterministic synthetic cohort: AR(1) vitals around per-patient
// set-points, intracranial-hypertension episodes that hold ICPm strictly
// above 15 mmHg for >= 48 contiguous samples (10-sample linear ramps on
// both sides), a Cushing-like blood-pressure rise / heart-rate fall scaled
// by coupling_strength, and artifact samples corrupted by spikes or
// dropouts. Identical spec => bit-identical cohort.
std::vector<RawRecording> generate_cohort(const GeneratorSpec& spec);

// One CSV per patient ("<id>.csv", header t,ICPm,BPm,BPs,BPd,HRT,artifact,
// missing values as empty fields) plus a cohort_meta.json sidecar mapping
// patient id -> {"age": years}.
void write_csv_cohort(const std::vector<RawRecording>& cohort,
                      const std::string& dir);
std::vector<RawRecording> read_csv_cohort(const std::string& dir);

}  // namespace costate
