#include "costate/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "costate/rng.hpp"

namespace fs = std::filesystem;

namespace costate {

const std::vector<double>& RawRecording::channel(
    const std::string& name) const {
  auto it = channels.find(name);
  if (it == channels.end())
    throw DataError("recording " + patient_id + ": channel " + name +
                    " missing");
  return it->second;
}

void RawRecording::validate() const {
  const std::size_t n = artifact_mask.size();
  if (n == 0) throw DataError("recording " + patient_id + ": empty");
  for (const char* name : kChannelNames) {
    const auto& s = channel(name);
    if (s.size() != n)
      throw DataError("recording " + patient_id + ": channel " +
                      std::string(name) + " length " +
                      std::to_string(s.size()) + " != mask length " +
                      std::to_string(n));
  }
  if (sample_period != kSamplePeriodSeconds)
    throw DataError("recording " + patient_id +
                    ": sample period must be 60 s");
  if (age < 0.0)
    throw DataError("recording " + patient_id + ": negative age");
}

void GeneratorSpec::validate() const {
  if (n_patients == 0)
    throw ConfigError("generator.n_patients: must be positive");
  if (length_min < 96)
    throw ConfigError("generator.length_min: must be >= 96 (two dose windows)");
  if (length_max < length_min)
    throw ConfigError("generator.length_max: must be >= length_min");
  if (episode_rate < 0.0)
    throw ConfigError("generator.episode_rate: must be >= 0");
  if (episode_magnitude_min <= 0.0)
    throw ConfigError("generator.episode_magnitude_min: must be > 0");
  if (episode_magnitude_max < episode_magnitude_min)
    throw ConfigError("generator.episode_magnitude_max: must be >= episode_magnitude_min");
  if (artifact_fraction < 0.0 || artifact_fraction > 1.0)
    throw ConfigError("generator.artifact_fraction: must be in [0, 1]");
  if (coupling_strength < 0.0 || coupling_strength > 1.0)
    throw ConfigError("generator.coupling_strength: must be in [0, 1]");
}

namespace {

constexpr std::size_t kRampSamples = 10;
// Baseline excursions above threshold are broken before they can reach the
// 48-sample dose rule, even if artifact removal later joins a few runs.
constexpr std::size_t kBaselineRunCap = 20;
constexpr std::size_t kDipSamples = 4;

struct Episode {
  std::size_t start;    // first ramp sample
  std::size_t plateau;  // samples held strictly above threshold
  double magnitude;     // mmHg above threshold at the plateau

  std::size_t total() const { return plateau + 2 * kRampSamples; }
  std::size_t end() const { return start + total(); }  // one past
};

// AR(1) around a set-point: x_{t+1} = x_t + phi (set - x_t) + sigma n_t.
struct Ar1 {
  double set_point;
  double phi;
  double sigma;
  double x;

  double step(Rng& rng) {
    x += phi * (set_point - x) + sigma * rng.normal();
    return x;
  }
};

std::vector<Episode> place_episodes(Rng& rng, std::size_t n,
                                    const GeneratorSpec& spec) {
  const int count = rng.poisson(spec.episode_rate);
  std::vector<Episode> placed;
  for (int e = 0; e < count; ++e) {
    Episode ep;
    ep.plateau = 48 + rng.bounded(72);  // 48..119 samples above threshold
    ep.magnitude =
        rng.uniform(spec.episode_magnitude_min, spec.episode_magnitude_max);
    if (ep.total() + 2 >= n) continue;
    bool ok = false;
    for (int attempt = 0; attempt < 40 && !ok; ++attempt) {
      ep.start = 1 + rng.bounded(n - ep.total() - 2);
      ok = true;
      for (const auto& other : placed) {
        // Keep a gap so episodes stay distinct events.
        if (ep.start < other.end() + 30 && other.start < ep.end() + 30) {
          ok = false;
          break;
        }
      }
    }
    if (ok) placed.push_back(ep);
  }
  std::sort(placed.begin(), placed.end(),
            [](const Episode& a, const Episode& b) { return a.start < b.start; });
  return placed;
}

// Ramp-up / plateau / ramp-down envelope in [0, 1] for sample t of an
// episode, 0 outside.
double episode_envelope(const Episode& ep, std::size_t t) {
  if (t < ep.start || t >= ep.end()) return 0.0;
  const std::size_t off = t - ep.start;
  if (off < kRampSamples)
    return static_cast<double>(off + 1) / (kRampSamples + 1);
  if (off < kRampSamples + ep.plateau) return 1.0;
  const std::size_t down = off - kRampSamples - ep.plateau;
  return static_cast<double>(kRampSamples - down) / (kRampSamples + 1);
}

RawRecording generate_patient(const GeneratorSpec& spec, std::size_t index) {
  Rng rng(Rng::derive(spec.seed, index));
  RawRecording rec;
  {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "p%03zu", index);
    rec.patient_id = buf;
  }
  const std::size_t n =
      spec.length_min + rng.bounded(spec.length_max - spec.length_min + 1);
  rec.age = rng.uniform(0.5, 17.5);

  const double bpm_set = rng.uniform(60.0, 80.0);
  Ar1 icp{rng.uniform(8.0, 12.0), 0.05, 0.45, 0.0};
  Ar1 bpm{bpm_set, 0.05, 1.2, 0.0};
  Ar1 bps{bpm_set * rng.uniform(1.25, 1.45), 0.05, 1.8, 0.0};
  Ar1 bpd{bpm_set * rng.uniform(0.75, 0.85), 0.05, 1.0, 0.0};
  Ar1 hrt{rng.uniform(90.0, 130.0), 0.05, 1.5, 0.0};
  icp.x = icp.set_point;
  bpm.x = bpm.set_point;
  bps.x = bps.set_point;
  bpd.x = bpd.set_point;
  hrt.x = hrt.set_point;

  const auto episodes = place_episodes(rng, n, spec);

  std::vector<double> v_icp(n), v_bpm(n), v_bps(n), v_bpd(n), v_hrt(n);
  std::vector<bool> in_episode(n, false);
  for (const auto& ep : episodes)
    for (std::size_t t = ep.start; t < ep.end() && t < n; ++t)
      in_episode[t] = true;

  const double cs = spec.coupling_strength;
  std::size_t high_run = 0;  // baseline samples above threshold in a row
  std::size_t dip_left = 0;
  std::size_t ep_idx = 0;
  for (std::size_t t = 0; t < n; ++t) {
    double base_icp = icp.step(rng);
    double g = 0.0;
    if (in_episode[t]) {
      while (ep_idx + 1 < episodes.size() && t >= episodes[ep_idx].end())
        ++ep_idx;
      const auto& ep = episodes[ep_idx];
      g = episode_envelope(ep, t);
      double target = base_icp + g * (15.0 - base_icp + ep.magnitude);
      const std::size_t off = t - ep.start;
      const bool plateau =
          off >= kRampSamples && off < kRampSamples + ep.plateau;
      if (plateau) target = std::max(target, 15.5);
      v_icp[t] = target;
      high_run = 0;
      dip_left = 0;
    } else {
      if (dip_left > 0) {
        base_icp = std::min(base_icp, 13.5 + 0.3 * rng.normal());
        icp.x = base_icp;
        --dip_left;
        high_run = 0;
      } else if (base_icp > 15.0) {
        if (++high_run >= kBaselineRunCap) {
          base_icp = 13.5 + 0.3 * rng.normal();
          icp.x = base_icp;
          dip_left = kDipSamples - 1;
          high_run = 0;
        }
      } else {
        high_run = 0;
      }
      v_icp[t] = base_icp;
    }
    // Cushing-like response: pressures up, heart rate down.
    v_bpm[t] = bpm.step(rng) + cs * 10.0 * g;
    v_bps[t] = bps.step(rng) + cs * 14.0 * g;
    v_bpd[t] = bpd.step(rng) + cs * 7.0 * g;
    v_hrt[t] = hrt.step(rng) - cs * 12.0 * g;
  }

  rec.artifact_mask.assign(n, false);
  for (std::size_t t = 0; t < n; ++t) {
    if (rng.uniform() >= spec.artifact_fraction) continue;
    rec.artifact_mask[t] = true;
    for (auto* v : {&v_icp, &v_bpm, &v_bps, &v_bpd, &v_hrt}) {
      if (rng.uniform() < 0.5)
        (*v)[t] = (*v)[t] * rng.uniform(1.5, 3.0) + rng.uniform(20.0, 60.0);
      else
        (*v)[t] = rng.uniform(0.0, 2.0);  // sensor dropout
    }
  }

  rec.channels["ICPm"] = std::move(v_icp);
  rec.channels["BPm"] = std::move(v_bpm);
  rec.channels["BPs"] = std::move(v_bps);
  rec.channels["BPd"] = std::move(v_bpd);
  rec.channels["HRT"] = std::move(v_hrt);
  return rec;
}

}  // namespace

std::vector<RawRecording> generate_cohort(const GeneratorSpec& spec) {
  spec.validate();
  std::vector<RawRecording> cohort;
  cohort.reserve(spec.n_patients);
  for (std::size_t i = 0; i < spec.n_patients; ++i)
    cohort.push_back(generate_patient(spec, i));
  return cohort;
}

// ---- CSV I/O ---------------------------------------------------------------

namespace {

constexpr const char* kCsvHeader = "t,ICPm,BPm,BPs,BPd,HRT,artifact";
constexpr const char* kMetaFile = "cohort_meta.json";

std::string format_value(double v) {
  if (std::isnan(v)) return "";  // missing
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_csv_cohort(const std::vector<RawRecording>& cohort,
                      const std::string& dir) {
  if (cohort.empty()) throw DataError("write_csv_cohort: empty cohort");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("write_csv_cohort: cannot create " + dir);

  nlohmann::json meta = nlohmann::json::object();
  for (const auto& rec : cohort) {
    rec.validate();
    meta[rec.patient_id] = {{"age", rec.age}};
    const fs::path path = fs::path(dir) / (rec.patient_id + ".csv");
    std::ofstream out(path);
    if (!out) throw IoError("write_csv_cohort: cannot open " + path.string());
    out << kCsvHeader << "\n";
    const std::size_t n = rec.length();
    for (std::size_t t = 0; t < n; ++t) {
      out << t;
      for (const char* name : kChannelNames)
        out << ',' << format_value(rec.channel(name)[t]);
      out << ',' << (rec.artifact_mask[t] ? 1 : 0) << "\n";
    }
    if (!out) throw IoError("write_csv_cohort: write failed for " + path.string());
  }
  std::ofstream mout(fs::path(dir) / kMetaFile);
  if (!mout) throw IoError("write_csv_cohort: cannot write cohort_meta.json");
  mout << meta.dump(2) << "\n";
}

std::vector<RawRecording> read_csv_cohort(const std::string& dir) {
  if (!fs::is_directory(dir))
    throw IoError("read_csv_cohort: not a directory: " + dir);

  nlohmann::json meta;
  {
    std::ifstream min(fs::path(dir) / kMetaFile);
    if (!min)
      throw DataError("read_csv_cohort: missing " + std::string(kMetaFile) +
                      " in " + dir);
    try {
      min >> meta;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("read_csv_cohort: bad cohort_meta.json: " +
                      std::string(e.what()));
    }
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".csv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw DataError("read_csv_cohort: no CSV files in " + dir);

  std::vector<RawRecording> cohort;
  for (const auto& path : files) {
    std::ifstream in(path);
    if (!in) throw IoError("read_csv_cohort: cannot open " + path.string());
    const std::string fname = path.filename().string();

    std::string line;
    if (!std::getline(in, line))
      throw DataError(fname + ": empty file");
    const auto header = split_fields(line);
    const std::vector<std::string> expected = {"t",   "ICPm", "BPm",     "BPs",
                                               "BPd", "HRT",  "artifact"};
    for (const auto& col : expected)
      if (std::find(header.begin(), header.end(), col) == header.end())
        throw DataError(fname + ":1: missing required column " + col);
    if (header.size() != expected.size())
      throw DataError(fname + ":1: unexpected extra columns");
    std::vector<std::size_t> pos(expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
      pos[i] = static_cast<std::size_t>(
          std::find(header.begin(), header.end(), expected[i]) -
          header.begin());

    RawRecording rec;
    rec.patient_id = path.stem().string();
    for (const char* name : kChannelNames) rec.channels[name] = {};

    std::size_t lineno = 1;
    long expected_t = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto fields = split_fields(line);
      if (fields.size() != expected.size())
        throw DataError(fname + ":" + std::to_string(lineno) +
                        ": field count mismatch");
      const auto where = [&](const char* what) {
        return fname + ":" + std::to_string(lineno) + ": " + what;
      };
      long t;
      try {
        t = std::stol(fields[pos[0]]);
      } catch (...) {
        throw DataError(where("bad timestamp"));
      }
      if (t != expected_t)
        throw DataError(where("non-monotone or non-contiguous timestamp"));
      ++expected_t;
      for (std::size_t c = 0; c < kChannelNames.size(); ++c) {
        const std::string& cell = fields[pos[c + 1]];
        double v;
        if (cell.empty()) {
          v = std::nan("");
        } else {
          try {
            std::size_t used = 0;
            v = std::stod(cell, &used);
            if (used != cell.size()) throw std::invalid_argument(cell);
          } catch (...) {
            throw DataError(where("bad numeric value"));
          }
        }
        rec.channels[kChannelNames[c]].push_back(v);
      }
      const std::string& art = fields[pos[6]];
      if (art == "0")
        rec.artifact_mask.push_back(false);
      else if (art == "1")
        rec.artifact_mask.push_back(true);
      else
        throw DataError(where("artifact flag must be 0 or 1"));
    }
    if (rec.artifact_mask.empty())
      throw DataError(fname + ": no data rows");

    if (!meta.contains(rec.patient_id) ||
        !meta[rec.patient_id].contains("age"))
      throw DataError("cohort_meta.json: no age for patient " +
                      rec.patient_id);
    rec.age = meta[rec.patient_id]["age"].get<double>();
    rec.validate();
    cohort.push_back(std::move(rec));
  }
  return cohort;
}

}  // namespace costate
