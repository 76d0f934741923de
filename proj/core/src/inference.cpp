#include "costate/inference.hpp"

#include "costate/objective.hpp"

namespace costate {

ReferenceSet build_reference_set(const std::vector<PatientRecord>& records,
                                 const ModelParams& params) {
  ReferenceSet refs;
  refs.entries.reserve(records.size());
  for (const auto& rec : records) {
    ReferenceSet::Entry e;
    e.patient_id = rec.patient_id;
    e.Z = encode(rec.X, params, rec.patient_id).Z;
    e.y = rec.y;
    refs.entries.push_back(std::move(e));
  }
  return refs;
}

std::vector<double> infer_single(const Matrix& Zt, const Matrix& Zr,
                                 const std::vector<int>& yr) {
  if (yr.empty()) throw DataError("infer_single: empty reference labels");
  if (yr.size() != Zr.rows)
    throw DimensionError("infer_single: label/embedding length mismatch");
  for (int v : yr)
    if (v != 1 && v != -1)
      throw DataError("infer_single: reference labels must be +-1");

  const Matrix S = cosine_similarity_matrix(Zt, Zr);
  // Least squares of S ~ y_t y_r^T in y_t: since y_r^T y_r = N_r,
  // y_t = S y_r / N_r.
  const double inv_nr = 1.0 / static_cast<double>(yr.size());
  std::vector<double> out(S.rows, 0.0);
  for (std::size_t u = 0; u < S.rows; ++u) {
    double acc = 0.0;
    const double* row = S.row(u);
    for (std::size_t v = 0; v < S.cols; ++v)
      acc += row[v] * static_cast<double>(yr[v]);
    out[u] = acc * inv_nr;
  }
  return out;
}

std::vector<double> collaborative_infer(const ReferenceSet& refs,
                                        const Matrix& Xt,
                                        const ModelParams& params) {
  if (refs.entries.empty())
    throw DataError("collaborative_infer: empty reference set");
  const Matrix Zt = encode(Xt, params).Z;
  std::vector<double> pred(Zt.rows, 0.0);
  for (const auto& ref : refs.entries) {
    const auto term = infer_single(Zt, ref.Z, ref.y);
    for (std::size_t u = 0; u < pred.size(); ++u) pred[u] += term[u];
  }
  const double inv_m = 1.0 / static_cast<double>(refs.entries.size());
  for (auto& v : pred) v *= inv_m;
  return pred;
}

std::vector<int> binarize(const std::vector<double>& scores,
                          double threshold) {
  std::vector<int> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    out[i] = scores[i] > threshold ? +1 : -1;
  return out;
}

}  // namespace costate
