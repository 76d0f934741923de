#pragma once

#include <string>
#include <vector>

#include "costate/encoder.hpp"
#include "costate/matrix.hpp"
#include "costate/preprocess.hpp"

namespace costate {

// Annotated reference subjects with their embeddings precomputed once, so
// scoring many test patients against the same references re-encodes
// nothing.
struct ReferenceSet {
  struct Entry {
    std::string patient_id;
    Matrix Z;            // N_r x L
    std::vector<int> y;  // +-1
  };
  std::vector<Entry> entries;
};

ReferenceSet build_reference_set(const std::vector<PatientRecord>& records,
                                 const ModelParams& params);

// Least-squares state recovery against one reference: y_t = S y_r / N_r
// where S is the cosine similarity matrix between the embeddings.
std::vector<double> infer_single(const Matrix& Zt, const Matrix& Zr,
                                 const std::vector<int>& yr);

// Average of infer_single over all references (Algorithm-2 style
// accumulate-then-divide).
std::vector<double> collaborative_infer(const ReferenceSet& refs,
                                        const Matrix& Xt,
                                        const ModelParams& params);

// +1 where score > threshold, else -1.
std::vector<int> binarize(const std::vector<double>& scores,
                          double threshold = 0.0);

}  // namespace costate
