#pragma once

// Embedding vectors, cosine similarity, and the exact top-k retrieval index.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "assaygen/bioassay.hpp"

namespace assaygen::embedding {

struct EmbeddingVector {
  std::vector<float> components;

  std::size_t dim() const { return components.size(); }
};

struct RetrievalHit {
  long long aid = 0;
  double similarity = 0.0;
};

// dot(a,b) / (|a| |b|), accumulated in double precision.
// Throws DimMismatch or ZeroNorm.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Canonical serialization embedded for a record: JSON object with keys
// (aid, title, description, protocol, comment) in that order, rows excluded.
// Throws EmptySerialization when every text field is empty.
std::string embedding_payload(const bioassay::BioAssayRecord& record);

using EmbedFn = std::function<EmbeddingVector(const std::string&)>;

EmbeddingVector embed_record(const bioassay::BioAssayRecord& record,
                             const EmbedFn& embed);

class VectorIndex {
 public:
  // First add fixes the dimension. Throws DimMismatch, ZeroNorm, or
  // Error("DuplicateAid").
  void add(long long aid, const EmbeddingVector& vector);

  // Hits sorted by similarity descending, ties by ascending aid; length
  // min(k, size). Throws EmptyIndex, DimMismatch, ZeroNorm, or
  // ConfigError for k == 0.
  std::vector<RetrievalHit> top_k(const EmbeddingVector& query,
                                  std::size_t k) const;

  std::size_t size() const { return aids_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<long long>& aids() const { return aids_; }
  EmbeddingVector vector_for(long long aid) const;  // throws NotFound

  // Binary layout: magic "BAEIDX01", uint32 dim, uint64 count, then
  // count*dim little-endian float32. Sidecar "<path>.aids" holds one aid
  // per line in row order.
  void save(const std::string& path) const;
  static VectorIndex load(const std::string& path);  // IndexFormatError

 private:
  std::size_t dim_ = 0;
  std::vector<long long> aids_;
  std::vector<float> data_;       // size() * dim_, row-major
  std::vector<double> norms_;     // Euclidean norm per row
};

}  // namespace assaygen::embedding
