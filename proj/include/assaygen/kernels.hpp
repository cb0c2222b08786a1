#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

// Data-parallel inner loops used by the vector index (cosine scans) and the
// fingerprint code (Tanimoto popcounts). Scalar kernels are the reference
// semantics; AVX2 variants are selected at runtime when the CPU supports
// them and are equivalence-tested against the scalar path.

namespace assaygen::kernels {

/// Counts for the bitwise intersection and union of two word arrays.
struct AndOrCount {
  std::uint64_t both = 0;
  std::uint64_t either = 0;
};

/// Dot product of two float arrays, accumulated in double.
double dot_f32(const float* a, const float* b, std::size_t n);

/// Sum of squares of a float array, accumulated in double.
double norm_sqr_f32(const float* a, std::size_t n);

/// Popcount of (a & b) over nwords 64-bit words.
std::uint64_t popcount_and(const std::uint64_t* a, const std::uint64_t* b,
                           std::size_t nwords);

/// Single-pass popcounts of (a & b) and (a | b).
AndOrCount popcount_and_or(const std::uint64_t* a, const std::uint64_t* b,
                           std::size_t nwords);

/// Name of the kernel set the dispatcher resolved to ("avx2" or "scalar").
std::string_view active_kernel_set();

/// Force the scalar path regardless of CPU support (test hook). Passing
/// false restores runtime detection.
void force_scalar_kernels(bool force);

namespace detail {

double dot_f32_scalar(const float* a, const float* b, std::size_t n);
double norm_sqr_f32_scalar(const float* a, std::size_t n);
std::uint64_t popcount_and_scalar(const std::uint64_t* a,
                                  const std::uint64_t* b, std::size_t nwords);
AndOrCount popcount_and_or_scalar(const std::uint64_t* a,
                                  const std::uint64_t* b, std::size_t nwords);

#if defined(ASSAYGEN_HAVE_AVX2_TU)
double dot_f32_avx2(const float* a, const float* b, std::size_t n);
double norm_sqr_f32_avx2(const float* a, std::size_t n);
std::uint64_t popcount_and_avx2(const std::uint64_t* a, const std::uint64_t* b,
                                std::size_t nwords);
AndOrCount popcount_and_or_avx2(const std::uint64_t* a, const std::uint64_t* b,
                                std::size_t nwords);
#endif

bool cpu_has_avx2();

}  // namespace detail

}  // namespace assaygen::kernels
