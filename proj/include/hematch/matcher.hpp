// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hematch/fv.hpp"
#include "hematch/keys.hpp"
#include "hematch/params.hpp"
#include "hematch/rng.hpp"
#include "hematch/serialize.hpp"
#include "hematch/slot_codec.hpp"

namespace hematch {

// ---------------------------------------------------------------------------
// Plaintext reference path
// ---------------------------------------------------------------------------

/// v / ||v||_2. Throws std::domain_error when ||v||_2 <= 1e-12.
std::vector<double> normalize(std::span<const double> v);

/// 1 - <x, y> for unit vectors; the plaintext oracle the encrypted path is
/// measured against. Throws std::invalid_argument on dimension mismatch.
double cosine_dissimilarity(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Encrypted templates
// ---------------------------------------------------------------------------

enum class TemplateForm : std::uint8_t {
  /// All d quantized features packed into the slots of one ciphertext per
  /// plaintext residue; scoring is one multiply plus a rotate-and-add ladder.
  batched = 1,
  /// One ciphertext per feature, each holding the base-w digit expansion of
  /// that integer; scoring is d multiplies and d-1 adds.
  elementwise = 2,
};

/// Digit base for the elementwise encoding. Two-decimal-digit quantization
/// (delta = 0.01) maps each feature to at most three base-10 digits.
inline constexpr std::uint64_t kDefaultScalarBase = 10;

struct EncryptedTemplate {
  TemplateForm form = TemplateForm::batched;
  std::size_t dim = 0;
  double delta = 0.0;
  /// Elementwise only: digit base w of the encoding (0 in batched form).
  std::uint64_t scalar_base = 0;
  /// Elementwise only: sum over features of (L1 norm of the digit vector)^2.
  /// Carried with the template so the overflow guard can bound the convolved
  /// product coefficients of any pairing without seeing the plaintexts.
  std::uint64_t digit_l1_sq = 0;
  std::array<unsigned char, 32> params_digest{};
  std::uint64_t key_id = 0;
  /// batched: one ciphertext per plaintext residue, index = residue.
  /// elementwise: one ciphertext per feature, index = coordinate.
  std::vector<Ciphertext> cts;
};

/// Encrypt a quantized feature vector in the given form. Batched form packs
/// slots per residue prime (requires dim <= slot count); elementwise form
/// digit-encodes each feature into its own ciphertext mod the full t.
EncryptedTemplate encrypt_template(const QuantizedTemplate& q, TemplateForm form,
                                   const PublicKey& pk, const EncryptionParams& params,
                                   SeedableRng& rng,
                                   std::uint64_t scalar_base = kDefaultScalarBase);

/// Total serialized size of the template's ciphertexts in bytes.
std::size_t template_byte_size(const EncryptedTemplate& t, const EncryptionParams& params);

Bytes serialize_encrypted_template(const EncryptedTemplate& t, const EncryptionParams& params);
EncryptedTemplate parse_encrypted_template(ByteView bytes, const EncryptionParams& params);

// ---------------------------------------------------------------------------
// Encrypted scoring
// ---------------------------------------------------------------------------

/// Homomorphic operation tally, filled by the scoring functions when a sink
/// is supplied. Lets tests pin the advertised operation counts.
struct OpCounts {
  std::size_t multiplies = 0;
  std::size_t adds = 0;
  std::size_t rotations = 0;
};

/// An encrypted inner product before the client decrypts it. Batched scores
/// hold one ciphertext per plaintext residue (slot 0 of each carries the dot
/// product mod that residue); elementwise scores hold a single ciphertext
/// whose coefficients are the digit convolution of the products.
struct MatchScore {
  TemplateForm form = TemplateForm::batched;
  std::size_t dim = 0;
  double delta = 0.0;
  std::uint64_t scalar_base = 0;
  std::vector<Ciphertext> encrypted;
};

/// Multiply slot-packed templates and fold all slots into slot 0 with the
/// rotation ladder, independently per plaintext residue.
MatchScore encrypted_inner_product_batched(const EncryptedTemplate& ex,
                                           const EncryptedTemplate& ey,
                                           const EvaluationKey& ek, const GaloisKeySet& gks,
                                           const EncryptionParams& params,
                                           OpCounts* counts = nullptr);

/// Sum of per-feature products: exactly d homomorphic multiplies and d-1
/// adds. Throws std::overflow_error when the digit-norm guard cannot rule
/// out a product coefficient reaching t/2 (Cauchy-Schwarz bound over the
/// templates' digit_l1_sq scalars).
MatchScore encrypted_inner_product_elementwise(const EncryptedTemplate& ex,
                                               const EncryptedTemplate& ey,
                                               const EvaluationKey& ek,
                                               const EncryptionParams& params,
                                               OpCounts* counts = nullptr);

/// Form-dispatched scoring with full compatibility checking (form, params
/// digest, key id, dimension, delta).
MatchScore score(const EncryptedTemplate& ex, const EncryptedTemplate& ey,
                 const EvaluationKey& ek, const GaloisKeySet& gks,
                 const EncryptionParams& params, OpCounts* counts = nullptr);

/// Decrypt to the integer dot product of the quantized vectors: batched
/// scores decode slot 0 per residue and recombine; elementwise scores
/// evaluate the digit polynomial at the base.
std::int64_t decrypt_score_integer(const MatchScore& s, const SecretKey& sk,
                                   const EncryptionParams& params);

/// decrypt_score_integer rescaled to a dissimilarity: 1 - delta^2 * integer.
double decrypt_score(const MatchScore& s, const SecretKey& sk,
                     const EncryptionParams& params);

Bytes serialize_match_score(const MatchScore& s, const EncryptionParams& params);
MatchScore parse_match_score(ByteView bytes, const EncryptionParams& params);

// ---------------------------------------------------------------------------
// PCA dimensionality reduction
// ---------------------------------------------------------------------------

struct PcaModel {
  std::size_t input_dim = 0;
  std::size_t k = 0;
  /// Gallery mean, length input_dim.
  std::vector<double> mean;
  /// k x input_dim row-major; rows orthonormal, ordered by descending
  /// explained variance.
  std::vector<double> basis;
  /// Eigenvalue of the sample covariance per retained component, descending.
  std::vector<double> explained_variance;
};

/// Mean-centered top-k eigenbasis of the sample covariance of the gallery.
/// Throws std::invalid_argument when the gallery has fewer than k nonzero
/// eigenvalues (the message lists the achievable k) or is smaller than k+1.
PcaModel pca_fit(const std::vector<std::vector<double>>& gallery, std::size_t k);

/// basis * (v - mean), re-normalized to unit length so the quantizer's
/// unit-vector precondition keeps holding after reduction.
std::vector<double> pca_project(std::span<const double> v, const PcaModel& model);

// ---------------------------------------------------------------------------
// Verification metrics
// ---------------------------------------------------------------------------

/// Operating points used throughout: FAR = 0.01%, 0.1%, 1%.
inline constexpr std::array<double, 3> kFarPoints = {0.0001, 0.001, 0.01};

struct VerificationReport {
  struct Row {
    double far = 0.0;
    double threshold = 0.0;
    double tar = 0.0;
  };
  std::vector<Row> rows;

  /// CSV with header "far,threshold,tar".
  std::string to_csv() const;
};

/// For each FAR point: threshold = lower empirical quantile of the impostor
/// dissimilarities (k = floor(far * N), no interpolation; k = 0 rejects
/// everything), TAR = fraction of genuine dissimilarities <= threshold.
/// Scores are dissimilarities: lower means more similar. Throws
/// std::invalid_argument when either list is empty.
VerificationReport evaluate_tar_far(std::span<const double> genuine,
                                    std::span<const double> impostor,
                                    std::span<const double> far_points);

// ---------------------------------------------------------------------------
// Synthetic verification benchmark
// ---------------------------------------------------------------------------

struct SyntheticGallery {
  /// Unit feature vectors, samples_per_identity consecutive rows per identity.
  std::vector<std::vector<double>> vectors;
  /// Identity index of each vector.
  std::vector<std::uint32_t> labels;
};

/// Fixed-seed class model: per identity a mean direction uniform on the
/// sphere; samples are the mean plus isotropic Gaussian noise with expected
/// norm sigma_within (per-coordinate sigma = sigma_within / sqrt(dim)),
/// re-normalized.
SyntheticGallery make_synthetic_gallery(std::size_t identities,
                                        std::size_t samples_per_identity,
                                        std::size_t dim, double sigma_within,
                                        std::uint64_t seed);

}  // namespace hematch
