// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "hematch/matcher.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hematch/bytes.hpp"
#include "hematch/errors.hpp"

namespace hematch {
namespace {

void check_same_shape(const EncryptedTemplate& ex, const EncryptedTemplate& ey,
                      const EncryptionParams& params) {
  if (ex.form != ey.form) throw std::invalid_argument("score: template form mismatch");
  if (ex.params_digest != params.digest() || ey.params_digest != params.digest())
    throw std::invalid_argument("score: template/parameter digest mismatch");
  if (ex.key_id != ey.key_id) throw std::invalid_argument("score: templates under different keys");
  if (ex.dim != ey.dim) throw std::invalid_argument("score: dimension mismatch");
  if (ex.delta != ey.delta) throw std::invalid_argument("score: quantization step mismatch");
  if (ex.scalar_base != ey.scalar_base)
    throw std::invalid_argument("score: digit base mismatch");
}

MatchScore make_score_shell(const EncryptedTemplate& ex) {
  MatchScore s;
  s.form = ex.form;
  s.dim = ex.dim;
  s.delta = ex.delta;
  s.scalar_base = ex.scalar_base;
  return s;
}

/// Shared body layout for templates and scores:
/// [u8 form][u32 dim][f64 delta][u64 base][u64 guard][u16 count][blob32 ct]*
void write_ct_bundle(ByteWriter& w, TemplateForm form, std::size_t dim, double delta,
                     std::uint64_t base, std::uint64_t guard,
                     const std::vector<Ciphertext>& cts, const EncryptionParams& params) {
  w.u8(static_cast<std::uint8_t>(form));
  if (dim > 0xffffffffULL) throw SerializationError("template dimension too large");
  w.u32(static_cast<std::uint32_t>(dim));
  w.f64(delta);
  w.u64(base);
  w.u64(guard);
  if (cts.empty() || cts.size() > 0xffff)
    throw SerializationError("template ciphertext count out of range");
  w.u16(static_cast<std::uint16_t>(cts.size()));
  for (const auto& ct : cts) w.blob32(serialize_ciphertext(ct, params));
}

struct CtBundle {
  TemplateForm form;
  std::size_t dim;
  double delta;
  std::uint64_t base;
  std::uint64_t guard;
  std::vector<Ciphertext> cts;
};

CtBundle read_ct_bundle(ByteReader& r, const EncryptionParams& params) {
  CtBundle b;
  std::uint8_t form = r.u8();
  if (form != static_cast<std::uint8_t>(TemplateForm::batched) &&
      form != static_cast<std::uint8_t>(TemplateForm::elementwise))
    throw SerializationError("unknown template form byte");
  b.form = static_cast<TemplateForm>(form);
  b.dim = r.u32();
  b.delta = r.f64();
  if (!(b.delta > 0.0) || !std::isfinite(b.delta))
    throw SerializationError("template quantization step must be positive and finite");
  b.base = r.u64();
  b.guard = r.u64();
  std::size_t count = r.u16();
  if (count == 0) throw SerializationError("template holds no ciphertexts");
  b.cts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) b.cts.push_back(parse_ciphertext(r.blob32(), params));
  for (const auto& ct : b.cts)
    if (ct.key_id != b.cts.front().key_id)
      throw SerializationError("template ciphertexts under different keys");
  return b;
}

void check_bundle_shape(const CtBundle& b, const EncryptionParams& params) {
  if (b.form == TemplateForm::batched) {
    if (b.cts.size() != params.residue_count())
      throw SerializationError("batched template must hold one ciphertext per residue");
    if (b.dim > params.n()) throw SerializationError("batched template dimension above slot count");
  } else {
    if (b.cts.size() != b.dim)
      throw SerializationError("elementwise template must hold one ciphertext per feature");
    if (b.base < 2) throw SerializationError("elementwise digit base must be at least 2");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Plaintext reference path
// ---------------------------------------------------------------------------

std::vector<double> normalize(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  double norm = std::sqrt(sq);
  if (!(norm > 1e-12)) throw std::domain_error("normalize: vector norm at or below 1e-12");
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return out;
}

double cosine_dissimilarity(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("cosine_dissimilarity: dimension mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
  return 1.0 - dot;
}

// ---------------------------------------------------------------------------
// Encrypted templates
// ---------------------------------------------------------------------------

EncryptedTemplate encrypt_template(const QuantizedTemplate& q, TemplateForm form,
                                   const PublicKey& pk, const EncryptionParams& params,
                                   SeedableRng& rng, std::uint64_t scalar_base) {
  check_score_range(q.delta, params);
  EncryptedTemplate t;
  t.form = form;
  t.dim = q.dim;
  t.delta = q.delta;
  t.params_digest = params.digest();
  t.key_id = pk.key_id;
  if (form == TemplateForm::batched) {
    if (q.dim > params.n())
      throw std::invalid_argument("encrypt_template: dimension exceeds slot count");
    std::vector<std::int64_t> slots(params.n(), 0);
    std::copy(q.values.begin(), q.values.end(), slots.begin());
    t.cts.reserve(params.residue_count());
    for (std::size_t r = 0; r < params.residue_count(); ++r) {
      Plaintext pt = encode_slots_residue(slots, params, r);
      t.cts.push_back(encrypt_residue(pt, pk, params, r, rng));
    }
  } else {
    if (q.dim == 0) throw std::invalid_argument("encrypt_template: empty feature vector");
    if (scalar_base < 2)
      throw std::invalid_argument("encrypt_template: digit base must be at least 2");
    t.scalar_base = scalar_base;
    u128 guard = 0;
    t.cts.reserve(q.dim);
    for (std::int64_t v : q.values) {
      Plaintext pt = encode_scalar(v, scalar_base, params.n(), params.t());
      t.cts.push_back(encrypt(pt, pk, params, rng));
      std::uint64_t l1 = digit_l1(v, scalar_base);
      guard += static_cast<u128>(l1) * l1;
    }
    t.digit_l1_sq = guard > std::numeric_limits<std::uint64_t>::max()
                        ? std::numeric_limits<std::uint64_t>::max()
                        : static_cast<std::uint64_t>(guard);
  }
  return t;
}

std::size_t template_byte_size(const EncryptedTemplate& t, const EncryptionParams& params) {
  return serialize_encrypted_template(t, params).size();
}

Bytes serialize_encrypted_template(const EncryptedTemplate& t, const EncryptionParams& params) {
  if (t.params_digest != params.digest())
    throw SerializationError("template was built under different parameters");
  ByteWriter w;
  write_ct_bundle(w, t.form, t.dim, t.delta, t.scalar_base, t.digit_l1_sq, t.cts, params);
  return w.take();
}

EncryptedTemplate parse_encrypted_template(ByteView bytes, const EncryptionParams& params) {
  ByteReader r(bytes);
  CtBundle b = read_ct_bundle(r, params);
  if (!r.done()) throw SerializationError("trailing bytes after template");
  check_bundle_shape(b, params);
  if (b.form == TemplateForm::batched && (b.base != 0 || b.guard != 0))
    throw SerializationError("batched template carries elementwise metadata");
  EncryptedTemplate t;
  t.form = b.form;
  t.dim = b.dim;
  t.delta = b.delta;
  t.scalar_base = b.base;
  t.digit_l1_sq = b.guard;
  t.params_digest = params.digest();
  t.key_id = b.cts.front().key_id;
  t.cts = std::move(b.cts);
  return t;
}

// ---------------------------------------------------------------------------
// Encrypted scoring
// ---------------------------------------------------------------------------

MatchScore encrypted_inner_product_batched(const EncryptedTemplate& ex,
                                           const EncryptedTemplate& ey,
                                           const EvaluationKey& ek, const GaloisKeySet& gks,
                                           const EncryptionParams& params, OpCounts* counts) {
  check_same_shape(ex, ey, params);
  if (ex.form != TemplateForm::batched)
    throw std::invalid_argument("encrypted_inner_product_batched: templates not in batched form");
  if (ex.cts.size() != params.residue_count() || ey.cts.size() != params.residue_count())
    throw std::invalid_argument(
        "encrypted_inner_product_batched: one ciphertext per residue required");
  MatchScore s = make_score_shell(ex);
  std::size_t ladder = sum_slots_steps(params).size() + 1;  // rotations + row swap
  for (std::size_t r = 0; r < params.residue_count(); ++r) {
    Ciphertext prod = hom_multiply_residue(ex.cts[r], ey.cts[r], ek, params, r);
    s.encrypted.push_back(sum_slots(prod, gks, params));
    if (counts) {
      counts->multiplies += 1;
      counts->rotations += ladder;
      counts->adds += ladder;
    }
  }
  return s;
}

MatchScore encrypted_inner_product_elementwise(const EncryptedTemplate& ex,
                                               const EncryptedTemplate& ey,
                                               const EvaluationKey& ek,
                                               const EncryptionParams& params,
                                               OpCounts* counts) {
  check_same_shape(ex, ey, params);
  if (ex.form != TemplateForm::elementwise)
    throw std::invalid_argument(
        "encrypted_inner_product_elementwise: templates not in elementwise form");
  if (ex.cts.size() != ex.dim || ey.cts.size() != ey.dim)
    throw std::invalid_argument(
        "encrypted_inner_product_elementwise: one ciphertext per feature required");
  // Every coefficient of the summed digit convolutions is bounded by
  // sqrt(sum_i L1(x_i)^2) * sqrt(sum_i L1(y_i)^2) (Cauchy-Schwarz across
  // features, L1 * L1 per product). If that bound can reach t/2 the score
  // could wrap silently, so refuse.
  u128 bound_sq = static_cast<u128>(ex.digit_l1_sq) * ey.digit_l1_sq * 4;
  u128 t_sq = static_cast<u128>(params.t().value()) * params.t().value();
  if (bound_sq >= t_sq)
    throw std::overflow_error(
        "encrypted_inner_product_elementwise: digit-norm bound reaches t/2; "
        "product coefficients could wrap (use the batched form or a coarser delta)");
  MatchScore s = make_score_shell(ex);
  Ciphertext acc = hom_multiply(ex.cts[0], ey.cts[0], ek, params);
  if (counts) counts->multiplies += 1;
  for (std::size_t i = 1; i < ex.dim; ++i) {
    Ciphertext prod = hom_multiply(ex.cts[i], ey.cts[i], ek, params);
    acc = hom_add(acc, prod, params);
    if (counts) {
      counts->multiplies += 1;
      counts->adds += 1;
    }
  }
  s.encrypted.push_back(std::move(acc));
  return s;
}

MatchScore score(const EncryptedTemplate& ex, const EncryptedTemplate& ey,
                 const EvaluationKey& ek, const GaloisKeySet& gks,
                 const EncryptionParams& params, OpCounts* counts) {
  check_same_shape(ex, ey, params);
  if (ex.form == TemplateForm::batched)
    return encrypted_inner_product_batched(ex, ey, ek, gks, params, counts);
  return encrypted_inner_product_elementwise(ex, ey, ek, params, counts);
}

std::int64_t decrypt_score_integer(const MatchScore& s, const SecretKey& sk,
                                   const EncryptionParams& params) {
  if (s.encrypted.empty()) throw std::invalid_argument("decrypt_score: empty score");
  if (s.form == TemplateForm::batched) {
    if (s.encrypted.size() != params.residue_count())
      throw std::invalid_argument("decrypt_score: one ciphertext per residue required");
    std::vector<std::uint64_t> residues(params.residue_count());
    for (std::size_t r = 0; r < params.residue_count(); ++r) {
      Plaintext pt = decrypt_residue(s.encrypted[r], sk, params, r);
      residues[r] = decode_slots_residue(pt, params, r)[0];
    }
    return crt_combine_signed(residues, params);
  }
  if (s.encrypted.size() != 1)
    throw std::invalid_argument("decrypt_score: elementwise score holds one ciphertext");
  Plaintext pt = decrypt(s.encrypted[0], sk, params);
  return decode_scalar(pt, s.scalar_base);
}

double decrypt_score(const MatchScore& s, const SecretKey& sk,
                     const EncryptionParams& params) {
  return dequantize_score(decrypt_score_integer(s, sk, params), s.delta);
}

Bytes serialize_match_score(const MatchScore& s, const EncryptionParams& params) {
  ByteWriter w;
  write_ct_bundle(w, s.form, s.dim, s.delta, s.scalar_base, 0, s.encrypted, params);
  return w.take();
}

MatchScore parse_match_score(ByteView bytes, const EncryptionParams& params) {
  ByteReader r(bytes);
  CtBundle b = read_ct_bundle(r, params);
  if (!r.done()) throw SerializationError("trailing bytes after score");
  if (b.form == TemplateForm::batched) {
    if (b.cts.size() != params.residue_count())
      throw SerializationError("batched score must hold one ciphertext per residue");
  } else if (b.cts.size() != 1) {
    throw SerializationError("elementwise score holds exactly one ciphertext");
  }
  MatchScore s;
  s.form = b.form;
  s.dim = b.dim;
  s.delta = b.delta;
  s.scalar_base = b.base;
  s.encrypted = std::move(b.cts);
  return s;
}

// ---------------------------------------------------------------------------
// PCA dimensionality reduction
// ---------------------------------------------------------------------------

PcaModel pca_fit(const std::vector<std::vector<double>>& gallery, std::size_t k) {
  if (gallery.empty()) throw std::invalid_argument("pca_fit: empty gallery");
  const std::size_t rows = gallery.size();
  const std::size_t dim = gallery.front().size();
  if (dim == 0) throw std::invalid_argument("pca_fit: zero-dimensional vectors");
  for (const auto& v : gallery)
    if (v.size() != dim) throw std::invalid_argument("pca_fit: ragged gallery");
  if (k == 0 || k > dim)
    throw std::invalid_argument("pca_fit: target dimension must be in [1, input dim]");
  if (rows <= k)
    throw std::invalid_argument("pca_fit: gallery must hold more than k vectors");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = gallery[i][j];

  Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(rows - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("pca_fit: eigendecomposition failed to converge");
  const Eigen::VectorXd& evals = es.eigenvalues();  // ascending
  const Eigen::MatrixXd& evecs = es.eigenvectors();

  double max_ev = std::max(evals(evals.size() - 1), 0.0);
  double tol = std::max(1e-12, max_ev * 1e-9);
  std::size_t nonzero = 0;
  for (Eigen::Index i = 0; i < evals.size(); ++i)
    if (evals(i) > tol) ++nonzero;
  if (nonzero < k)
    throw std::invalid_argument("pca_fit: gallery is rank-deficient; achievable k = " +
                                std::to_string(nonzero));

  PcaModel model;
  model.input_dim = dim;
  model.k = k;
  model.mean.assign(mean.data(), mean.data() + dim);
  model.basis.resize(k * dim);
  model.explained_variance.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    Eigen::Index col = static_cast<Eigen::Index>(dim - 1 - j);
    Eigen::VectorXd v = evecs.col(col);
    // Pin the sign so the model is reproducible: largest-magnitude entry
    // positive.
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0) v = -v;
    for (std::size_t d = 0; d < dim; ++d) model.basis[j * dim + d] = v(static_cast<Eigen::Index>(d));
    model.explained_variance[j] = evals(col);
  }
  return model;
}

std::vector<double> pca_project(std::span<const double> v, const PcaModel& model) {
  if (v.size() != model.input_dim)
    throw std::invalid_argument("pca_project: dimension mismatch with model");
  std::vector<double> out(model.k, 0.0);
  for (std::size_t j = 0; j < model.k; ++j) {
    double acc = 0.0;
    const double* row = model.basis.data() + j * model.input_dim;
    for (std::size_t d = 0; d < model.input_dim; ++d) acc += row[d] * (v[d] - model.mean[d]);
    out[j] = acc;
  }
  return normalize(out);
}

// ---------------------------------------------------------------------------
// Verification metrics
// ---------------------------------------------------------------------------

std::string VerificationReport::to_csv() const {
  std::ostringstream os;
  os << "far,threshold,tar\n";
  os << std::setprecision(17);
  for (const auto& row : rows) os << row.far << ',' << row.threshold << ',' << row.tar << '\n';
  return os.str();
}

VerificationReport evaluate_tar_far(std::span<const double> genuine,
                                    std::span<const double> impostor,
                                    std::span<const double> far_points) {
  if (genuine.empty()) throw std::invalid_argument("evaluate_tar_far: empty genuine list");
  if (impostor.empty()) throw std::invalid_argument("evaluate_tar_far: empty impostor list");
  std::vector<double> imp(impostor.begin(), impostor.end());
  std::sort(imp.begin(), imp.end());
  VerificationReport report;
  for (double far : far_points) {
    if (!(far > 0.0) || !(far < 1.0))
      throw std::invalid_argument("evaluate_tar_far: FAR points must lie in (0, 1)");
    // Lower empirical quantile, no interpolation: admit the k smallest
    // impostor scores, k = floor(far * N). k = 0 admits nothing.
    std::size_t k = static_cast<std::size_t>(far * static_cast<double>(imp.size()));
    double threshold =
        k == 0 ? -std::numeric_limits<double>::infinity() : imp[k - 1];
    std::size_t accepted = 0;
    for (double g : genuine)
      if (g <= threshold) ++accepted;
    report.rows.push_back(
        {far, threshold, static_cast<double>(accepted) / static_cast<double>(genuine.size())});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Synthetic verification benchmark
// ---------------------------------------------------------------------------

SyntheticGallery make_synthetic_gallery(std::size_t identities,
                                        std::size_t samples_per_identity,
                                        std::size_t dim, double sigma_within,
                                        std::uint64_t seed) {
  if (identities == 0 || samples_per_identity == 0 || dim == 0)
    throw std::invalid_argument("make_synthetic_gallery: all sizes must be positive");
  if (!(sigma_within >= 0.0))
    throw std::invalid_argument("make_synthetic_gallery: sigma_within must be nonnegative");
  SeedableRng rng(seed);
  double coord_sigma = sigma_within / std::sqrt(static_cast<double>(dim));
  SyntheticGallery g;
  g.vectors.reserve(identities * samples_per_identity);
  g.labels.reserve(identities * samples_per_identity);
  std::vector<double> mean(dim), sample(dim);
  for (std::size_t id = 0; id < identities; ++id) {
    for (std::size_t d = 0; d < dim; ++d) mean[d] = rng.next_gaussian();
    mean = normalize(mean);
    for (std::size_t s = 0; s < samples_per_identity; ++s) {
      for (std::size_t d = 0; d < dim; ++d)
        sample[d] = mean[d] + coord_sigma * rng.next_gaussian();
      g.vectors.push_back(normalize(sample));
      g.labels.push_back(static_cast<std::uint32_t>(id));
    }
  }
  return g;
}

}  // namespace hematch
