// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate: nine end-to-end criteria, one PASS/FAIL line each.
// Exit code 0 only when every executed criterion passes.
//
//   acceptance [--only N] [--fuzz-seconds S]
//
// --only N runs a single criterion (used by the long fuzz registration);
// --fuzz-seconds controls the malformed-frame fuzz duration in criterion 8
// (default 60; the dedicated long run uses 3600).

#include <netinet/in.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "hematch/matcher.hpp"
#include "hematch/protocol.hpp"

using namespace hematch;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Check {
  bool ok = true;
  std::string why;

  void expect(bool cond, const std::string& detail) {
    if (!cond && ok) {
      ok = false;
      why = detail;
    }
  }
};

struct KeySet {
  SecretKey sk;
  PublicKey pk;
  EvaluationKey ek;
  GaloisKeySet gks;
};

KeySet make_keys(const EncryptionParams& p, SeedableRng& rng) {
  KeySet k;
  k.sk = gen_secret_key(p, rng);
  k.pk = gen_public_key(k.sk, p, rng);
  k.ek = gen_evaluation_key(k.sk, p, rng);
  k.gks = gen_galois_keys(k.sk, p, sum_slots_steps(p), true, rng);
  return k;
}

Plaintext random_message(const EncryptionParams& p, SeedableRng& rng) {
  Plaintext m = make_plaintext(p);
  for (auto& c : m.poly.coeffs()) c = rng.uniform_below(p.t().value());
  return m;
}

std::vector<double> random_unit(std::size_t d, SeedableRng& rng) {
  std::vector<double> v(d);
  for (auto& x : v) x = rng.next_gaussian();
  return normalize(v);
}

std::int64_t int_dot(const QuantizedTemplate& a, const QuantizedTemplate& b) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.dim; ++i) s += a.values[i] * b.values[i];
  return s;
}

/// Plaintext-ring multiply oracle. Quadratic schoolbook up to n = 512; the
/// ring's own transform multiply above that (itself pinned against the
/// schoolbook form across sizes and moduli in the unit suite).
RingElement oracle_mul(const RingElement& a, const RingElement& b) {
  return a.degree_bound() <= 512 ? ring_mul_schoolbook(a, b) : ring_mul(a, b);
}

std::string temp_path(const std::string& stem) {
  return (std::filesystem::temp_directory_path() /
          (stem + "_" + std::to_string(::getpid()) + ".bin"))
      .string();
}

Bytes file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

const std::vector<std::string>& table_presets() {
  static const std::vector<std::string> names = {
      "l128_n128", "l128_n256", "l128_n1024", "l128_n2048", "l128_n4096",
      "l192_n128", "l192_n256", "l192_n1024", "l192_n2048", "l192_n4096"};
  return names;
}

// ---------------------------------------------------------------------------
// criterion 1: FHE correctness suite over every Table-1 preset
// ---------------------------------------------------------------------------
bool criterion1() {
  Check c;
  auto t0 = Clock::now();
  for (const auto& name : table_presets()) {
    EncryptionParams p = preset_params(name);
    c.expect(p.t().value() == 40961, name + ": plaintext modulus is not 40961");
    SeedableRng rng(0xC1 ^ std::hash<std::string>{}(name));
    KeySet k = make_keys(p, rng);
    for (int trial = 0; trial < 1000; ++trial) {
      Plaintext m = random_message(p, rng);
      Ciphertext ct = encrypt(m, k.pk, p, rng);
      if (!(decrypt(ct, k.sk, p).poly == m.poly)) {
        c.expect(false, name + ": roundtrip mismatch at trial " + std::to_string(trial));
        break;
      }
    }
    for (int trial = 0; trial < 500 && c.ok; ++trial) {
      Plaintext ma = random_message(p, rng), mb = random_message(p, rng);
      Ciphertext ca = encrypt(ma, k.pk, p, rng), cb = encrypt(mb, k.pk, p, rng);
      if (!(decrypt(hom_add(ca, cb, p), k.sk, p).poly == ring_add(ma.poly, mb.poly))) {
        c.expect(false, name + ": add-homomorphism mismatch at trial " + std::to_string(trial));
        break;
      }
    }
    for (int trial = 0; trial < 500 && c.ok; ++trial) {
      Plaintext ma = random_message(p, rng), mb = random_message(p, rng);
      Ciphertext ca = encrypt(ma, k.pk, p, rng), cb = encrypt(mb, k.pk, p, rng);
      Ciphertext cm = hom_multiply(ca, cb, k.ek, p);
      if (!(decrypt(cm, k.sk, p).poly == oracle_mul(ma.poly, mb.poly))) {
        c.expect(false,
                 name + ": multiply-homomorphism mismatch at trial " + std::to_string(trial));
        break;
      }
    }
    if (!c.ok) break;
  }
  double secs = seconds_since(t0);
  c.expect(secs < 600.0, "suite took " + std::to_string(secs) + " s (limit 600)");
  std::printf("%s criterion 1: FHE correctness, 10 presets x (1000 roundtrips + 500 adds + "
              "500 multiplies) vs plaintext-ring oracle, %.0f s%s%s\n",
              c.ok ? "PASS" : "FAIL", secs, c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

// ---------------------------------------------------------------------------
// criterion 2: batched inner-product exactness + path equality
// ---------------------------------------------------------------------------
bool criterion2() {
  Check c;
  SeedableRng rng(0xC2);
  const std::map<std::size_t, int> elementwise_pairs{{64, 5}, {128, 3}, {512, 2}, {1024, 1}};
  for (std::size_t d : {64UL, 128UL, 512UL, 1024UL}) {
    EncryptionParams p = preset_for_dimension(d, 128, false);
    SeedableRng krng(0xC2000 + d);
    KeySet k = make_keys(p, krng);
    for (int trial = 0; trial < 100 && c.ok; ++trial) {
      auto qx = quantize(random_unit(d, rng), 0.01);
      auto qy = quantize(random_unit(d, rng), 0.01);
      auto ex = encrypt_template(qx, TemplateForm::batched, k.pk, p, rng);
      auto ey = encrypt_template(qy, TemplateForm::batched, k.pk, p, rng);
      auto s = encrypted_inner_product_batched(ex, ey, k.ek, k.gks, p);
      std::int64_t got = decrypt_score_integer(s, k.sk, p);
      std::int64_t want = int_dot(qx, qy);
      c.expect(got == want, "d=" + std::to_string(d) + " trial " + std::to_string(trial) +
                                ": batched " + std::to_string(got) + " != brute force " +
                                std::to_string(want));
    }
    for (int trial = 0; trial < elementwise_pairs.at(d) && c.ok; ++trial) {
      auto qx = quantize(random_unit(d, rng), 0.01);
      auto qy = quantize(random_unit(d, rng), 0.01);
      auto bx = encrypt_template(qx, TemplateForm::batched, k.pk, p, rng);
      auto by = encrypt_template(qy, TemplateForm::batched, k.pk, p, rng);
      auto ex = encrypt_template(qx, TemplateForm::elementwise, k.pk, p, rng);
      auto ey = encrypt_template(qy, TemplateForm::elementwise, k.pk, p, rng);
      auto sb = encrypted_inner_product_batched(bx, by, k.ek, k.gks, p);
      auto se = encrypted_inner_product_elementwise(ex, ey, k.ek, p);
      std::int64_t ib = decrypt_score_integer(sb, k.sk, p);
      std::int64_t ie = decrypt_score_integer(se, k.sk, p);
      c.expect(ib == ie, "d=" + std::to_string(d) + ": elementwise " + std::to_string(ie) +
                             " != batched " + std::to_string(ib));
      c.expect(ib == int_dot(qx, qy), "d=" + std::to_string(d) + ": batched != brute force");
    }
  }
  std::printf("%s criterion 2: batched slot-0 == brute-force dot on 100 pairs at each "
              "d in {64,128,512,1024}; elementwise == batched%s%s\n",
              c.ok ? "PASS" : "FAIL", c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

// ---------------------------------------------------------------------------
// criterion 3: rotation/sum correctness against the plaintext-rotated oracle
// ---------------------------------------------------------------------------
bool criterion3() {
  Check c;
  EncryptionParams p = preset_params("l128_n256");
  SeedableRng rng(0xC3);
  KeySet k = make_keys(p, rng);
  const std::size_t row = p.row_size();
  const auto steps = sum_slots_steps(p);
  const s128 t = static_cast<s128>(p.t().value());
  for (int trial = 0; trial < 200 && c.ok; ++trial) {
    std::vector<std::int64_t> vals(p.slot_count());
    for (auto& v : vals)
      v = static_cast<std::int64_t>(rng.uniform_below(p.t().value())) -
          static_cast<std::int64_t>(p.t().value() / 2);
    Ciphertext ct = encrypt(encode_slots(vals, p), k.pk, p, rng);
    // cycle through every Galois step in the generated key set, plus the swap
    std::size_t which = static_cast<std::size_t>(trial) % (steps.size() + 1);
    if (which < steps.size()) {
      int step = steps[which];
      auto got = decode_slots(decrypt(rotate_slots(ct, step, k.gks, p), k.sk, p), p);
      for (std::size_t col = 0; col < row && c.ok; ++col) {
        std::size_t src = (col + static_cast<std::size_t>(step)) % row;
        c.expect(got[col] == vals[src] && got[row + col] == vals[row + src],
                 "trial " + std::to_string(trial) + ": rotation by " + std::to_string(step) +
                     " disagrees with the plaintext-rotated oracle at column " +
                     std::to_string(col));
      }
    } else {
      auto got = decode_slots(decrypt(swap_rows(ct, k.gks, p), k.sk, p), p);
      for (std::size_t col = 0; col < row && c.ok; ++col)
        c.expect(got[col] == vals[row + col] && got[row + col] == vals[col],
                 "trial " + std::to_string(trial) + ": row swap disagrees at column " +
                     std::to_string(col));
    }
    // sum_slots equals the slot total in every slot
    auto all = decode_slots(decrypt(sum_slots(ct, k.gks, p), k.sk, p), p);
    s128 want = 0;
    for (auto v : vals) want = (want + v) % t;
    want = ((want % t) + t) % t;
    for (std::size_t s = 0; s < p.slot_count() && c.ok; ++s) {
      s128 g = ((static_cast<s128>(all[s]) % t) + t) % t;
      c.expect(g == want, "trial " + std::to_string(trial) + ": sum_slots != slot total");
    }
  }
  std::printf("%s criterion 3: every Galois step vs plaintext-rotated oracle + sum_slots == "
              "slot total, 200 trials%s%s\n",
              c.ok ? "PASS" : "FAIL", c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

// ---------------------------------------------------------------------------
// criterion 4: key switching + multi-key protocol equality
// ---------------------------------------------------------------------------
bool criterion4() {
  Check c;
  EncryptionParams p = preset_params("l128_n256");
  SeedableRng rng(0xC4);
  for (int pair = 0; pair < 20 && c.ok; ++pair) {
    SecretKey a = gen_secret_key(p, rng), b = gen_secret_key(p, rng);
    PublicKey pka = gen_public_key(a, p, rng);
    KeySwitchKey ab = gen_keyswitch_key(a, b, p, rng);
    for (int trial = 0; trial < 10 && c.ok; ++trial) {
      Plaintext m = random_message(p, rng);
      Ciphertext ct = encrypt(m, pka, p, rng);
      Ciphertext swd = key_switch(ct, ab, p);
      c.expect(swd.key_id == b.key_id, "switched ciphertext not stamped with target key");
      c.expect(decrypt(swd, b, p).poly == m.poly,
               "pair " + std::to_string(pair) + " trial " + std::to_string(trial) +
                   ": switched ciphertext decrypts wrong");
    }
  }

  // multi-key protocol run == single-key run, bit-exact integers
  if (c.ok) {
    std::size_t d = 64;
    SeedableRng vr(0xC4F);
    std::vector<std::vector<double>> feats;
    for (int i = 0; i < 3; ++i) feats.push_back(random_unit(d, vr));
    MatchOptions opts;
    auto serve_loop = [](Server& server, std::unique_ptr<ByteChannel> ch) {
      return std::thread([&server, sc = std::move(ch)]() mutable {
        while (server.serve_session(*sc)) {
        }
      });
    };

    std::vector<std::int64_t> single, multi;
    {
      std::string path = temp_path("hm_acc_single");
      std::remove(path.c_str());
      TemplateStore store(path);
      Server server(store, p);
      auto [cch, sch] = make_loopback_pair();
      auto th = serve_loop(server, std::move(sch));
      SeedableRng krng(1201), erng(1202);
      Client client(p, generate_client_keys(p, krng));
      client.enroll(*cch, "id", feats, opts, erng);
      single = client.verify(*cch, "id", feats[0], 0.5, opts, erng).raw_integers;
      cch->close();
      th.join();
      std::remove(path.c_str());
    }
    {
      std::string path = temp_path("hm_acc_multi");
      std::remove(path.c_str());
      TemplateStore store(path);
      Server server(store, p);
      auto [cch, sch] = make_loopback_pair();
      auto th = serve_loop(server, std::move(sch));
      SeedableRng ka(1301), kb(1302), er(1303);
      auto keys_a = generate_client_keys(p, ka);
      auto keys_b = generate_client_keys(p, kb);
      std::vector<KeySwitchKey> provision{gen_keyswitch_key(keys_a.sk, keys_b.sk, p, er),
                                          gen_keyswitch_key(keys_b.sk, keys_a.sk, p, er)};
      Client enrollee(p, keys_b);
      enrollee.enroll(*cch, "id", feats, opts, er, provision);
      Client prober(p, keys_a);
      multi = prober.verify(*cch, "id", feats[0], 0.5, opts, er).raw_integers;
      cch->close();
      th.join();
      std::remove(path.c_str());
    }
    c.expect(single.size() == 3 && single == multi,
             "multi-key protocol integers differ from the single-key run");
  }
  std::printf("%s criterion 4: 200 key switches decrypt exactly; multi-key protocol == "
              "single-key integers%s%s\n",
              c.ok ? "PASS" : "FAIL", c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

// ---------------------------------------------------------------------------
// criterion 5: quantization fidelity at d = 512 through real encryption
// ---------------------------------------------------------------------------
bool criterion5() {
  Check c;
  const std::size_t d = 512;
  const int pairs = 1000;
  SeedableRng rng(0xC5);
  for (double delta : {0.1, 0.01, 0.0025}) {
    EncryptionParams p = preset_for_dimension(d, 128, delta == 0.0025);
    SeedableRng krng(0xC5AA);
    KeySet k = make_keys(p, krng);
    const double bound = delta * std::sqrt(double(d)) + delta * delta * double(d) / 4.0;
    double err_sum = 0;
    for (int trial = 0; trial < pairs && c.ok; ++trial) {
      auto x = random_unit(d, rng);
      auto y = random_unit(d, rng);
      auto ex = encrypt_template(quantize(x, delta), TemplateForm::batched, k.pk, p, rng);
      auto ey = encrypt_template(quantize(y, delta), TemplateForm::batched, k.pk, p, rng);
      double enc = decrypt_score(score(ex, ey, k.ek, k.gks, p), k.sk, p);
      double exact = cosine_dissimilarity(x, y);
      double err = std::abs(enc - exact);
      err_sum += err;
      c.expect(err <= bound, "delta " + std::to_string(delta) + " trial " +
                                 std::to_string(trial) + ": error " + std::to_string(err) +
                                 " exceeds bound " + std::to_string(bound));
    }
    if (delta == 0.01)
      c.expect(err_sum / pairs < 0.01, "mean error at delta 0.01 is " +
                                           std::to_string(err_sum / pairs) + " (limit 0.01)");
    if (!c.ok) break;
  }
  std::printf("%s criterion 5: 1000 encrypted pairs at d=512 within the quantization bound "
              "for every delta; mean error at 0.01 below 0.01%s%s\n",
              c.ok ? "PASS" : "FAIL", c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

// ---------------------------------------------------------------------------
// criterion 6: accuracy preservation on the fixed-seed synthetic benchmark
// ---------------------------------------------------------------------------
bool criterion6() {
  Check c;
  auto g = make_synthetic_gallery(200, 5, 512, 0.35, 42);
  const std::size_t n = g.vectors.size();

  auto run_eval = [&](auto&& score_fn) {
    std::vector<double> genuine, impostor;
    genuine.reserve(2000);
    impostor.reserve(n * (n - 1) / 2);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        (g.labels[a] == g.labels[b] ? genuine : impostor).push_back(score_fn(a, b));
    return evaluate_tar_far(genuine, impostor, kFarPoints);
  };

  auto plain = run_eval(
      [&](std::size_t a, std::size_t b) { return cosine_dissimilarity(g.vectors[a], g.vectors[b]); });

  // The encrypted pipeline's defining property (criterion 2) is that its
  // decrypted integer equals the plaintext quantized dot exactly, so the
  // full-gallery sweep scores integers directly and a sample of pairs is
  // re-verified through real encryption per delta below.
  std::map<double, VerificationReport> enc_reports;
  SeedableRng spot_rng(0xC6);
  for (double delta : {0.1, 0.01, 0.0025}) {
    std::vector<QuantizedTemplate> qs;
    qs.reserve(n);
    for (const auto& v : g.vectors) qs.push_back(quantize(v, delta));
    enc_reports.emplace(delta, run_eval([&](std::size_t a, std::size_t b) {
      return dequantize_score(int_dot(qs[a], qs[b]), delta);
    }));
    EncryptionParams p = preset_for_dimension(512, 128, delta == 0.0025);
    SeedableRng krng(0xC6BB);
    KeySet k = make_keys(p, krng);
    for (int spot = 0; spot < 5 && c.ok; ++spot) {
      std::size_t a = spot_rng.next_u64() % n, b = spot_rng.next_u64() % n;
      auto ex = encrypt_template(qs[a], TemplateForm::batched, k.pk, p, spot_rng);
      auto ey = encrypt_template(qs[b], TemplateForm::batched, k.pk, p, spot_rng);
      std::int64_t got = decrypt_score_integer(score(ex, ey, k.ek, k.gks, p), k.sk, p);
      c.expect(got == int_dot(qs[a], qs[b]),
               "FHE spot check at delta " + std::to_string(delta) + " disagrees");
    }
  }

  const auto& fine = enc_reports.at(0.0025);
  for (std::size_t i = 0; i < kFarPoints.size() && c.ok; ++i) {
    double diff = std::abs(fine.rows[i].tar - plain.rows[i].tar);
    c.expect(diff <= 0.005 + 1e-12,
             "TAR at FAR=" + std::to_string(kFarPoints[i]) + " differs from plaintext by " +
                 std::to_string(diff * 100) + " points (limit 0.5)");
  }
  // ordering at FAR = 0.01%, ties allowed at 0.1-point resolution
  double t25 = enc_reports.at(0.0025).rows[0].tar;
  double t100 = enc_reports.at(0.01).rows[0].tar;
  double t1000 = enc_reports.at(0.1).rows[0].tar;
  c.expect(t25 >= t100 - 0.001 && t100 >= t1000 - 0.001,
           "TAR ordering violated at FAR=0.01%: " + std::to_string(t25) + " / " +
               std::to_string(t100) + " / " + std::to_string(t1000));
  std::printf("%s criterion 6: synthetic 200x5xD512 seed 42, encrypted TAR within 0.5 points "
              "of plaintext at all FARs, delta ordering holds (FHE spot checks exact)%s%s\n",
              c.ok ? "PASS" : "FAIL", c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

// ---------------------------------------------------------------------------
// criterion 7: batching performance ratios at (n=1024, d=512, lambda=128)
// ---------------------------------------------------------------------------
bool criterion7() {
  Check c;
  auto t0 = Clock::now();
  EncryptionParams p = preset_params("l128_n1024");
  SeedableRng rng(0xC7);
  KeySet k = make_keys(p, rng);
  auto qx = quantize(random_unit(512, rng), 0.01);
  auto qy = quantize(random_unit(512, rng), 0.01);

  auto median_total = [&](TemplateForm form, std::size_t& template_bytes) {
    auto enrolled = encrypt_template(qy, form, k.pk, p, rng);
    std::vector<double> totals;
    for (int rep = -3; rep < 10; ++rep) {  // 3 warmups + 10 measured
      auto r0 = Clock::now();
      auto probe = encrypt_template(qx, form, k.pk, p, rng);
      auto s = score(enrolled, probe, k.ek, k.gks, p);
      volatile std::int64_t sink = decrypt_score_integer(s, k.sk, p);
      (void)sink;
      double ms = std::chrono::duration<double, std::milli>(Clock::now() - r0).count();
      if (rep >= 0) totals.push_back(ms);
      if (template_bytes == 0) template_bytes = template_byte_size(probe, p);
    }
    std::sort(totals.begin(), totals.end());
    return totals[totals.size() / 2];
  };

  std::size_t batched_bytes = 0, elementwise_bytes = 0;
  double batched_ms = median_total(TemplateForm::batched, batched_bytes);
  double elementwise_ms = median_total(TemplateForm::elementwise, elementwise_bytes);
  double time_ratio = elementwise_ms / batched_ms;
  double size_ratio = double(elementwise_bytes) / double(batched_bytes);
  c.expect(time_ratio >= 10.0, "time ratio " + std::to_string(time_ratio) + " below 10");
  c.expect(size_ratio >= 100.0, "size ratio " + std::to_string(size_ratio) + " below 100");
  double secs = seconds_since(t0);
  c.expect(secs < 900.0, "bench took " + std::to_string(secs) + " s (limit 900)");
  std::printf("%s criterion 7: elementwise/batched at (n=1024,d=512): time %.0fx (>=10), "
              "size %.0fx (>=100), %.0f s (<900)%s%s\n",
              c.ok ? "PASS" : "FAIL", time_ratio, size_ratio, secs, c.ok ? "" : " -- ",
              c.why.c_str());
  return c.ok;
}

// ---------------------------------------------------------------------------
// criterion 8: protocol end-to-end over TCP + store durability + fuzz
// ---------------------------------------------------------------------------
bool criterion8(int fuzz_seconds) {
  Check c;
  EncryptionParams p = preset_params("l128_n256");
  std::size_t d = 64;
  SeedableRng vr(0xC8F);
  std::vector<std::vector<double>> feats;
  for (int i = 0; i < 3; ++i) feats.push_back(random_unit(d, vr));
  MatchOptions opts;

  // (a)+(b): enrollment + authentication over loopback TCP, zero-knowledge tap
  std::string path = temp_path("hm_acc_tcp");
  std::remove(path.c_str());
  {
    TemplateStore store(path);
    Server server(store, p);
    std::set<ObjectTag> seen;
    server.set_parse_tap([&](ObjectTag t) { seen.insert(t); });
    TcpListener listener("127.0.0.1", 0);
    std::thread th([&] { run_tcp_server(listener, server); });

    SeedableRng krng(1401), erng(1402);
    Client client(p, generate_client_keys(p, krng));
    {
      auto ch = tcp_connect("127.0.0.1", listener.port());
      client.enroll(*ch, "id", feats, opts, erng);
    }
    std::vector<std::int64_t> protocol_integers;
    {
      auto ch = tcp_connect("127.0.0.1", listener.port());
      auto res = client.verify(*ch, "id", feats[0], 0.5, opts, erng);
      c.expect(res.accept, "genuine TCP authentication did not accept");
      protocol_integers = res.raw_integers;
    }
    listener.close();
    th.join();

    // in-process matcher on the same inputs and key material
    const auto& keys = client.keys();
    SeedableRng mrng(1500);
    std::vector<std::int64_t> direct;
    auto probe_q = quantize(normalize(feats[0]), opts.delta);
    auto eprobe = encrypt_template(probe_q, opts.form, keys.pub.pk, p, mrng);
    for (const auto& f : feats) {
      auto eq = encrypt_template(quantize(normalize(f), opts.delta), opts.form, keys.pub.pk,
                                 p, mrng);
      direct.push_back(
          decrypt_score_integer(score(eq, eprobe, keys.pub.ek, keys.pub.gks, p), keys.sk, p));
    }
    c.expect(protocol_integers == direct,
             "TCP protocol integers differ from the in-process matcher");
    c.expect(!seen.count(ObjectTag::secret_key) && !seen.count(ObjectTag::plaintext),
             "server parsed a secret key or plaintext object");
    c.expect(seen.count(ObjectTag::ciphertext) && seen.count(ObjectTag::public_key) &&
                 seen.count(ObjectTag::evaluation_key) && seen.count(ObjectTag::galois_keys) &&
                 seen.count(ObjectTag::params),
             "instrumentation did not observe the expected public objects");
  }

  // (c): restart survives with byte-identical records
  Bytes before = file_bytes(path);
  {
    TemplateStore store(path);
    c.expect(store.size() == 1 && store.contains("id"), "store lost the enrollment on restart");
    auto rec = store.get("id");
    c.expect(rec && rec->template_blobs.size() == 3, "record shape changed across restart");
  }
  c.expect(file_bytes(path) == before, "store file changed bytes on restart");
  std::remove(path.c_str());

  // (d): malformed-frame fuzz for the requested duration, zero crashes
  std::uint64_t sessions = 0, health_checks = 0;
  {
    std::string fpath = temp_path("hm_acc_fuzz");
    std::remove(fpath.c_str());
    TemplateStore store(fpath);
    Server server(store, p);
    SeedableRng frng(0xC8FF);
    SeedableRng krng(1601), erng(1602);
    Client client(p, generate_client_keys(p, krng));

    // a recorded valid session's bytes provide realistic mutation fodder
    Bytes valid_stream;
    {
      auto [cch, sch] = make_loopback_pair();
      std::thread th([&server, sc = std::move(sch)]() mutable {
        while (server.serve_session(*sc)) {
        }
      });
      struct Tap final : ByteChannel {
        ByteChannel* inner;
        Bytes* out;
        void send(std::span<const unsigned char> b) override {
          out->insert(out->end(), b.begin(), b.end());
          inner->send(b);
        }
        std::size_t recv(unsigned char* buf, std::size_t maxlen) override {
          return inner->recv(buf, maxlen);
        }
        void close() override { inner->close(); }
      } tap;
      tap.inner = cch.get();
      tap.out = &valid_stream;
      client.enroll(tap, "seed-identity", feats, opts, erng);
      cch->close();
      th.join();
    }

    auto deadline = Clock::now() + std::chrono::seconds(fuzz_seconds);
    while (Clock::now() < deadline) {
      auto [cch, sch] = make_loopback_pair();
      std::thread th([&server, sc = std::move(sch)]() mutable {
        while (server.serve_session(*sc)) {
        }
      });
      Bytes junk;
      switch (frng.next_u64() % 6) {
        case 0: {  // pure garbage
          junk.resize(1 + frng.next_u64() % 256);
          for (auto& b : junk) b = (unsigned char)frng.next_u64();
          break;
        }
        case 1:  // zero-length frame
          junk = {0, 0, 0, 0};
          break;
        case 2:  // oversized declared length
          junk = {0xff, 0xff, 0xff, 0xff, 0x01};
          break;
        case 3: {  // unknown message type
          junk = {2, 0, 0, 0, (unsigned char)(6 + frng.next_u64() % 250), 0};
          break;
        }
        case 4: {  // valid type, garbage payload
          std::size_t plen = 1 + frng.next_u64() % 512;
          junk = {(unsigned char)((1 + plen) & 0xff), (unsigned char)(((1 + plen) >> 8) & 0xff),
                  0, 0, (unsigned char)(1 + frng.next_u64() % 5)};
          for (std::size_t i = 0; i < plen; ++i)
            junk.push_back((unsigned char)frng.next_u64());
          break;
        }
        default: {  // mutated slice of a genuine enrollment stream
          std::size_t len = 1 + frng.next_u64() % std::min<std::size_t>(valid_stream.size(), 4096);
          std::size_t off = frng.next_u64() % (valid_stream.size() - len + 1);
          junk.assign(valid_stream.begin() + off, valid_stream.begin() + off + len);
          for (int flips = 1 + frng.next_u64() % 8; flips > 0; --flips)
            junk[frng.next_u64() % junk.size()] ^= (unsigned char)(1 + frng.next_u64() % 255);
          break;
        }
      }
      try {
        cch->send(junk);
        cch->close();
      } catch (...) {
      }
      th.join();
      ++sessions;

      if (sessions % 64 == 0) {  // the server object must stay fully usable
        auto [hc, hs] = make_loopback_pair();
        std::thread hth([&server, sc = std::move(hs)]() mutable {
          while (server.serve_session(*sc)) {
          }
        });
        std::string id = "health-" + std::to_string(health_checks);
        client.enroll(*hc, id, {feats[0]}, opts, erng);
        auto res = client.verify(*hc, id, feats[0], 0.5, opts, erng);
        c.expect(res.accept, "health check after fuzzing failed to authenticate");
        hc->close();
        hth.join();
        ++health_checks;
      }
    }
    c.expect(store.size() == 1 + health_checks,
             "fuzz sessions altered the store (expected only seed + health enrollments)");
    std::remove(fpath.c_str());
  }
  std::printf("%s criterion 8: TCP == in-process integers, zero-knowledge tap clean, store "
              "restart byte-identical, %llu fuzz sessions in %d s with zero crashes%s%s\n",
              c.ok ? "PASS" : "FAIL", (unsigned long long)sessions, fuzz_seconds,
              c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

// ---------------------------------------------------------------------------
// criterion 9: noise budget after the full matching pipeline at every preset
// ---------------------------------------------------------------------------
bool criterion9() {
  Check c;
  SeedableRng rng(0xC9);
  int global_worst = 1 << 30;
  std::string worst_name;
  for (const auto& name : preset_names()) {
    EncryptionParams p = preset_params(name);
    SeedableRng krng(0xC9000 ^ std::hash<std::string>{}(name));
    KeySet k = make_keys(p, krng);
    const bool two_t = p.residue_count() > 1;
    const double delta = two_t ? 0.0025 : 0.01;
    const std::size_t d = std::min<std::size_t>(p.row_size(), 512);
    for (int trial = 0; trial < 3 && c.ok; ++trial) {
      auto qx = quantize(random_unit(d, rng), delta);
      auto qy = quantize(random_unit(d, rng), delta);
      auto ex = encrypt_template(qx, TemplateForm::batched, k.pk, p, rng);
      auto ey = encrypt_template(qy, TemplateForm::batched, k.pk, p, rng);
      MatchScore s = encrypted_inner_product_batched(ex, ey, k.ek, k.gks, p);
      int budget = 1 << 30;
      for (std::size_t r = 0; r < s.encrypted.size(); ++r) {
        int b = two_t ? noise_budget_residue(s.encrypted[r], k.sk, p, r)
                      : noise_budget(s.encrypted[r], k.sk, p);
        budget = std::min(budget, b);
      }
      c.expect(budget >= 1, name + ": pipeline noise budget " + std::to_string(budget) +
                                " below 1 bit");
      c.expect(decrypt_score_integer(s, k.sk, p) == int_dot(qx, qy),
               name + ": pipeline output inexact");
      if (budget < global_worst) {
        global_worst = budget;
        worst_name = name;
      }
    }
    if (!c.ok) break;
  }
  std::printf("%s criterion 9: noise budget >= 1 bit after multiply + full rotation ladder at "
              "all %zu presets (worst %d bits at %s)%s%s\n",
              c.ok ? "PASS" : "FAIL", preset_names().size(), global_worst, worst_name.c_str(),
              c.ok ? "" : " -- ", c.why.c_str());
  return c.ok;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  int fuzz_seconds = 60;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (arg == "--fuzz-seconds" && i + 1 < argc) {
      fuzz_seconds = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: acceptance [--only N] [--fuzz-seconds S]\n");
      return 2;
    }
  }
  auto t0 = Clock::now();
  bool all = true;
  auto run = [&](int n, auto&& fn) {
    if (only == 0 || only == n) all = fn() && all;
  };
  run(1, criterion1);
  run(2, criterion2);
  run(3, criterion3);
  run(4, criterion4);
  run(5, criterion5);
  run(6, criterion6);
  run(7, criterion7);
  run(8, [&] { return criterion8(fuzz_seconds); });
  run(9, criterion9);
  std::printf("%s (%.0f s total)\n", all ? "ALL ACCEPTANCE CRITERIA PASSED" : "ACCEPTANCE FAILED",
              seconds_since(t0));
  return all ? 0 : 1;
}
