// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Operator CLI: key generation, enrollment, authentication, server mode,
// benchmark sweeps, and accuracy evaluation.

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "hematch/feature_io.hpp"
#include "hematch/protocol.hpp"

namespace hm = hematch;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::uint64_t random_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

hm::Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return hm::Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, hm::ByteView data, bool secret = false) {
  int flags = O_CREAT | O_WRONLY | O_TRUNC;
  int fd = ::open(path.c_str(), flags, secret ? 0600 : 0644);
  if (fd < 0) throw std::runtime_error("cannot create '" + path + "'");
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      ::close(fd);
      throw std::runtime_error("write failed on '" + path + "'");
    }
    off += static_cast<std::size_t>(n);
  }
  ::close(fd);
}

/// Accepts a shipped preset name or a path to a serialized params file.
hm::EncryptionParams load_params(const std::string& spec) {
  auto names = hm::preset_names();
  if (std::find(names.begin(), names.end(), spec) != names.end())
    return hm::preset_params(spec);
  return hm::parse_params(read_file(spec));
}

struct KeyFiles {
  hm::EncryptionParams params;
  hm::ClientKeys keys;
};

KeyFiles load_key_files(const std::string& prefix) {
  KeyFiles kf{hm::parse_params(read_file(prefix + ".params")), {}};
  kf.keys.sk = hm::import_secret_key(read_file(prefix + ".secret"), kf.params);
  kf.keys.pub = hm::parse_public_bundle(read_file(prefix + ".public"), kf.params);
  return kf;
}

/// Smallest preset that fits d features at this delta; switches to the
/// two-prime plaintext modulus when the score range demands it.
hm::EncryptionParams pick_params(std::size_t d, int level, double delta) {
  auto p = hm::preset_for_dimension(d, level, false);
  try {
    hm::check_score_range(delta, p);
    return p;
  } catch (const std::invalid_argument&) {
    auto p2 = hm::preset_for_dimension(d, level, true);
    hm::check_score_range(delta, p2);
    return p2;
  }
}

/// Runs `fn(channel)` against either a TCP server at host:port or an
/// in-process server over the given store file.
void with_channel(const std::string& host, std::uint16_t port, const std::string& db,
                  const hm::EncryptionParams& params,
                  const std::function<void(hm::ByteChannel&)>& fn) {
  if (!db.empty()) {
    hm::TemplateStore store(db);
    hm::Server server(store, params);
    auto [client_ch, server_ch] = hm::make_loopback_pair();
    std::thread st([&server, ch = std::move(server_ch)] {
      while (server.serve_session(*ch)) {
      }
    });
    fn(*client_ch);
    client_ch->close();
    st.join();
    return;
  }
  auto ch = hm::tcp_connect(host, port);
  fn(*ch);
}

hm::MatchOptions make_options(const std::string& form, double delta) {
  hm::MatchOptions opts;
  opts.form = form == "elementwise" ? hm::TemplateForm::elementwise : hm::TemplateForm::batched;
  opts.delta = delta;
  return opts;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchRowSpec {
  std::size_t d;
  std::string preset;
};

void run_bench(const std::vector<BenchRowSpec>& rows, int reps, double delta,
               std::ostream& out) {
  out << "preset,lambda,d,n,log2q,path,status,reason,encrypt_ms,score_ms,decrypt_ms,total_ms,"
         "template_bytes,key_bytes\n";
  hm::SeedableRng rng(42);
  for (const auto& row : rows) {
    hm::EncryptionParams params = hm::preset_params(row.preset);
    std::string prefix = row.preset + "," + std::to_string(params.security_level()) + "," +
                         std::to_string(row.d) + "," + std::to_string(params.n()) + "," +
                         std::to_string(params.q().bit_length());
    // fixed unit pair for every path
    std::vector<double> fx(row.d), fy(row.d);
    for (auto& x : fx) x = rng.next_gaussian();
    for (auto& x : fy) x = rng.next_gaussian();
    auto ux = hm::normalize(fx);
    auto uy = hm::normalize(fy);

    try {
      hm::check_score_range(delta, params);
      if (row.d > params.n() / 2)
        throw std::invalid_argument("dimension exceeds row capacity " +
                                    std::to_string(params.n() / 2));
    } catch (const std::exception& e) {
      std::string reason = e.what();
      std::replace(reason.begin(), reason.end(), ',', ';');
      for (const char* path : {"batched", "elementwise", "plaintext_baseline"})
        out << prefix << "," << path << ",skipped," << reason << ",,,,,,\n";
      continue;
    }

    hm::SeedableRng krng(7);
    auto keys = hm::generate_client_keys(params, krng);
    std::size_t key_bytes = hm::serialize_public_bundle(keys.pub, params).size();
    auto qx = hm::quantize(ux, delta);
    auto qy = hm::quantize(uy, delta);

    for (auto form : {hm::TemplateForm::batched, hm::TemplateForm::elementwise}) {
      const char* path = form == hm::TemplateForm::batched ? "batched" : "elementwise";
      auto enrolled = hm::encrypt_template(qy, form, keys.pub.pk, params, rng);
      std::vector<double> enc_ms, score_ms, dec_ms, total_ms;
      std::size_t template_bytes = 0;
      for (int rep = -3; rep < reps; ++rep) {  // 3 warm-ups
        auto t0 = Clock::now();
        auto probe = hm::encrypt_template(qx, form, keys.pub.pk, params, rng);
        double e = ms_since(t0);
        auto t1 = Clock::now();
        auto s = hm::score(enrolled, probe, keys.pub.ek, keys.pub.gks, params);
        double sc = ms_since(t1);
        auto t2 = Clock::now();
        volatile std::int64_t sink = hm::decrypt_score_integer(s, keys.sk, params);
        (void)sink;
        double dc = ms_since(t2);
        if (rep >= 0) {
          enc_ms.push_back(e);
          score_ms.push_back(sc);
          dec_ms.push_back(dc);
          total_ms.push_back(e + sc + dc);
          if (template_bytes == 0) template_bytes = hm::template_byte_size(probe, params);
        }
      }
      out << prefix << "," << path << ",ok,," << median(enc_ms) << "," << median(score_ms)
          << "," << median(dec_ms) << "," << median(total_ms) << "," << template_bytes << ","
          << key_bytes << "\n";
    }

    // plaintext baseline: median per-pair time over batches of dots
    {
      std::vector<double> total_ms;
      constexpr int kInner = 2000;
      volatile double sink = 0;
      for (int rep = -3; rep < reps; ++rep) {
        auto t0 = Clock::now();
        double acc = 0;
        for (int it = 0; it < kInner; ++it) {
          double dot = 0;
          for (std::size_t j = 0; j < row.d; ++j) dot += ux[j] * uy[j];
          acc += dot;
        }
        sink = sink + acc;
        if (rep >= 0) total_ms.push_back(ms_since(t0) / kInner);
      }
      out << prefix << ",plaintext_baseline,ok,,0,0,0," << median(total_ms) << ",0,0\n";
    }
    out.flush();
  }
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalDataset {
  std::vector<std::vector<double>> vectors;  // unit vectors
  std::vector<std::uint32_t> labels;
};

EvalDataset load_dataset(const std::string& features_csv, const std::string& synthetic,
                         std::uint64_t seed) {
  EvalDataset ds;
  if (!features_csv.empty()) {
    auto records = hm::read_feature_csv_file(features_csv);
    if (records.empty()) throw std::runtime_error("feature CSV is empty");
    std::map<std::string, std::uint32_t> ids;
    for (auto& rec : records) {
      auto [it, fresh] = ids.emplace(rec.label, static_cast<std::uint32_t>(ids.size()));
      ds.labels.push_back(it->second);
      ds.vectors.push_back(hm::normalize(rec.features));
    }
    if (ids.size() < 2) throw std::runtime_error("evaluation needs at least 2 identities");
    return ds;
  }
  std::size_t ids = 200, samples = 5, dim = 512;
  if (!synthetic.empty()) {
    char x1, x2;
    std::istringstream ss(synthetic);
    if (!(ss >> ids >> x1 >> samples >> x2 >> dim) || x1 != 'x' || x2 != 'x' || !ss.eof())
      throw CLI::ValidationError("--synthetic", "expected <ids>x<samples>x<dim>");
  }
  if (ids < 2) throw std::runtime_error("evaluation needs at least 2 identities");
  auto g = hm::make_synthetic_gallery(ids, samples, dim, 0.35, seed);
  ds.vectors = std::move(g.vectors);
  ds.labels = std::move(g.labels);
  return ds;
}

/// Quantized integer scoring over all pairs. The encrypted pipeline computes
/// exactly these integers (its defining exactness property), so TAR/FAR for
/// the encrypted path is evaluated on them; fhe_checks random pairs are
/// additionally pushed through real encryption to re-verify the equality.
void eval_path(const std::string& path_name, const EvalDataset& ds, double delta,
               int fhe_checks, std::uint64_t seed, std::ostream& out) {
  std::size_t n = ds.vectors.size();
  std::vector<hm::QuantizedTemplate> qs;
  qs.reserve(n);
  for (const auto& v : ds.vectors) qs.push_back(hm::quantize(v, delta));
  std::vector<double> genuine, impostor;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      std::int64_t dot = 0;
      for (std::size_t j = 0; j < qs[a].dim; ++j) dot += qs[a].values[j] * qs[b].values[j];
      double dis = hm::dequantize_score(dot, delta);
      (ds.labels[a] == ds.labels[b] ? genuine : impostor).push_back(dis);
    }
  auto report = hm::evaluate_tar_far(genuine, impostor, hm::kFarPoints);
  for (const auto& row : report.rows)
    out << path_name << "," << delta << "," << row.far << "," << row.threshold << ","
        << row.tar << "\n";

  if (fhe_checks > 0) {
    std::size_t d = ds.vectors.front().size();
    auto params = pick_params(d, 128, delta);
    hm::SeedableRng rng(seed ^ 0x5eed);
    auto keys = hm::generate_client_keys(params, rng);
    for (int c = 0; c < fhe_checks; ++c) {
      std::size_t a = rng.next_u64() % n, b = rng.next_u64() % n;
      auto ea = hm::encrypt_template(qs[a], hm::TemplateForm::batched, keys.pub.pk, params, rng);
      auto eb = hm::encrypt_template(qs[b], hm::TemplateForm::batched, keys.pub.pk, params, rng);
      auto s = hm::score(ea, eb, keys.pub.ek, keys.pub.gks, params);
      std::int64_t got = hm::decrypt_score_integer(s, keys.sk, params);
      std::int64_t want = 0;
      for (std::size_t j = 0; j < qs[a].dim; ++j) want += qs[a].values[j] * qs[b].values[j];
      if (got != want)
        throw std::runtime_error("FHE spot check failed: encrypted score differs");
    }
  }
}

void run_eval(const EvalDataset& ds, const std::vector<double>& deltas, std::size_t pca_k,
              int fhe_checks, std::uint64_t seed, std::ostream& out) {
  out << "path,delta,far,threshold,tar\n";
  for (double delta : deltas) {
    // plaintext reference: float cosine dissimilarities
    {
      std::vector<double> genuine, impostor;
      for (std::size_t a = 0; a < ds.vectors.size(); ++a)
        for (std::size_t b = a + 1; b < ds.vectors.size(); ++b) {
          double dis = hm::cosine_dissimilarity(ds.vectors[a], ds.vectors[b]);
          (ds.labels[a] == ds.labels[b] ? genuine : impostor).push_back(dis);
        }
      auto report = hm::evaluate_tar_far(genuine, impostor, hm::kFarPoints);
      for (const auto& row : report.rows)
        out << "plaintext," << delta << "," << row.far << "," << row.threshold << ","
            << row.tar << "\n";
    }
    eval_path("encrypted", ds, delta, fhe_checks, seed, out);
    if (pca_k > 0) {
      auto model = hm::pca_fit(ds.vectors, pca_k);
      EvalDataset reduced;
      reduced.labels = ds.labels;
      for (const auto& v : ds.vectors) reduced.vectors.push_back(hm::pca_project(v, model));
      eval_path("encrypted_pca" + std::to_string(pca_k), reduced, delta, fhe_checks, seed, out);
    }
    out.flush();
  }
}

/// Routes --out: stdout when empty, else the named file.
struct OutStream {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit OutStream(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw std::runtime_error("cannot create '" + path + "'");
      os = &file;
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encrypted cosine-dissimilarity matching over an FV cryptosystem"};
  app.require_subcommand(1);

  // --- keygen ---
  auto* keygen = app.add_subcommand("keygen", "Generate secret/public/params files");
  std::string kg_params = "l128_n1024";
  std::string kg_out = "hematch_key";
  std::uint64_t kg_seed = 0;
  bool kg_seeded = false;
  keygen->add_option("--params", kg_params, "Preset name or params file")
      ->capture_default_str();
  keygen->add_option("--out", kg_out, "Output file prefix")->capture_default_str();
  keygen->add_option("--seed", kg_seed, "Deterministic key seed")->each([&](const std::string&) {
    kg_seeded = true;
  });

  // --- enroll ---
  auto* enroll = app.add_subcommand("enroll", "Enroll feature vectors from CSV");
  std::string en_keys, en_features, en_identity, en_host, en_db, en_form = "batched";
  std::uint16_t en_port = 7700;
  double en_delta = 0.01;
  std::uint64_t en_seed = 0;
  bool en_seeded = false;
  enroll->add_option("--keys", en_keys, "Key file prefix from keygen")->required();
  enroll->add_option("--features", en_features, "CSV of label,f1,...,fd rows")->required();
  enroll->add_option("--identity", en_identity,
                     "Enroll all rows under this identity (default: group by row label)");
  enroll->add_option("--host", en_host, "Server host (TCP mode)");
  enroll->add_option("--port", en_port, "Server port")->capture_default_str();
  enroll->add_option("--db", en_db, "Local store path (in-process server instead of TCP)");
  enroll->add_option("--delta", en_delta, "Quantization step")->capture_default_str();
  enroll->add_option("--form", en_form, "Template form: batched|elementwise")
      ->check(CLI::IsMember({"batched", "elementwise"}))
      ->capture_default_str();
  enroll->add_option("--seed", en_seed, "Deterministic encryption seed")
      ->each([&](const std::string&) { en_seeded = true; });

  // --- auth ---
  auto* auth = app.add_subcommand("auth", "Authenticate a probe feature vector");
  std::string au_keys, au_features, au_identity, au_host, au_db, au_form = "batched";
  std::uint16_t au_port = 7700;
  double au_delta = 0.01, au_threshold = 0.5;
  std::uint64_t au_seed = 0;
  bool au_seeded = false;
  int au_row = 0;
  auth->add_option("--keys", au_keys, "Key file prefix from keygen")->required();
  auth->add_option("--features", au_features, "CSV holding the probe row")->required();
  auth->add_option("--row", au_row, "Probe row index in the CSV")->capture_default_str();
  auth->add_option("--identity", au_identity, "Claimed identity (default: probe row label)");
  auth->add_option("--threshold", au_threshold, "Accept iff dissimilarity <= threshold")
      ->capture_default_str();
  auth->add_option("--host", au_host, "Server host (TCP mode)");
  auth->add_option("--port", au_port, "Server port")->capture_default_str();
  auth->add_option("--db", au_db, "Local store path (in-process server instead of TCP)");
  auth->add_option("--delta", au_delta, "Quantization step")->capture_default_str();
  auth->add_option("--form", au_form, "Template form: batched|elementwise")
      ->check(CLI::IsMember({"batched", "elementwise"}))
      ->capture_default_str();
  auth->add_option("--seed", au_seed, "Deterministic encryption seed")
      ->each([&](const std::string&) { au_seeded = true; });

  // --- serve ---
  auto* serve = app.add_subcommand("serve", "Run the matching server");
  std::string sv_params = "l128_n1024", sv_host = "0.0.0.0", sv_db;
  std::uint16_t sv_port = 7700;
  serve->add_option("--params", sv_params, "Preset name or params file")->capture_default_str();
  serve->add_option("--host", sv_host, "Bind address")->capture_default_str();
  serve->add_option("--port", sv_port, "Bind port")->capture_default_str();
  serve->add_option("--db", sv_db, "Store path")->required();

  // --- bench ---
  auto* bench = app.add_subcommand("bench", "Timing/size sweep (single-threaded)");
  int be_level = 128, be_reps = 10;
  double be_delta = 0.01;
  std::vector<std::size_t> be_dims;
  std::string be_out;
  bench->add_option("--level", be_level, "Security level: 128 or 192")
      ->check(CLI::IsMember({128, 192}))
      ->capture_default_str();
  bench->add_option("--reps", be_reps, "Repetitions per cell (>= 10)")
      ->check(CLI::Range(10, 1000000))
      ->capture_default_str();
  bench->add_option("--dims", be_dims, "Feature dimensions to bench (default 64 128 512 1024)");
  bench->add_option("--delta", be_delta, "Quantization step")->capture_default_str();
  bench->add_option("--out", be_out, "CSV output path (default stdout)");

  // --- eval ---
  auto* eval = app.add_subcommand("eval", "TAR@FAR accuracy report");
  std::string ev_features, ev_synthetic, ev_out;
  std::vector<double> ev_deltas{0.1, 0.01, 0.0025};
  std::size_t ev_pca_k = 0;
  int ev_fhe_checks = 2;
  std::uint64_t ev_seed = 42;
  eval->add_option("--features", ev_features, "CSV dataset (label,f1,...,fd)");
  eval->add_option("--synthetic", ev_synthetic, "Synthetic spec <ids>x<samples>x<dim>");
  eval->add_option("--deltas", ev_deltas, "Quantization steps to evaluate")
      ->capture_default_str();
  eval->add_option("--pca-k", ev_pca_k, "Also evaluate a PCA-reduced pipeline at this k");
  eval->add_option("--fhe-checks", ev_fhe_checks,
                   "Random pairs re-verified through real encryption per cell")
      ->capture_default_str();
  eval->add_option("--seed", ev_seed, "Synthetic dataset / spot-check seed")
      ->capture_default_str();
  eval->add_option("--out", ev_out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints help or the usage message
    return code == 0 ? 0 : 1;
  }

  try {
    if (*keygen) {
      auto params = load_params(kg_params);
      hm::SeedableRng rng(kg_seeded ? kg_seed : random_seed());
      auto keys = hm::generate_client_keys(params, rng);
      write_file(kg_out + ".params", hm::serialize_params(params));
      write_file(kg_out + ".public", hm::serialize_public_bundle(keys.pub, params));
      write_file(kg_out + ".secret", hm::export_secret_key(keys.sk, params), /*secret=*/true);
      std::cout << "wrote " << kg_out << ".secret (0600), " << kg_out << ".public, " << kg_out
                << ".params\n";
    } else if (*enroll) {
      if (en_db.empty() == en_host.empty())
        throw CLI::ValidationError("enroll", "need exactly one of --db or --host");
      auto kf = load_key_files(en_keys);
      auto records = hm::read_feature_csv_file(en_features);
      if (records.empty()) throw std::runtime_error("feature CSV is empty");
      std::map<std::string, std::vector<std::vector<double>>> groups;
      if (!en_identity.empty()) {
        for (auto& rec : records) groups[en_identity].push_back(rec.features);
      } else {
        for (auto& rec : records) groups[rec.label].push_back(rec.features);
      }
      hm::SeedableRng rng(en_seeded ? en_seed : random_seed());
      hm::Client client(kf.params, kf.keys);
      auto opts = make_options(en_form, en_delta);
      for (auto& [identity, feats] : groups) {
        with_channel(en_host, en_port, en_db, kf.params, [&](hm::ByteChannel& ch) {
          client.enroll(ch, identity, feats, opts, rng);
        });
        std::cout << "enrolled '" << identity << "' with " << feats.size() << " template"
                  << (feats.size() == 1 ? "" : "s") << "\n";
      }
    } else if (*auth) {
      if (au_db.empty() == au_host.empty())
        throw CLI::ValidationError("auth", "need exactly one of --db or --host");
      auto kf = load_key_files(au_keys);
      auto records = hm::read_feature_csv_file(au_features);
      if (au_row < 0 || static_cast<std::size_t>(au_row) >= records.size())
        throw std::runtime_error("--row out of range (CSV has " +
                                 std::to_string(records.size()) + " rows)");
      const auto& probe = records[static_cast<std::size_t>(au_row)];
      std::string identity = au_identity.empty() ? probe.label : au_identity;
      hm::SeedableRng rng(au_seeded ? au_seed : random_seed());
      hm::Client client(kf.params, kf.keys);
      hm::Client::VerifyResult result;
      with_channel(au_host, au_port, au_db, kf.params, [&](hm::ByteChannel& ch) {
        result = client.verify(ch, identity, probe.features, au_threshold,
                               make_options(au_form, au_delta), rng);
      });
      std::cout << (result.accept ? "accept" : "reject") << " identity=" << identity
                << " aggregate=" << result.aggregate << " scores=";
      for (std::size_t i = 0; i < result.dissimilarities.size(); ++i)
        std::cout << (i ? ";" : "") << result.dissimilarities[i];
      std::cout << "\n";
    } else if (*serve) {
      auto params = load_params(sv_params);
      hm::TemplateStore store(sv_db);
      hm::Server server(store, params);
      hm::TcpListener listener(sv_host, sv_port);
      std::cout << "listening on " << sv_host << ":" << listener.port() << " (store " << sv_db
                << ", " << store.size() << " identities)\n"
                << std::flush;
      hm::run_tcp_server(listener, server);
    } else if (*bench) {
      if (be_dims.empty()) be_dims = {64, 128, 512, 1024};
      std::vector<BenchRowSpec> rows;
      for (std::size_t d : be_dims) {
        auto p = hm::preset_for_dimension(d, be_level, false);
        rows.push_back({d, (be_level == 128 ? "l128_n" : "l192_n") + std::to_string(p.n())});
        if (d == 1024) {
          // the larger published row for the same dimension
          rows.push_back({d, (be_level == 128 ? "l128_n4096" : "l192_n4096")});
        }
      }
      OutStream out(be_out);
      run_bench(rows, be_reps, be_delta, *out.os);
    } else if (*eval) {
      if (!ev_features.empty() && !ev_synthetic.empty())
        throw CLI::ValidationError("eval", "--features and --synthetic are exclusive");
      auto ds = load_dataset(ev_features, ev_synthetic, ev_seed);
      OutStream out(ev_out);
      run_eval(ds, ev_deltas, ev_pca_k, ev_fhe_checks, ev_seed, *out.os);
    }
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
