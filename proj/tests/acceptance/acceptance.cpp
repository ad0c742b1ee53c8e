// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "hhash/baselines.hpp"
#include "hhash/dataio.hpp"
#include "hhash/householder.hpp"
#include "hhash/losses.hpp"
#include "hhash/random.hpp"
#include "hhash/retrieval.hpp"
#include "hhash/trainer.hpp"
#include "support/oracles.hpp"

namespace {

using namespace hhash;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

template <typename... Args>
std::string format(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

Matrix signs_of(const Matrix& m) {
  return m.unaryExpr([](double x) { return sign_pm1(x); });
}

bool near_kink(const Matrix& z) {
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double x = z.data()[i];
    if (std::abs(x) < 1e-3 || std::abs(std::abs(x) - 1.0) < 1e-3) return true;
  }
  return false;
}

// Orthogonality of random stacks, 64-bit arithmetic.
Outcome orthogonality_suite() {
  const auto start = Clock::now();
  double worst = 0.0;
  int count = 0;
  for (int k : {2, 8, 16, 32, 64}) {
    for (int i = 0; i < 100; ++i, ++count) {
      const auto seed = static_cast<std::uint64_t>(k) * 1000 + static_cast<std::uint64_t>(i);
      worst = std::max(worst, orthogonality_error(stack_to_matrix(random_stack(k, seed))));
    }
  }
  const double t = seconds_since(start);
  return {worst < 1e-8 && t < 10.0,
          format("max |U^T U - I| = %.3g over %d stacks (< 1e-8), %.2f s (< 10 s)", worst, count, t)};
}

// decompose -> recompose for random orthogonal matrices.
Outcome decomposition_roundtrip() {
  double worst = 0.0;
  for (int k = 2; k <= 16; ++k) {
    Rng rng(static_cast<std::uint64_t>(k) + 17);
    for (int i = 0; i < 100; ++i) {
      const Matrix u = random_orthogonal(k, rng);
      worst = std::max(worst, (stack_to_matrix(decompose_orthogonal(u)) - u).cwiseAbs().maxCoeff());
    }
  }
  return {worst < 1e-8, format("max recomposition error %.3g over 1500 matrices (< 1e-8)", worst)};
}

// Inner products, cosine similarities and cosine rankings survive rotation.
Outcome similarity_preservation() {
  Rng rng(4);
  double worst_inner = 0.0, worst_cos = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int k = 2 + i % 63;
    const HouseholderStack s = random_stack(k, static_cast<std::uint64_t>(i) + 5000);
    const Matrix pair = gaussian_matrix(2, k, rng);
    const Matrix rot = apply_stack(s, pair);
    const double before = pair.row(0).dot(pair.row(1));
    const double after = rot.row(0).dot(rot.row(1));
    const double cos_before = before / (pair.row(0).norm() * pair.row(1).norm());
    const double cos_after = after / (rot.row(0).norm() * rot.row(1).norm());
    const double scale = std::max(pair.row(0).norm() * pair.row(1).norm(), 1e-300);
    worst_inner = std::max(worst_inner, std::abs(after - before) / std::max(std::abs(before), 1e-12 * scale));
    worst_cos = std::max(worst_cos, std::abs(cos_after - cos_before) / std::max(std::abs(cos_before), 1e-12));
  }

  const int k = 16;
  const Matrix queries = gaussian_matrix(50, k, rng);
  const Matrix db = gaussian_matrix(500, k, rng);
  const HouseholderStack s = random_stack(k, 99);
  const Matrix q_rot = apply_stack(s, queries), db_rot = apply_stack(s, db);
  int exact = 0, tied = 0, mismatched = 0;
  for (int q = 0; q < 50; ++q) {
    auto ranking = [&](const Matrix& d, const Matrix& qs) {
      std::vector<std::pair<double, int>> sims;
      for (int j = 0; j < d.rows(); ++j)
        sims.emplace_back(-d.row(j).dot(qs.row(q)) / (d.row(j).norm() * qs.row(q).norm()), j);
      std::sort(sims.begin(), sims.end());
      return sims;
    };
    const auto before = ranking(db, queries), after = ranking(db_rot, q_rot);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < before.size(); ++j) gap = std::min(gap, before[j].first - before[j - 1].first);
    bool same = true;
    for (std::size_t j = 0; j < before.size(); ++j) same = same && before[j].second == after[j].second;
    if (gap > 1e-9) {
      ++exact;
      if (!same) ++mismatched;
    } else {
      ++tied;
    }
  }
  const bool pass = worst_inner < 1e-6 && worst_cos < 1e-6 && mismatched == 0;
  return {pass, format("inner rtol %.2g, cosine rtol %.2g (< 1e-6); %d/%d gap-separated rankings "
                       "identical, %d with gaps <= 1e-9",
                       worst_inner, worst_cos, exact - mismatched, exact, tied)};
}

// Analytic gradients against central differences.
Outcome gradient_checks() {
  constexpr LossKind kinds[] = {LossKind::L2, LossKind::L1, LossKind::MIN_ENTRY, LossKind::BIT_VAR};
  constexpr double step = 1e-5, rtol = 1e-4;
  Rng rng(5);
  double worst_loss[4] = {0, 0, 0, 0};
  double worst_stack = 0.0;
  int instances = 0;
  while (instances < 20) {
    const Matrix z = 1.5 * gaussian_matrix(4, 8, rng);
    if (near_kink(z)) continue;
    ++instances;
    for (int i = 0; i < 4; ++i) {
      const LossKind kind = kinds[i];
      const Matrix numeric = testing::central_difference([&](const Matrix& x) { return loss_value(kind, x); }, z, step);
      worst_loss[i] = std::max(worst_loss[i], testing::max_relative_error(loss_grad(kind, z), numeric));
    }
  }
  instances = 0;
  while (instances < 20) {
    const Matrix vectors = gaussian_matrix(8, 8, rng);
    const Matrix x = 1.5 * gaussian_matrix(4, 8, rng);
    const HouseholderStack s(vectors);
    const Matrix z = apply_stack(s, x);
    if (near_kink(z)) continue;
    ++instances;
    for (LossKind kind : kinds) {
      const auto analytic = stack_backprop(s, x, loss_grad(kind, z));
      const Matrix dv = testing::central_difference(
          [&](const Matrix& v) { return loss_value(kind, apply_stack(HouseholderStack(v), x)); }, vectors, step);
      const Matrix dx = testing::central_difference(
          [&](const Matrix& in) { return loss_value(kind, apply_stack(s, in)); }, x, step);
      worst_stack = std::max({worst_stack, testing::max_relative_error(analytic.vectors, dv),
                              testing::max_relative_error(analytic.input, dx)});
    }
  }
  const double worst = std::max({worst_loss[0], worst_loss[1], worst_loss[2], worst_loss[3], worst_stack});
  return {worst < rtol, format("max rel err l2 %.2g, l1 %.2g, min-entry %.2g, bit-var %.2g, stack backprop %.2g "
                               "(< 1e-4, 20 instances each)",
                               worst_loss[0], worst_loss[1], worst_loss[2], worst_loss[3], worst_stack)};
}

// Four points on the axes; the 45 degree rotation is optimal.
Outcome closed_form_2d() {
  const double r = std::sqrt(2.0);
  Matrix x(4, 2);
  x << r, 0, -r, 0, 0, r, 0, -r;
  const double at_identity = loss_value(LossKind::L2, x);
  const double at_optimum = loss_value(LossKind::L2, x * testing::rotation2d(M_PI / 4).transpose());
  const auto start = Clock::now();
  const FitResult fitted = fit(EmbeddingSet(x), TrainConfig{});
  const double t = seconds_since(start);
  const bool pass = fitted.report.final_loss < 1e-2 && t < 5.0 &&
                    std::abs(at_identity - (4 - 2 * r)) < 1e-12 && at_optimum < 1e-12;
  return {pass, format("trained loss %.3g (< 1e-2) in %.2f s (< 5 s); identity loss %.6f (4-2sqrt2), "
                       "45deg loss %.2g",
                       fitted.report.final_loss, t, at_identity, at_optimum)};
}

struct HypercubeRun {
  double trained_loss, identity_loss, best_random_loss;
  double map_rotated, map_identity;
};

HypercubeRun run_hypercube(double sigma, bool with_random_baseline) {
  SynthConfig cfg;
  cfg.n_per_class = 256;
  cfg.num_classes = 8;
  cfg.k = 16;
  cfg.noise_sigma = sigma;
  cfg.planted_rotation_seed = 21;
  cfg.sample_seed = 22;
  const SynthData data = generate_rotated_hypercube(cfg);
  const Matrix normalized = normalize_rows(data.train.data);

  HypercubeRun out{};
  const FitResult fitted = fit(data.train, TrainConfig{});
  out.trained_loss = fitted.report.final_loss;
  out.identity_loss = loss_value(LossKind::L2, normalized);
  out.best_random_loss = std::numeric_limits<double>::infinity();
  if (with_random_baseline) {
    for (int i = 0; i < 200; ++i) {
      const HouseholderStack s = random_rotation_baseline(16, 1000 + static_cast<std::uint64_t>(i));
      out.best_random_loss = std::min(out.best_random_loss, loss_value(LossKind::L2, apply_stack(s, normalized)));
    }
  }
  out.map_rotated = map_at_k(data.query, sign_binarize(data.query, &fitted.stack), data.database,
                             sign_binarize(data.database, &fitted.stack), 100)
                        .map_at_k;
  out.map_identity =
      map_at_k(data.query, sign_binarize(data.query), data.database, sign_binarize(data.database), 100).map_at_k;
  return out;
}

// Planted rotated hypercube, sizes 2048 / 256 / 1024.
Outcome hypercube_recovery() {
  const auto start = Clock::now();
  const HypercubeRun noisy = run_hypercube(0.1, true);
  const HypercubeRun clean = run_hypercube(0.0, false);
  const double t = seconds_since(start);
  const bool a = noisy.trained_loss < noisy.identity_loss && noisy.trained_loss < noisy.best_random_loss;
  const bool b = noisy.map_rotated >= noisy.map_identity;
  const bool c = clean.map_rotated == 1.0;
  return {a && b && c && t < 120.0,
          format("(a) loss %.4f < identity %.4f and < best-of-200 random %.4f; (b) mAP@100 %.4f >= identity "
                 "%.4f; (c) sigma=0 mAP@100 = %.17g; %.1f s (< 120 s)",
                 noisy.trained_loss, noisy.identity_loss, noisy.best_random_loss, noisy.map_rotated,
                 noisy.map_identity, clean.map_rotated, t)};
}

// ITQ objective is monotone; both pipelines write valid files and neither
// affects the other.
Outcome itq_pipeline() {
  SynthConfig cfg;
  cfg.n_per_class = 256;
  cfg.planted_rotation_seed = 31;
  cfg.sample_seed = 32;
  const SynthData data = generate_rotated_hypercube(cfg);
  ItqConfig icfg;
  icfg.seed = 3;
  const ItqResult itq = itq_fit(data.train, icfg);
  int increases = 0;
  for (std::size_t t = 1; t < itq.objective.size(); ++t)
    if (itq.objective[t] > itq.objective[t - 1] * (1 + 1e-12) + 1e-12) ++increases;

  const fs::path dir = fs::temp_directory_path() / "hhash_acceptance_itq";
  fs::create_directories(dir);
  auto pipeline = [&](const HouseholderStack& stack, const std::string& tag) {
    write_rot1(dir / (tag + ".rot"), stack);
    const HouseholderStack loaded = read_rot1(dir / (tag + ".rot"));
    write_hsh1(dir / (tag + "_q.hsh"), sign_binarize(data.query, &loaded));
    write_hsh1(dir / (tag + "_d.hsh"), sign_binarize(data.database, &loaded));
    return map_at_k(data.query, read_hsh1(dir / (tag + "_q.hsh")), data.database,
                    read_hsh1(dir / (tag + "_d.hsh")), 100)
        .map_at_k;
  };
  const double itq_map = pipeline(itq.to_stack(), "itq");
  const double learned_map = pipeline(fit(data.train, TrainConfig{}).stack, "learned");
  const double itq_again = pipeline(itq_fit(data.train, icfg).to_stack(), "itq2");
  const bool files_identical = read_file(dir / "itq_d.hsh") == read_file(dir / "itq2_d.hsh");
  fs::remove_all(dir);
  const bool pass = itq.objective.size() == 50 && increases == 0 && itq_map == itq_again && files_identical;
  return {pass, format("%zu iterations, %d increases, objective %.4f -> %.4f; mAP@100 ITQ %.4f, learned %.4f; "
                       "ITQ rerun after learned fit identical: %s",
                       itq.objective.size(), increases, itq.objective.front(), itq.objective.back(), itq_map,
                       learned_map, files_identical ? "yes" : "no")};
}

// Packed Hamming identity and bit-exact mAP against a brute-force oracle.
Outcome hamming_and_map_oracle() {
  Rng rng(9);
  int hamming_mismatch = 0, map_mismatch = 0;
  std::uniform_int_distribution<int> width(1, 64), label(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = width(rng);
    const Matrix s = signs_of(gaussian_matrix(2, k, rng));
    const BitCodeSet c = BitCodeSet::from_signs(s);
    const double inner = s.row(0).dot(s.row(1));
    if (hamming_distance(c.row(0), c.row(1), k) != static_cast<int>((k - inner) / 2)) ++hamming_mismatch;

    auto labels = [&](int n) {
      std::vector<LabelSet> out(static_cast<std::size_t>(n));
      for (auto& l : out) {
        l = {static_cast<std::uint32_t>(label(rng))};
        if (label(rng) == 0) l.push_back(static_cast<std::uint32_t>(label(rng)));
        canonicalize(l);
      }
      return out;
    };
    const int bits = 8;
    const EmbeddingSet q(gaussian_matrix(5, bits, rng), labels(5));
    const EmbeddingSet d(gaussian_matrix(20, bits, rng), labels(20));
    const HouseholderStack stack = random_stack(bits, static_cast<std::uint64_t>(trial));
    const BitCodeSet qc = sign_binarize(q, &stack), dc = sign_binarize(d, &stack);
    const int k_eval = 1 + trial % 20;
    const RetrievalResult r = map_at_k(q, qc, d, dc, k_eval);
    double sum = 0.0;
    for (int i = 0; i < q.n(); ++i) {
      const auto order = testing::brute_force_ranking(qc.unpack(), i, dc.unpack(), q.data, d.data);
      std::vector<int> rel;
      for (int idx : order) {
        bool hit = false;
        for (auto a : (*q.labels)[i])
          for (auto b : (*d.labels)[idx]) hit = hit || a == b;
        rel.push_back(hit);
      }
      sum += testing::literal_average_precision(rel, k_eval);
    }
    if (r.map_at_k != sum / q.n()) ++map_mismatch;
  }
  return {hamming_mismatch == 0 && map_mismatch == 0,
          format("200 instances: %d Hamming identity mismatches, %d mAP mismatches vs brute force",
                 hamming_mismatch, map_mismatch)};
}

// Hashing throughput and fitting time at k = 64.
Outcome performance_envelope() {
  SynthConfig cfg;
  cfg.k = 64;
  cfg.num_classes = 100;
  cfg.n_per_class = 200;
  cfg.planted_rotation_seed = 41;
  cfg.sample_seed = 42;
  cfg.noise_sigma = 0.3;
  const SynthData data = generate_rotated_hypercube(cfg);
  const auto fit_start = Clock::now();
  const FitResult fitted = fit(data.train, TrainConfig{});
  const double fit_time = seconds_since(fit_start);

  Rng rng(43);
  const Matrix big = gaussian_matrix(1000000, 64, rng);
  const auto hash_start = Clock::now();
  const BitCodeSet codes = sign_binarize(big, &fitted.stack);
  const double hash_time = seconds_since(hash_start);
  return {hash_time < 5.0 && fit_time < 600.0 && codes.n() == 1000000 && data.train.n() == 20000,
          format("hash 1e6 x 64: %.2f s (< 5 s); fit 20000 x 64, 300 epochs: %.1f s (< 600 s)", hash_time,
                 fit_time)};
}

// Fixed seeds give byte-identical files from every generating subcommand.
Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "hhash_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&](const std::string& name) { return (dir / name).string(); };
  std::ostringstream sink;
  int failures = 0;
  auto run = [&](std::vector<std::string> args) { failures += cli::run(args, sink, sink) != 0; };
  for (const std::string tag : {"a_", "b_"}) {
    run({"synth", "--out-prefix", p(tag), "--n-per-class", "64", "--bits", "16", "--sigma", "0.2", "--seed", "8"});
    run({"fit", "--embeddings", p(tag + "train.emb"), "--epochs", "20", "--seed", "4", "--out", p(tag + "f.rot")});
    run({"itq", "--embeddings", p(tag + "train.emb"), "--seed", "4", "--out", p(tag + "i.rot")});
    run({"hash", "--embeddings", p(tag + "database.emb"), "--rotation", p(tag + "f.rot"), "--out",
         p(tag + "f.hsh")});
    run({"hash", "--embeddings", p(tag + "database.emb"), "--rotation", p(tag + "i.rot"), "--out",
         p(tag + "i.hsh")});
  }
  int compared = 0, differing = 0;
  for (const char* name : {"train.emb", "train.labels", "query.emb", "query.labels", "database.emb",
                           "database.labels", "planted.rot", "f.rot", "i.rot", "f.hsh", "i.hsh"}) {
    ++compared;
    if (read_file(p(std::string("a_") + name)) != read_file(p(std::string("b_") + name))) ++differing;
  }
  fs::remove_all(dir);
  return {failures == 0 && differing == 0,
          format("%d files compared across two runs, %d differ, %d command failures", compared, differing, failures)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {"AC2", "orthogonality", orthogonality_suite},
      {"AC3", "householder decomposition roundtrip", decomposition_roundtrip},
      {"AC4", "inner-product and ranking preservation", similarity_preservation},
      {"AC5", "gradient checks", gradient_checks},
      {"AC6", "2d closed-form recovery", closed_form_2d},
      {"AC7", "rotated-hypercube recovery", hypercube_recovery},
      {"AC8", "ITQ monotonicity and pipelines", itq_pipeline},
      {"AC9", "hamming identity and mAP oracle", hamming_and_map_oracle},
      {"AC10", "performance envelope", performance_envelope},
      {"AC11", "determinism", determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %s %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  // Absolute benchmark mAP values need CNN training on image datasets; the
  // property and synthetic checks above stand in for them.
  std::printf("[%s] AC1 desk-scale substitution: %d of %zu substitute criteria pass\n", failed == 0 ? "PASS" : "FAIL",
              static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
