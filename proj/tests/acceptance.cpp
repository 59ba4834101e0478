// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "ocdl/alg1.hpp"
#include "ocdl/alg2.hpp"
#include "ocdl/csc.hpp"
#include "ocdl/ingest.hpp"
#include "ocdl/parallel.hpp"
#include "ocdl/persist.hpp"
#include "ocdl/spectral.hpp"
#include "ocdl/trainer.hpp"
#include "oracle/oracle.hpp"
#include "support.hpp"

using namespace ocdl;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    v.pass = false;
    v.detail += fmt("; over the %.0f s budget", budget_s);
  }
  if (!v.pass) ++failures;
  std::printf("criterion %d %s: %s (%s; %.2f s)\n", id, title, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
  std::fflush(stdout);
}

AdmmSettings tight() {
  AdmmSettings s;
  s.max_iter = 5000;
  s.eps_abs = 1e-10;
  s.eps_rel = 1e-10;
  return s;
}

// Relative residual of a K x K system assembled per frequency.
template <typename Assemble>
double worst_residual(std::size_t k, std::size_t freqs, Assemble assemble) {
  double worst = 0.0;
  for (std::size_t p = 0; p < freqs; ++p) {
    oracle::ComplexMatrix a(k * k);
    std::vector<Complex> b(k), x(k);
    assemble(p, a, b, x);
    worst = std::max(worst, oracle::relative_residual(a, x, b));
  }
  return worst;
}

Verdict linear_solves() {
  Rng rng(1001);
  const std::size_t h = 32, w = 32, freqs = h * w;
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::size_t k : {1u, 3u, 8u}) {
    const double rho = 0.1 + 10.0 * rng.uniform();
    const std::uint64_t n = 1 + rng() % 9;
    const double inv_n = 1.0 / static_cast<double>(n);
    const SpectrumSet x = test::random_spectra(k, h, w, rng);
    const SpectrumSet z = test::random_spectra(k, h, w, rng);
    const SpectrumSet q = test::random_spectra(k, h, w, rng);
    const SpectrumPlane s = test::random_spectrum(h, w, rng);
    const auto alpha = test::random_alpha(k, h, w, rng);
    const SpectrumSet beta = test::random_spectra(k, h, w, rng);

    const SpectrumSet f = alg1::f_update(x, z, s, q, n, rho);
    worst = std::max(worst, worst_residual(k, freqs, [&](std::size_t p, auto& a, auto& b, auto& sol) {
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          a[i * k + j] = std::conj(x[i][p]) * x[j][p] + (i == j ? std::norm(x[i][p]) + n * rho : 0.0);
        }
        b[i] = std::conj(x[i][p]) * (z[i][p] + s[p]) + static_cast<double>(n) * rho * q[i][p];
        sol[i] = f[i][p];
      }
    }));

    const SpectrumSet g1 = alg1::g_update(alpha, beta, q, rho);
    worst = std::max(worst, worst_residual(k, freqs, [&](std::size_t p, auto& a, auto& b, auto& sol) {
      for (std::size_t i = 0; i < k; ++i) {
        a[i * k + i] = alpha[i][p] + rho;
        b[i] = beta[i][p] + rho * q[i][p];
        sol[i] = g1[i][p];
      }
    }));

    const SpectrumSet g2 = alg2::g_update(x, s, alpha, beta, q, n, rho);
    worst = std::max(worst, worst_residual(k, freqs, [&](std::size_t p, auto& a, auto& b, auto& sol) {
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          a[i * k + j] = inv_n * std::conj(x[i][p]) * x[j][p] + (i == j ? alpha[i][p] + rho : 0.0);
        }
        b[i] = inv_n * std::conj(x[i][p]) * s[p] + beta[i][p] + rho * q[i][p];
        sol[i] = g2[i][p];
      }
    }));

    SpectrumSet chi;
    csc_frequency_solve(x, z, rho, chi);
    worst = std::max(worst, worst_residual(k, freqs, [&](std::size_t p, auto& a, auto& b, auto& sol) {
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) a[i * k + j] = std::conj(x[i][p]) * x[j][p] + (i == j ? rho : 0.0);
        b[i] = z[i][p];
        sol[i] = chi[i][p];
      }
    }));
    checked += freqs;
  }
  return {worst <= 1e-9, fmt("max relative residual %.2e over %zu frequencies per solver, K in {1,3,8}", worst, checked)};
}

double rel_err(const std::vector<ImagePlane>& a, const std::vector<ImagePlane>& b) {
  return test::max_abs_diff(a, b) / std::max(test::max_abs(b), 1e-300);
}
double rel_err(const SpectrumSet& a, const SpectrumSet& b) {
  return test::max_abs_diff(a, b) / std::max(test::max_abs(b), 1e-300);
}

Verdict histories() {
  Rng rng(1002);
  const std::size_t k = 3, h = 16, w = 16;
  std::vector<SpectrumSet> xs, fs, rs;
  for (int i = 0; i < 6; ++i) {
    xs.push_back(test::random_spectra(k, h, w, rng));
    fs.push_back(test::random_spectra(k, h, w, rng));
    rs.push_back(test::random_spectra(k, h, w, rng));
  }
  double worst = 0.0;
  std::vector<ImagePlane> alpha(k, ImagePlane(h, w));
  SpectrumSet beta(k, SpectrumPlane(h, w));
  HistoryPair tilde = HistoryPair::zeros(k, h, w);
  for (std::uint64_t n = 1; n <= 6; ++n) {
    const SpectrumSet& x = xs[n - 1];
    alpha = alg1::alpha_update(alpha, x, n);
    beta = alg1::beta_recompute(beta, x, fs[n - 1], n);
    tilde = alg2::history_update(tilde, x, rs[n - 1], n);

    std::vector<ImagePlane> sa(k, ImagePlane(h, w));
    SpectrumSet sb(k, SpectrumPlane(h, w)), tb(k, SpectrumPlane(h, w));
    for (std::uint64_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t p = 0; p < h * w; ++p) {
          sa[i][p] += std::norm(xs[j][i][p]);
          sb[i][p] += std::conj(xs[j][i][p]) * fs[j][i][p] * xs[j][i][p];
          tb[i][p] += std::conj(xs[j][i][p]) * rs[j][i][p];
        }
      }
    }
    auto scaled = [](auto v, double c) {
      for (auto& plane : v) {
        for (auto& e : plane.values()) e *= c;
      }
      return v;
    };
    const double one_over_n = 1.0 / static_cast<double>(n);
    const double one_over_n1 = 1.0 / static_cast<double>(n + 1);
    worst = std::max({worst, rel_err(alpha, scaled(sa, one_over_n)), rel_err(beta, scaled(sb, one_over_n)),
                      rel_err(tilde.alpha, scaled(sa, one_over_n1)), rel_err(tilde.beta, scaled(tb, one_over_n1))});
  }
  return {worst <= 1e-12, fmt("max relative deviation from batch sums %.2e over N = 1..6", worst)};
}

Verdict upper_bound() {
  Rng rng(1003);
  const std::size_t h = 16, w = 16, k = 3;
  int violations = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  int scaled_violations = 0;
  for (int t = 0; t < 100; ++t) {
    const FilterBank d = init_dictionary(k, 4, rng);
    const FilterBank c = init_dictionary(k, 4, rng);
    const CoefficientMaps x = test::random_maps(k, h, w, rng);
    const ImagePlane s = test::random_plane(h, w, rng);
    const double lhs = 2.0 * reconstruction_error(s, d, x);
    double split = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      ImagePlane a = oracle::spatial_synthesize(FilterBank{4, {d.filters[i]}}, {x[i]});
      const ImagePlane b = oracle::spatial_synthesize(FilterBank{4, {c.filters[i]}}, {x[i]});
      for (std::size_t p = 0; p < a.size(); ++p) a[p] -= b[p];
      split += squared_norm(a.values());
    }
    const double fit = 2.0 * reconstruction_error(s, c, x);
    const double slack = split + fit - lhs;
    worst_slack = std::min(worst_slack, slack / lhs);
    if (slack < 0.0) ++violations;
    if ((k + 1) * (split + fit) < lhs) ++scaled_violations;
  }
  return {violations == 0,
          fmt("%d/100 draws with negative slack, worst relative slack %.3f; with the Cauchy-Schwarz factor K+1 "
              "the bound fails on %d/100",
              violations, worst_slack, scaled_violations)};
}

Verdict csc_correctness() {
  Rng rng(1004);
  double worst_kkt = 0.0;
  for (int t = 0; t < 20; ++t) {
    const ImagePlane s = test::random_plane(16, 16, rng);
    const FilterBank d = init_dictionary(4, 4, rng);
    const double lam = (0.05 + 0.3 * rng.uniform()) * lambda_max(s, d);
    const CscResult r = csc_solve(s, d, lam, tight());
    const KktReport kkt = kkt_check(s, d, r.maps, lam);
    worst_kkt = std::max({worst_kkt, kkt.active_violation, kkt.inactive_violation});
  }
  bool zeros = true;
  for (int t = 0; t < 5; ++t) {
    const ImagePlane s = test::random_plane(16, 16, rng);
    const FilterBank d = init_dictionary(3, 4, rng);
    const double lmax = lambda_max(s, d);
    for (double f : {1.0, 1.5}) zeros = zeros && test::max_abs(csc_solve(s, d, f * lmax, AdmmSettings{}).maps) == 0.0;
  }
  FilterBank delta = test::zero_bank(1, 4);
  delta.filters[0](0, 0) = 1.0;
  const ImagePlane s = test::random_plane(16, 16, rng);
  const double lam = 0.3;
  const CscResult r = csc_solve(s, delta, lam, tight());
  double soft = 0.0;
  for (std::size_t p = 0; p < s.size(); ++p) soft = std::max(soft, std::abs(r.maps[0][p] - soft_threshold(s[p], lam)));
  return {worst_kkt <= 1e-3 && zeros && soft <= 1e-6,
          fmt("worst KKT violation %.2e lambda over 20 instances; lambda >= lambda_max zero maps: %s; delta "
              "dictionary vs soft threshold %.2e",
              worst_kkt, zeros ? "exact" : "NOT exact", soft)};
}

struct Planted {
  std::vector<ImagePlane> train;
  std::vector<ImagePlane> test;
};

Planted planted_corpus(std::size_t n_train, std::size_t n_test, std::size_t side, std::size_t k, std::size_t m,
                       double density, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  const FilterBank bank = init_dictionary(k, m, rng);
  const SpectrumSet spectra = bank_spectra(bank, side, side);
  auto draw = [&] {
    ImagePlane s = synthesize(spectra, forward_dft(test::sparse_maps(k, side, side, density, rng)));
    for (double& v : s.values()) v += sigma * rng.normal();
    return s;
  };
  Planted c;
  for (std::size_t i = 0; i < n_train; ++i) c.train.push_back(draw());
  for (std::size_t i = 0; i < n_test; ++i) c.test.push_back(draw());
  return c;
}

Verdict end_to_end() {
  const Planted corpus = planted_corpus(20, 5, 64, 16, 8, 0.005, 0.01, 1005);
  const MemorySource train_src(corpus.train), test_src(corpus.test);
  TrainOptions opt;
  opt.filters = 16;
  opt.filter_size = 8;
  opt.seed = 7;
  const FilterBank initial = Trainer(opt, 64, 64).dictionary();
  const TrainResult r1 = train_alg1(train_src, opt);
  const TrainResult r2 = train_alg2(train_src, opt);
  const double lam = r2.lambda;
  const double init_obj = evaluate(test_src, initial, lam, opt.csc).mean_objective;
  const double o1 = evaluate(test_src, r1.dictionary, lam, opt.csc).mean_objective;
  const double o2 = evaluate(test_src, r2.dictionary, lam, opt.csc).mean_objective;
  const bool pass = o1 <= 0.8 * init_obj && o2 <= 0.8 * init_obj && o2 <= 1.05 * o1 && r1.lambda == r2.lambda;
  return {pass, fmt("test objective initial %.5g, alg1 %.5g (%.3f x), alg2 %.5g (%.3f x), alg2/alg1 %.3f", init_obj,
                    o1, o1 / init_obj, o2, o2 / init_obj, o2 / o1)};
}

Verdict online_vs_batch() {
  const Planted corpus = planted_corpus(5, 0, 32, 8, 8, 0.01, 0.01, 1006);
  const MemorySource src(corpus.train);
  TrainOptions opt;
  opt.filters = 8;
  opt.filter_size = 8;
  opt.seed = 11;
  const FilterBank initial = Trainer(opt, 32, 32).dictionary();
  const TrainResult r1 = train_alg1(src, opt);
  const TrainResult r2 = train_alg2(src, opt);
  const double lam = r1.lambda;
  const oracle::BatchResult batch = oracle::batch_cdl_tiny(corpus.train, initial, lam, opt.csc, opt.dictionary);
  const double b = batch.mean_objective;
  const double o1 = evaluate(src, r1.dictionary, lam, opt.csc).mean_objective;
  const double o2 = evaluate(src, r2.dictionary, lam, opt.csc).mean_objective;
  const bool pass = b <= o1 && b <= o2 && o1 <= 1.35 * b && o2 <= 1.35 * b;
  return {pass, fmt("batch %.5g, alg1 %.5g (%.3f x batch), alg2 %.5g (%.3f x batch)", b, o1, o1 / b, o2, o2 / b)};
}

Verdict memory_contract() {
  const auto dir = test::temp_dir("acceptance_size");
  Rng rng(1007);
  bool ok = true;
  std::string detail;
  for (auto [k, h, w, m] : {std::array<std::size_t, 4>{8, 32, 32, 8}, {16, 64, 64, 8}}) {
    TrainOptions opt;
    opt.filters = k;
    opt.filter_size = m;
    opt.csc.max_iter = 20;
    opt.dictionary.max_iter = 20;
    Trainer t(opt, h, w);
    t.step(test::random_plane(h, w, rng));
    save_checkpoint(t.state(), dir / "c.ckpt");
    const auto actual = std::filesystem::file_size(dir / "c.ckpt");
    const std::uint64_t formula = kCheckpointHeaderBytes + kRngStateBytes + 8 * k * (m * m + 3 * h * w);
    ok = ok && actual == formula && checkpoint_size(k, h, w, m) == formula;
    detail += fmt("%s(K=%zu,%zux%zu,m=%zu) file %llu formula %llu", detail.empty() ? "" : "; ", k, h, w, m,
                  static_cast<unsigned long long>(actual), static_cast<unsigned long long>(formula));
  }
  std::filesystem::remove_all(dir);
  return {ok, detail};
}

Verdict preprocessing() {
  Rng rng(1008);
  double split = 0.0, dc = 0.0;
  for (int t = 0; t < 20; ++t) {
    ImagePlane s(8 + rng() % 57, 8 + rng() % 57);
    for (double& v : s.values()) v = rng.uniform();
    const HighpassSplit hp = tikhonov_highpass(s, 5.0);
    double mean = 0.0;
    for (std::size_t p = 0; p < s.size(); ++p) {
      split = std::max(split, std::abs(hp.lowpass[p] + hp.highpass[p] - s[p]));
      mean += hp.highpass[p];
    }
    dc = std::max(dc, std::abs(mean / static_cast<double>(s.size())));
  }
  ImagePlane c(40, 40);
  for (double& v : c.values()) v = 0.42;
  const double flat = test::max_abs(tikhonov_highpass(c, 5.0).highpass);
  return {split <= 1e-12 && dc <= 1e-12 && flat <= 1e-12,
          fmt("split error %.1e, |DC of highpass| %.1e, constant image highpass %.1e (reg = 5)", split, dc, flat)};
}

Verdict determinism() {
  Rng rng(1009);
  std::vector<ImagePlane> imgs;
  for (int i = 0; i < 6; ++i) imgs.push_back(test::random_plane(24, 24, rng));
  bool ok = true;
  std::string detail;
  for (Algorithm a : {Algorithm::alg1, Algorithm::alg2}) {
    TrainOptions opt;
    opt.algorithm = a;
    opt.filters = 6;
    opt.filter_size = 5;
    opt.seed = 42;
    auto run = [&](int threads) {
      set_num_threads(threads);
      Trainer t(opt, 24, 24);
      for (const auto& s : imgs) t.step(s);
      return encode_checkpoint(t.state());
    };
    const auto ref = run(1);
    const bool repeat = run(1) == ref;
    const bool threads = run(4) == ref && run(3) == ref;
    set_num_threads(1);
    Trainer first(opt, 24, 24);
    for (int i = 0; i < 3; ++i) first.step(imgs[i]);
    Trainer second(opt, decode_checkpoint(encode_checkpoint(first.state())));
    for (int i = 3; i < 6; ++i) second.step(imgs[i]);
    const bool resume = encode_checkpoint(second.state()) == ref;
    ok = ok && repeat && threads && resume;
    detail += fmt("%s%s: repeat %s, threads 1/3/4 %s, resume 3+3 %s", detail.empty() ? "" : "; ", algorithm_name(a),
                  repeat ? "identical" : "DIFFERENT", threads ? "identical" : "DIFFERENT",
                  resume ? "identical" : "DIFFERENT");
  }
  return {ok, detail};
}

}  // namespace

int main() {
  set_num_threads(1);
  criterion(1, "oracle equivalence of linear solves", 10, linear_solves);
  criterion(2, "history correctness", 5, histories);
  criterion(3, "upper-bound property", 10, upper_bound);
  criterion(4, "CSC correctness", 30, csc_correctness);
  criterion(5, "end-to-end learning", 600, end_to_end);
  criterion(6, "online-vs-batch gap", 300, online_vs_batch);
  criterion(7, "memory contract", 60, memory_contract);
  criterion(8, "preprocessing", 10, preprocessing);
  criterion(9, "determinism and resumption", 120, determinism);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
