#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <numeric>

#include "icpde/gradcheck.hpp"
#include "icpde/transformer.hpp"

using namespace icpde;
namespace fs = std::filesystem;

namespace {

// Fresh models predict zero by construction; give the readout life for tests
// that need a nontrivial function.
IclModel lively_model(std::uint64_t seed) {
  auto m = IclModel::random({}, seed);
  Rng rng(derive_seed(seed, 99, 0));
  for (std::size_t i = m.layout.ro_w; i < m.layout.total; ++i)
    m.theta[Eigen::Index(i)] = rng.uniform(-0.5, 0.5);
  return m;
}

struct Batch {
  Eigen::MatrixXd ctx_xt, qry_xt;
  Eigen::RowVectorXd ctx_u, targets;
};

Batch random_batch(std::uint64_t seed, Eigen::Index nc, Eigen::Index nq) {
  Rng rng(seed);
  Batch b;
  b.ctx_xt.resize(2, nc);
  b.qry_xt.resize(2, nq);
  b.ctx_u.resize(nc);
  b.targets.resize(nq);
  for (Eigen::Index i = 0; i < nc; ++i) {
    b.ctx_xt(0, i) = rng.uniform(0.0, kTwoPi);
    b.ctx_xt(1, i) = rng.uniform(0.0, 1.0);
    b.ctx_u(i) = rng.normal();
  }
  for (Eigen::Index i = 0; i < nq; ++i) {
    b.qry_xt(0, i) = rng.uniform(0.0, kTwoPi);
    b.qry_xt(1, i) = rng.uniform(0.0, 1.0);
    b.targets(i) = rng.normal();
  }
  return b;
}

}  // namespace

TEST_CASE("parameter counts: pieces and whole") {
  const ModelConfig cfg;
  REQUIRE(readout_parameter_count(cfg) == 33);
  REQUIRE(context_embedder_parameter_count(cfg) == 128);
  REQUIRE(query_embedder_parameter_count(cfg) == 96);

  const auto m = IclModel::random(cfg, 0);
  // per layer: 4 square projections with bias, the two ffn maps, four norm vectors
  const std::size_t h = cfg.hidden, f = cfg.ffn_width;
  const std::size_t layer = 4 * (h * h + h) + (h * f + f) + (f * h + h) + 4 * h;
  const std::size_t expected = 128 + 96 + cfg.layers * layer + 33;
  REQUIRE(count_parameters(m) == expected);
  REQUIRE(expected == 25889);
  // sizing band for the default configuration
  REQUIRE(count_parameters(m) >= 15000);
  REQUIRE(count_parameters(m) <= 30000);
  WARN("default model parameter count: " << count_parameters(m));
}

TEST_CASE("config validation rejects bad shapes") {
  auto kind = [](ModelConfig cfg) {
    try {
      cfg.validate();
      return std::string("none");
    } catch (const Error& e) {
      return std::string(e.kind());
    }
  };
  ModelConfig a;
  a.layers = 0;
  REQUIRE(kind(a) == "config");
  ModelConfig b;
  b.hidden = 30;
  b.heads = 4;
  REQUIRE(kind(b) == "config");
  ModelConfig c;
  c.lr = 0.0;
  REQUIRE(kind(c) == "config");
  REQUIRE(kind(ModelConfig{}) == "none");
}

TEST_CASE("a fresh model predicts exactly zero everywhere") {
  const auto m = IclModel::random({}, 3);
  const auto b = random_batch(17, 50, 20);
  const auto pred = model_forward(m, b.ctx_xt, b.ctx_u, b.qry_xt);
  REQUIRE(pred.size() == 20);
  REQUIRE(pred.isZero(0.0));
}

TEST_CASE("model construction is reproducible per seed") {
  const auto a = IclModel::random({}, 5);
  const auto b = IclModel::random({}, 5);
  const auto c = IclModel::random({}, 6);
  REQUIRE(a.theta == b.theta);
  REQUIRE(a.theta != c.theta);
}

TEST_CASE("permuting the context leaves predictions unchanged") {
  const auto m = lively_model(1);
  const auto b = random_batch(2, 64, 16);
  const auto base = model_forward(m, b.ctx_xt, b.ctx_u, b.qry_xt);

  Rng rng(8);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<std::size_t> perm(64);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    Eigen::MatrixXd pxt(2, 64);
    Eigen::RowVectorXd pu(64);
    for (Eigen::Index i = 0; i < 64; ++i) {
      pxt.col(i) = b.ctx_xt.col(Eigen::Index(perm[std::size_t(i)]));
      pu(i) = b.ctx_u(Eigen::Index(perm[std::size_t(i)]));
    }
    const auto pred = model_forward(m, pxt, pu, b.qry_xt);
    REQUIRE((pred - base).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("queries are independent: batched equals one at a time") {
  const auto m = lively_model(4);
  const auto b = random_batch(5, 48, 12);
  const auto batched = model_forward(m, b.ctx_xt, b.ctx_u, b.qry_xt);
  for (Eigen::Index i = 0; i < 12; ++i) {
    const auto single = model_forward(m, b.ctx_xt, b.ctx_u, b.qry_xt.col(i));
    REQUIRE(std::abs(single(0) - batched(i)) < 1e-12);
  }
}

TEST_CASE("permuting queries permutes outputs identically") {
  const auto m = lively_model(6);
  const auto b = random_batch(7, 40, 15);
  const auto base = model_forward(m, b.ctx_xt, b.ctx_u, b.qry_xt);
  Eigen::MatrixXd rev(2, 15);
  for (Eigen::Index i = 0; i < 15; ++i) rev.col(i) = b.qry_xt.col(14 - i);
  const auto flipped = model_forward(m, b.ctx_xt, b.ctx_u, rev);
  // gemm blocking shifts with column order, so equality is near-ulp, not bitwise
  for (Eigen::Index i = 0; i < 15; ++i)
    REQUIRE(std::abs(flipped(i) - base(14 - i)) < 1e-12);
}

TEST_CASE("empty context and shape mismatches are rejected") {
  const auto m = lively_model(9);
  const auto b = random_batch(10, 8, 4);
  auto kind = [&](auto fn) {
    try {
      fn();
      return std::string("none");
    } catch (const Error& e) {
      return std::string(e.kind());
    }
  };
  REQUIRE(kind([&] {
            model_forward(m, Eigen::MatrixXd(2, 0), Eigen::RowVectorXd(0), b.qry_xt);
          }) == "empty_context");
  REQUIRE(kind([&] {
            model_forward(m, b.ctx_xt, Eigen::RowVectorXd::Zero(3), b.qry_xt);
          }) == "shape_mismatch");
  REQUIRE(kind([&] { model_forward(m, b.ctx_xt, b.ctx_u, Eigen::MatrixXd(3, 4)); }) ==
          "shape_mismatch");
}

TEST_CASE("coordinate normalization is idempotent") {
  const auto b = random_batch(11, 30, 1);
  const Coords once = normalize_coords({b.ctx_xt, false});
  const Coords twice = normalize_coords(once);
  REQUIRE(once.normalized);
  REQUIRE(twice.xt == once.xt);
  REQUIRE(once.xt.row(0).minCoeff() >= -1.0);
  REQUIRE(once.xt.row(0).maxCoeff() <= 1.0);
  REQUIRE(once.xt.row(1).minCoeff() >= -1.0);
  REQUIRE(once.xt.row(1).maxCoeff() <= 1.0);
}

TEST_CASE("mse parameter gradients match finite differences") {
  auto m = lively_model(12);
  const auto b = random_batch(13, 24, 10);
  Eigen::VectorXd grad;
  model_loss_grad(m, b.ctx_xt, b.ctx_u, b.qry_xt, b.targets, grad);
  auto loss = [&](const Eigen::VectorXd& th) {
    IclModel probe = m;
    probe.theta = th;
    return model_loss(probe, b.ctx_xt, b.ctx_u, b.qry_xt, b.targets);
  };

  // hit every segment family plus random picks
  std::vector<Eigen::Index> idx;
  const auto& L = m.layout;
  for (std::size_t off : {L.ctx_w, L.ctx_b, L.qry_w + 3, L.qry_b, L.layer[0].wq + 5,
                          L.layer[0].bk, L.layer[1].wv + 40, L.layer[1].bo, L.layer[1].w1 + 7,
                          L.layer[2].b1 + 3, L.layer[2].w2 + 11, L.layer[2].b2,
                          L.layer[0].g1 + 2, L.layer[1].be1, L.layer[2].g2 + 9,
                          L.layer[0].be2 + 1, L.ro_w + 4, L.ro_b})
    idx.push_back(Eigen::Index(off));
  Rng rng(14);
  for (int i = 0; i < 12; ++i) idx.push_back(Eigen::Index(rng.uniform_index(L.total)));

  for (const auto i : idx) {
    const double fd = fd_gradient_at(loss, m.theta, i, 1e-5);
    REQUIRE_THAT(grad[i], Catch::Matchers::WithinRel(fd, 1e-5) ||
                              Catch::Matchers::WithinAbs(fd, 1e-8));
  }
}

TEST_CASE("zero training epochs leave the model untouched") {
  ParameterSpace space;
  space.set_values(ParameterSpace::kRho1, {1.0, 2.0});
  PinnConfig pc;
  pc.widths = {2, 8, 1};
  pc.max_epochs = 1;
  pc.steps_per_epoch = 1;
  const auto store = build_prior(space, 0.0, {}, pc);
  const auto sets = sample_all(store, 3);

  ModelConfig cfg;
  cfg.epochs = 0;
  const auto init = IclModel::random(cfg, 1);
  const auto res = train_model(init, store, sets, cfg);
  REQUIRE(res.epoch_loss.empty());
  REQUIRE(res.model.theta == init.theta);
}

TEST_CASE("training rejects misaligned stores and poisoned models diverge loudly") {
  ParameterSpace space;
  space.set_values(ParameterSpace::kRho1, {1.0, 2.0});
  PinnConfig pc;
  pc.widths = {2, 8, 1};
  pc.max_epochs = 1;
  pc.steps_per_epoch = 1;
  const auto store = build_prior(space, 0.0, {}, pc);
  auto sets = sample_all(store, 3);

  ModelConfig cfg;
  cfg.epochs = 5;
  auto short_sets = sets;
  short_sets.pop_back();
  try {
    train_model(IclModel::random(cfg, 1), store, short_sets, cfg);
    FAIL("expected config error");
  } catch (const Error& e) {
    REQUIRE(e.kind() == "config");
  }

  auto poisoned = IclModel::random(cfg, 1);
  poisoned.theta.setConstant(1e200);
  try {
    train_model(poisoned, store, sets, cfg);
    FAIL("expected non_finite_loss");
  } catch (const Error& e) {
    REQUIRE(e.kind() == "non_finite_loss");
    REQUIRE(std::string(e.what()).find("epoch 0") != std::string::npos);
    REQUIRE(std::string(e.what()).find("rho=(") != std::string::npos);
  }
}

TEST_CASE("zero-shot prediction is read-only and permutation invariant") {
  const auto m = lively_model(15);
  const Eigen::VectorXd before = m.theta;

  PointSet ctx, qry;
  const auto b = random_batch(16, 32, 9);
  ctx.xt = b.ctx_xt;
  ctx.u = b.ctx_u;
  qry.xt = b.qry_xt;
  const auto pred = predict_zero_shot(m, ctx, qry);
  REQUIRE(m.theta == before);
  REQUIRE(pred.size() == 9);

  PointSet rctx = ctx;
  for (Eigen::Index i = 0; i < 32; ++i) {
    rctx.xt.col(i) = ctx.xt.col(31 - i);
    rctx.u(i) = ctx.u(31 - i);
  }
  const auto pred2 = predict_zero_shot(m, rctx, qry);
  REQUIRE((pred2 - pred).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("checkpoints round-trip bit-exactly and reject damage") {
  auto m = lively_model(20);
  m.cfg.epochs = 1234;
  m.cfg.seed = 99;
  const fs::path dir = fs::temp_directory_path() / "icpde_model_ckpt";
  fs::create_directories(dir);
  const fs::path file = dir / "model.bin";
  save_model(m, file);

  const auto loaded = load_model(file);
  REQUIRE(loaded.theta == m.theta);
  REQUIRE(loaded.cfg.layers == m.cfg.layers);
  REQUIRE(loaded.cfg.hidden == m.cfg.hidden);
  REQUIRE(loaded.cfg.heads == m.cfg.heads);
  REQUIRE(loaded.cfg.ffn_width == m.cfg.ffn_width);
  REQUIRE(loaded.cfg.lr == m.cfg.lr);
  REQUIRE(loaded.cfg.epochs == 1234);
  REQUIRE(loaded.cfg.seed == 99);

  auto kind = [&](const fs::path& p) {
    try {
      load_model(p);
      return std::string("none");
    } catch (const Error& e) {
      return std::string(e.kind());
    }
  };

  std::ifstream in(file, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();

  auto spit = [](const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out.write(s.data(), std::streamsize(s.size()));
  };
  std::string truncated = bytes.substr(0, bytes.size() - 17);
  spit(dir / "truncated.bin", truncated);
  REQUIRE(kind(dir / "truncated.bin") == "data_format");

  std::string badver = bytes;
  badver[8] = 9;  // version field follows the 8-byte magic
  spit(dir / "badver.bin", badver);
  REQUIRE(kind(dir / "badver.bin") == "version_mismatch");

  std::string badmagic = bytes;
  badmagic[0] = 'X';
  spit(dir / "badmagic.bin", badmagic);
  REQUIRE(kind(dir / "badmagic.bin") == "data_format");
  REQUIRE(kind(dir / "noexist.bin") == "missing_file");
}

TEST_CASE("a short run on a tiny task cuts the loss by an order of magnitude") {
  ParameterSpace space;
  space.set_values(ParameterSpace::kRho1, {1.0, 2.0, 3.0});
  PinnConfig pc;  // unused at ratio 0
  const auto store = build_prior(space, 0.0, {}, pc);
  const auto sets = sample_all(store, 5);

  ModelConfig cfg;
  cfg.epochs = 2000;
  cfg.patience = 0;  // fixed-length smoke run
  cfg.seed = 7;
  const auto res = train_model(IclModel::random(cfg, derive_seed(7, 41, 0)), store, sets, cfg);
  REQUIRE(res.epoch_loss.size() == 2000);

  const auto mean_over = [&](std::size_t from, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = from; i < from + n; ++i) s += res.epoch_loss[i];
    return s / double(n);
  };
  const double first = mean_over(0, 100);
  const double last = mean_over(1900, 100);
  INFO("first-100 mean " << first << ", last-100 mean " << last);
  REQUIRE(last * 10.0 <= first);
}
