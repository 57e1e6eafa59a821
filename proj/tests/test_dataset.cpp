#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "icpde/dataset.hpp"

using namespace icpde;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

PriorStore mixed_store() {
  ParameterSpace space;
  space.set_range(ParameterSpace::kBeta, 1, 5);
  PinnConfig cfg;
  cfg.widths = {2, 8, 1};
  cfg.max_epochs = 1;
  cfg.steps_per_epoch = 3;
  NoiseSpec noise{NoiseSpec::Kind::P2, 0.05, 3};
  return build_prior(space, 0.4, noise, cfg, {}, Grid{}, 6);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), std::streamsize(bytes.size()));
}

std::string error_kind(const fs::path& dir) {
  try {
    load_dataset(dir);
    return "none";
  } catch (const Error& e) {
    return e.kind();
  }
}

}  // namespace

TEST_CASE("digest helper matches a known vector") {
  // sha256("abc"), a published reference value.
  REQUIRE(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  REQUIRE(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("a saved store loads back bit-identically") {
  const auto store = mixed_store();
  const auto sets = sample_all(store, 77);
  const fs::path dir = fresh_dir("icpde_dataset_roundtrip");

  const auto manifest = save_dataset(store, sets, dir);
  REQUIRE(manifest.entries.size() == 5);
  REQUIRE(fs::exists(dir / "manifest.json"));
  REQUIRE(fs::exists(dir / "fields/alpha_0.csv"));

  const auto [loaded, loaded_sets] = load_dataset(dir);
  REQUIRE(loaded.size() == store.size());
  REQUIRE(loaded.grid == store.grid);
  REQUIRE(loaded.pinn_ratio == store.pinn_ratio);
  REQUIRE(loaded.noise.kind == store.noise.kind);
  REQUIRE(loaded.noise.level == store.noise.level);
  REQUIRE(loaded.noise.seed == store.noise.seed);
  REQUIRE(loaded.seed == store.seed);
  REQUIRE(loaded.ic.preset == store.ic.preset);
  REQUIRE(loaded.ic.mean == store.ic.mean);

  for (std::size_t i = 0; i < store.size(); ++i) {
    REQUIRE(loaded.params[i] == store.params[i]);
    REQUIRE(loaded.prior[i].provenance == store.prior[i].provenance);
    REQUIRE(loaded.prior[i].values == store.prior[i].values);
    REQUIRE(loaded.truth[i].values == store.truth[i].values);
    REQUIRE(loaded.prior[i].params == store.params[i]);
  }

  REQUIRE(loaded_sets.size() == sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    REQUIRE(loaded_sets[i].seed == sets[i].seed);
    REQUIRE(loaded_sets[i].context.node == sets[i].context.node);
    REQUIRE(loaded_sets[i].train_query.node == sets[i].train_query.node);
    REQUIRE(loaded_sets[i].test_context.node == sets[i].test_context.node);
    REQUIRE(loaded_sets[i].test_query.node == sets[i].test_query.node);
    REQUIRE(loaded_sets[i].context.u == sets[i].context.u);
    REQUIRE(loaded_sets[i].test_query.u == sets[i].test_query.u);
    REQUIRE(loaded_sets[i].context.xt == sets[i].context.xt);
  }
}

TEST_CASE("a truncated field file fails its digest check") {
  const auto store = mixed_store();
  const auto sets = sample_all(store, 1);
  const fs::path dir = fresh_dir("icpde_dataset_truncated");
  save_dataset(store, sets, dir);

  auto bytes = slurp(dir / "fields/alpha_2.csv");
  bytes.resize(bytes.size() / 2);
  spit(dir / "fields/alpha_2.csv", bytes);
  REQUIRE(error_kind(dir) == "digest_mismatch");
}

TEST_CASE("a missing field file is reported as such") {
  const auto store = mixed_store();
  const auto sets = sample_all(store, 1);
  const fs::path dir = fresh_dir("icpde_dataset_missing");
  save_dataset(store, sets, dir);
  fs::remove(dir / "fields/alpha_4.csv");
  REQUIRE(error_kind(dir) == "missing_file");
  REQUIRE(error_kind(fresh_dir("icpde_dataset_nowhere")) == "missing_file");
}

TEST_CASE("an unknown format version is rejected") {
  const auto store = mixed_store();
  const auto sets = sample_all(store, 1);
  const fs::path dir = fresh_dir("icpde_dataset_version");
  save_dataset(store, sets, dir);

  auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
  j["format_version"] = 99;
  spit(dir / "manifest.json", j.dump(2));
  REQUIRE(error_kind(dir) == "version_mismatch");
}

TEST_CASE("a garbled manifest is a format error") {
  const fs::path dir = fresh_dir("icpde_dataset_garbled");
  fs::create_directories(dir);
  spit(dir / "manifest.json", "{not json");
  REQUIRE(error_kind(dir) == "data_format");
}

TEST_CASE("a valid digest over malformed rows still fails parsing") {
  const auto store = mixed_store();
  const auto sets = sample_all(store, 1);
  const fs::path dir = fresh_dir("icpde_dataset_badrows");
  save_dataset(store, sets, dir);

  // Corrupt one row, then re-seal the digest so only the parser can object.
  const fs::path f = dir / "fields/alpha_0.csv";
  auto bytes = slurp(f);
  const auto pos = bytes.find('\n', bytes.find('\n') + 1);  // end of first data row
  bytes.replace(bytes.find('\n') + 1, pos - bytes.find('\n') - 1, "0,0,broken");
  spit(f, bytes);
  auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
  j["entries"][0]["digest"] = sha256_hex(bytes);
  spit(dir / "manifest.json", j.dump(2));
  REQUIRE(error_kind(dir) == "data_format");
}

TEST_CASE("saving rejects sets that do not line up with the store") {
  const auto store = mixed_store();
  auto sets = sample_all(store, 1);
  sets.pop_back();
  const fs::path dir = fresh_dir("icpde_dataset_mismatch");
  try {
    save_dataset(store, sets, dir);
    FAIL("expected config error");
  } catch (const Error& e) {
    REQUIRE(e.kind() == "config");
  }
}
