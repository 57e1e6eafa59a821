#pragma once

// On-disk dataset: manifest.json describing the prior store plus one CSV per
// alpha (x,t,u_prior,u_truth at 17 significant digits, rows in node order
// it*nx+ix). Digests are SHA-256 of the raw file bytes; sampled sets are
// reconstructed from their recorded seeds on load.

#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "icpde/prior.hpp"

namespace icpde {

inline constexpr int kDatasetFormatVersion = 1;

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  static const char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

struct DatasetManifest {
  struct Entry {
    std::string file;
    std::string digest;
    Provenance provenance = Provenance::numerical;
    CdrParams params;
    std::uint64_t sample_seed = 0;
  };

  int format_version = kDatasetFormatVersion;
  Grid grid;
  InitialCondition ic;
  double pinn_ratio = 0.0;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  std::vector<Entry> entries;
};

namespace detail {

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing_file", "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

inline void append_g17(std::string& buf, double v) {
  char num[32];
  std::snprintf(num, sizeof num, "%.17g", v);
  buf += num;
}

inline std::string field_csv(const SolutionField& prior, const SolutionField& truth) {
  const Grid& g = prior.grid;
  std::string buf;
  buf.reserve(g.nx * g.nt * 80 + 32);
  buf += "x,t,u_prior,u_truth\n";
  for (std::size_t it = 0; it < g.nt; ++it)
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      append_g17(buf, g.x(ix));
      buf += ',';
      append_g17(buf, g.t(it));
      buf += ',';
      append_g17(buf, prior.values(Eigen::Index(ix), Eigen::Index(it)));
      buf += ',';
      append_g17(buf, truth.values(Eigen::Index(ix), Eigen::Index(it)));
      buf += '\n';
    }
  return buf;
}

// Parses one CSV body into the prior/truth value matrices, checking the x,t
// columns against the grid bit-exactly.
inline void parse_field_csv(const std::string& bytes, const Grid& g, const std::string& name,
                            Eigen::MatrixXd& prior, Eigen::MatrixXd& truth) {
  prior.resize(Eigen::Index(g.nx), Eigen::Index(g.nt));
  truth.resize(Eigen::Index(g.nx), Eigen::Index(g.nt));

  const char* p = bytes.data();
  const char* end = p + bytes.size();
  auto next_line = [&](std::string_view& line) {
    if (p >= end) return false;
    const char* nl = static_cast<const char*>(std::memchr(p, '\n', std::size_t(end - p)));
    line = std::string_view(p, nl ? std::size_t(nl - p) : std::size_t(end - p));
    p = nl ? nl + 1 : end;
    return true;
  };

  std::string_view line;
  if (!next_line(line) || line != "x,t,u_prior,u_truth")
    throw Error("data_format", name + ": bad or missing header row");

  const std::size_t rows = g.nx * g.nt;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!next_line(line)) throw Error("data_format", name + ": too few rows");
    double v[4];
    const char* q = line.data();
    const char* line_end = q + line.size();
    for (int c = 0; c < 4; ++c) {
      char* after = nullptr;
      v[c] = std::strtod(q, &after);
      if (after == q) throw Error("data_format", name + ": bad number in row " + std::to_string(r));
      q = after;
      if (c < 3) {
        if (q >= line_end || *q != ',')
          throw Error("data_format", name + ": expected 4 columns in row " + std::to_string(r));
        ++q;
      }
    }
    const std::size_t ix = r % g.nx;
    const std::size_t it = r / g.nx;
    if (v[0] != g.x(ix) || v[1] != g.t(it))
      throw Error("data_format", name + ": row " + std::to_string(r) + " is off the grid");
    prior(Eigen::Index(ix), Eigen::Index(it)) = v[2];
    truth(Eigen::Index(ix), Eigen::Index(it)) = v[3];
  }
  if (next_line(line) && !line.empty()) throw Error("data_format", name + ": trailing rows");
}

inline nlohmann::json params_json(const CdrParams& p) {
  return {{"beta", p.beta}, {"nu", p.nu}, {"rho", {p.rho[0], p.rho[1], p.rho[2]}}};
}

inline CdrParams params_from_json(const nlohmann::json& j) {
  CdrParams p;
  p.beta = j.at("beta").get<double>();
  p.nu = j.at("nu").get<double>();
  const auto& r = j.at("rho");
  if (!r.is_array() || r.size() != 3) throw Error("data_format", "rho must have 3 entries");
  for (int i = 0; i < 3; ++i) p.rho[i] = r[i].get<double>();
  return p;
}

inline nlohmann::json manifest_json(const DatasetManifest& m) {
  nlohmann::json j;
  j["format_version"] = m.format_version;
  j["grid"] = {{"nx", m.grid.nx}, {"nt", m.grid.nt}};
  j["initial_condition"] = {{"preset", preset_name(m.ic.preset)},
                            {"mean", m.ic.mean},
                            {"sigma", m.ic.sigma},
                            {"level", m.ic.level}};
  j["pinn_ratio"] = m.pinn_ratio;
  j["noise"] = {{"kind", noise_kind_name(m.noise.kind)},
                {"level", m.noise.level},
                {"seed", m.noise.seed}};
  j["seed"] = m.seed;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : m.entries)
    j["entries"].push_back({{"file", e.file},
                            {"digest", e.digest},
                            {"provenance", provenance_name(e.provenance)},
                            {"params", params_json(e.params)},
                            {"sample_seed", e.sample_seed}});
  return j;
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
  DatasetManifest m;
  m.format_version = j.at("format_version").get<int>();
  if (m.format_version != kDatasetFormatVersion)
    throw Error("version_mismatch", "dataset format version " + std::to_string(m.format_version) +
                                        ", expected " + std::to_string(kDatasetFormatVersion));
  m.grid.nx = j.at("grid").at("nx").get<std::size_t>();
  m.grid.nt = j.at("grid").at("nt").get<std::size_t>();
  m.grid.validate();
  const auto& ic = j.at("initial_condition");
  m.ic.preset = preset_from_name(ic.at("preset").get<std::string>());
  m.ic.mean = ic.at("mean").get<double>();
  m.ic.sigma = ic.at("sigma").get<double>();
  m.ic.level = ic.at("level").get<double>();
  m.pinn_ratio = j.at("pinn_ratio").get<double>();
  const auto& noise = j.at("noise");
  m.noise.kind = noise_kind_from_name(noise.at("kind").get<std::string>());
  m.noise.level = noise.at("level").get<double>();
  m.noise.seed = noise.at("seed").get<std::uint64_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& je : j.at("entries")) {
    DatasetManifest::Entry e;
    e.file = je.at("file").get<std::string>();
    e.digest = je.at("digest").get<std::string>();
    e.provenance = provenance_from_name(je.at("provenance").get<std::string>());
    e.params = params_from_json(je.at("params"));
    e.sample_seed = je.at("sample_seed").get<std::uint64_t>();
    m.entries.push_back(std::move(e));
  }
  return m;
}

}  // namespace detail

inline DatasetManifest save_dataset(const PriorStore& store, const std::vector<SampleSet>& sets,
                                    const std::filesystem::path& dir) {
  if (sets.size() != store.size())
    throw Error("config", "one sample set per stored parameter vector required");
  for (std::size_t i = 0; i < sets.size(); ++i)
    if (sets[i].params != store.params[i])
      throw Error("config", "sample set order does not match the store");

  DatasetManifest m;
  m.grid = store.grid;
  m.ic = store.ic;
  m.pinn_ratio = store.pinn_ratio;
  m.noise = store.noise;
  m.seed = store.seed;

  std::filesystem::create_directories(dir / "fields");
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (!store.prior[i].finite() || !store.truth[i].finite())
      throw Error("config", "refusing to serialize non-finite fields");
    DatasetManifest::Entry e;
    e.file = "fields/alpha_" + std::to_string(i) + ".csv";
    e.provenance = store.prior[i].provenance;
    e.params = store.params[i];
    e.sample_seed = sets[i].seed;
    const std::string csv = detail::field_csv(store.prior[i], store.truth[i]);
    e.digest = sha256_hex(csv);
    std::ofstream out(dir / e.file, std::ios::binary);
    if (!out) throw Error("missing_file", "cannot write " + (dir / e.file).string());
    out.write(csv.data(), std::streamsize(csv.size()));
    m.entries.push_back(std::move(e));
  }

  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error("missing_file", "cannot write " + (dir / "manifest.json").string());
  out << detail::manifest_json(m).dump(2) << '\n';
  return m;
}

inline std::pair<PriorStore, std::vector<SampleSet>> load_dataset(
    const std::filesystem::path& dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_file_bytes(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error("data_format", "manifest.json: " + std::string(e.what()));
  }
  DatasetManifest m;
  try {
    m = detail::manifest_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error("data_format", "manifest.json: " + std::string(e.what()));
  }

  PriorStore store;
  store.grid = m.grid;
  store.ic = m.ic;
  store.pinn_ratio = m.pinn_ratio;
  store.noise = m.noise;
  store.seed = m.seed;

  std::vector<SampleSet> sets;
  for (const auto& e : m.entries) {
    const std::string bytes = detail::read_file_bytes(dir / e.file);
    if (sha256_hex(bytes) != e.digest)
      throw Error("digest_mismatch", e.file + " does not match its recorded digest");

    SolutionField prior, truth;
    prior.grid = truth.grid = m.grid;
    prior.params = truth.params = e.params;
    prior.provenance = e.provenance;
    truth.provenance = Provenance::numerical;
    detail::parse_field_csv(bytes, m.grid, e.file, prior.values, truth.values);

    store.params.push_back(e.params);
    store.prior.push_back(std::move(prior));
    store.truth.push_back(std::move(truth));
    sets.push_back(sample_points(store.prior.back(), store.truth.back(), e.sample_seed));
  }
  return {std::move(store), std::move(sets)};
}

}  // namespace icpde
