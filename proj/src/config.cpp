#include "churnlab/config.hpp"

#include "churnlab/csv.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace churnlab {

namespace {

void check_keys(const Json& obj, const std::string& where, const std::set<std::string>& allowed,
                const std::set<std::string>& required) {
  if (!obj.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw std::invalid_argument(where + ": unknown key \"" + item.key() + "\"");
  for (const std::string& key : required)
    if (!obj.contains(key)) throw std::invalid_argument(where + ": missing key \"" + key + "\"");
}

double get_real(const Json& obj, const std::string& where, const std::string& key) {
  const Json& v = obj.at(key);
  if (!v.is_number()) throw std::invalid_argument(where + "." + key + ": expected a number");
  return v.get<double>();
}

double get_real(const Json& obj, const std::string& where, const std::string& key, double fallback) {
  return obj.contains(key) ? get_real(obj, where, key) : fallback;
}

Index get_int(const Json& obj, const std::string& where, const std::string& key) {
  const Json& v = obj.at(key);
  if (!v.is_number_integer()) throw std::invalid_argument(where + "." + key + ": expected an integer");
  return v.get<Index>();
}

Index get_int(const Json& obj, const std::string& where, const std::string& key, Index fallback) {
  return obj.contains(key) ? get_int(obj, where, key) : fallback;
}

std::uint64_t get_seed(const Json& obj, const std::string& where, const std::string& key) {
  const Json& v = obj.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
    throw std::invalid_argument(where + "." + key + ": expected a nonnegative integer seed");
  return v.get<std::uint64_t>();
}

std::string get_str(const Json& obj, const std::string& where, const std::string& key,
                    const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_string()) throw std::invalid_argument(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

// Shared TrainConfig block. Seeds are mandatory; hyperparameters default
// deterministically.
TrainConfig parse_train(const Json& j, const std::string& where, double lr_default,
                        Index batch_default, Index epochs_default, double temp_default) {
  check_keys(j, where,
             {"seed_init", "seed_shuffle", "learning_rate", "momentum", "batch_size", "epochs",
              "temperature", "arch", "hidden", "embed_dim", "temp_scaling"},
             {"seed_init", "seed_shuffle"});
  TrainConfig t;
  t.seed_init = get_seed(j, where, "seed_init");
  t.seed_shuffle = get_seed(j, where, "seed_shuffle");
  t.learning_rate = get_real(j, where, "learning_rate", lr_default);
  t.momentum = get_real(j, where, "momentum", 0.9);
  t.batch_size = get_int(j, where, "batch_size", batch_default);
  t.epochs = get_int(j, where, "epochs", epochs_default);
  t.temperature = get_real(j, where, "temperature", temp_default);
  std::string arch = get_str(j, where, "arch", "linear");
  if (arch == "linear")
    t.arch = Arch::linear;
  else if (arch == "mlp1")
    t.arch = Arch::mlp1;
  else
    throw std::invalid_argument(where + ".arch: expected \"linear\" or \"mlp1\"");
  t.hidden = get_int(j, where, "hidden", 16);
  t.embed_dim = get_int(j, where, "embed_dim", 16);
  std::string scaling = get_str(j, where, "temp_scaling", "lambda_squared");
  if (scaling == "lambda_squared")
    t.scaling = TempScaling::lambda_squared;
  else if (scaling == "lambda")
    t.scaling = TempScaling::lambda;
  else
    throw std::invalid_argument(where + ".temp_scaling: expected \"lambda_squared\" or \"lambda\"");
  t.validate();
  return t;
}

}  // namespace

Json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return j;
}

ChurnExperimentConfig parse_churn_config(const Json& j) {
  check_keys(j, "config",
             {"experiment", "out", "dataset", "train", "reg_kind", "alphas", "pairs", "vary",
              "holdout_fraction", "hist_bins"},
             {"experiment", "dataset", "train", "alphas", "pairs"});
  if (j.at("experiment") != "churn")
    throw std::invalid_argument("config.experiment: expected \"churn\"");

  ChurnExperimentConfig c;
  const Json& ds = j.at("dataset");
  check_keys(ds, "config.dataset", {"kind", "seed", "m", "d", "k", "separation"},
             {"seed", "m", "d", "k", "separation"});
  if (get_str(ds, "config.dataset", "kind", "gaussian_blobs") != "gaussian_blobs")
    throw std::invalid_argument("config.dataset.kind: expected \"gaussian_blobs\"");
  c.dataset.seed = get_seed(ds, "config.dataset", "seed");
  c.dataset.m = get_int(ds, "config.dataset", "m");
  c.dataset.d = get_int(ds, "config.dataset", "d");
  c.dataset.k = get_int(ds, "config.dataset", "k");
  c.dataset.separation = get_real(ds, "config.dataset", "separation");

  c.base = parse_train(j.at("train"), "config.train", 0.1, 32, 30, 1.0);

  std::string kind = get_str(j, "config", "reg_kind", "kl_uniform");
  RegKind reg_kind;
  if (kind == "kl_uniform")
    reg_kind = RegKind::kl_uniform;
  else if (kind == "entropic")
    reg_kind = RegKind::entropic;
  else
    throw std::invalid_argument("config.reg_kind: expected \"kl_uniform\" or \"entropic\"");

  const Json& alphas = j.at("alphas");
  if (!alphas.is_array() || alphas.empty())
    throw std::invalid_argument("config.alphas: expected a nonempty array");
  c.alphas.clear();
  for (const Json& a : alphas) {
    if (!a.is_number()) throw std::invalid_argument("config.alphas: expected numbers");
    c.alphas.push_back(a.get<double>());
    c.base.reg = RegParams(reg_kind, c.alphas.back());  // validates each sweep value
  }
  c.base.reg = RegParams(reg_kind, c.alphas.front());

  c.pairs = static_cast<int>(get_int(j, "config", "pairs"));
  if (c.pairs < 1) throw std::invalid_argument("config.pairs: must be >= 1");
  std::string vary = get_str(j, "config", "vary", "both");
  if (vary == "both")
    c.vary = VaryMode::both;
  else if (vary == "init")
    c.vary = VaryMode::init;
  else if (vary == "shuffle")
    c.vary = VaryMode::shuffle;
  else
    throw std::invalid_argument("config.vary: expected \"both\", \"init\", or \"shuffle\"");
  c.holdout_fraction = get_real(j, "config", "holdout_fraction", 0.2);
  c.hist_bins = get_int(j, "config", "hist_bins", 40);
  return c;
}

RetrievalExperimentConfig parse_retrieval_config(const Json& j) {
  check_keys(j, "config",
             {"experiment", "out", "dataset", "train", "losses", "seeds", "mining_fraction",
              "holdout_fraction"},
             {"experiment", "dataset", "train", "losses", "seeds"});
  if (j.at("experiment") != "retrieval")
    throw std::invalid_argument("config.experiment: expected \"retrieval\"");

  RetrievalExperimentConfig c;
  const Json& ds = j.at("dataset");
  check_keys(ds, "config.dataset", {"kind", "seed", "n", "latent_dim", "noise"},
             {"seed", "n", "latent_dim", "noise"});
  if (get_str(ds, "config.dataset", "kind", "paired_embeddings") != "paired_embeddings")
    throw std::invalid_argument("config.dataset.kind: expected \"paired_embeddings\"");
  c.dataset.seed = get_seed(ds, "config.dataset", "seed");
  c.dataset.n = get_int(ds, "config.dataset", "n");
  c.dataset.latent_dim = get_int(ds, "config.dataset", "latent_dim");
  c.dataset.noise = get_real(ds, "config.dataset", "noise");

  c.base = parse_train(j.at("train"), "config.train", 0.05, 64, 30, 4.0);

  const Json& losses = j.at("losses");
  if (!losses.is_array() || losses.empty())
    throw std::invalid_argument("config.losses: expected a nonempty array");
  c.losses.clear();
  for (const Json& l : losses) {
    if (!l.is_string()) throw std::invalid_argument("config.losses: expected strings");
    auto v = xex_variant_from(l.get<std::string>());
    if (!v)
      throw std::invalid_argument("config.losses: expected sampled|snm|ce|cem, got \"" +
                                  l.get<std::string>() + "\"");
    c.losses.push_back(*v);
  }

  const Json& seeds = j.at("seeds");
  if (!seeds.is_array() || seeds.empty())
    throw std::invalid_argument("config.seeds: expected a nonempty array");
  c.seeds.clear();
  for (const Json& s : seeds) {
    if (!s.is_number_integer())
      throw std::invalid_argument("config.seeds: expected integer seeds");
    c.seeds.push_back(s.get<std::uint64_t>());
  }

  c.mining_fraction = get_real(j, "config", "mining_fraction", 0.5);
  c.holdout_fraction = get_real(j, "config", "holdout_fraction", 0.2);
  return c;
}

std::string config_out_dir(const Json& j) {
  if (j.is_object() && j.contains("out")) {
    const Json& v = j.at("out");
    if (!v.is_string()) throw std::invalid_argument("config.out: expected a string");
    return v.get<std::string>();
  }
  return "";
}

}  // namespace churnlab
