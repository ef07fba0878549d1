#include "apd/model_io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "apd/builtin_models.hpp"

namespace apd {
namespace {

using nlohmann::json;

std::vector<double> renormalized(std::vector<double> probs, const std::string& what) {
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ValidationError(what + ": probabilities must be finite and non-negative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kLoadSumTolerance) {
    std::ostringstream msg;
    msg << what << ": probabilities sum to " << std::setprecision(12) << total;
    throw ValidationError(msg.str());
  }
  for (double& p : probs) p /= total;
  return probs;
}

const json& require(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ValidationError(std::string("model file: missing \"") + key + "\"");
  return doc.at(key);
}

Vocab parse_vocab(const json& doc) {
  std::vector<std::string> names = require(doc, "vocab").get<std::vector<std::string>>();
  std::optional<TokenId> eos;
  if (doc.contains("eos") && !doc.at("eos").is_null()) {
    const auto eos_name = doc.at("eos").get<std::string>();
    auto it = std::find(names.begin(), names.end(), eos_name);
    if (it == names.end()) throw ValidationError("model file: eos token not in vocab");
    eos = static_cast<TokenId>(it - names.begin());
  }
  return Vocab(std::move(names), eos);
}

std::size_t sequence_index(const Vocab& vocab, const json& tokens, std::size_t expected_len,
                           const char* what) {
  const auto names = tokens.get<std::vector<std::string>>();
  if (names.size() != expected_len) {
    throw ValidationError(std::string("model file: ") + what + " has length " +
                          std::to_string(names.size()) + ", expected " +
                          std::to_string(expected_len));
  }
  std::size_t idx = 0;
  for (const auto& n : names) idx = idx * vocab.size() + vocab.id_of(n);
  return idx;
}

std::vector<double> parse_sequence_table(const Vocab& vocab, const json& entries, std::size_t len,
                                         const std::string& what) {
  std::vector<double> probs(checked_space_size(vocab.size(), len), 0.0);
  std::vector<bool> seen(probs.size(), false);
  for (const auto& e : entries) {
    const std::size_t idx = sequence_index(vocab, require(e, "seq"), len, "seq");
    if (seen[idx]) throw ValidationError(what + ": duplicate sequence");
    seen[idx] = true;
    probs[idx] = require(e, "p").get<double>();
  }
  return renormalized(std::move(probs), what);
}

ModelPtr parse_tabular(const json& doc) {
  Vocab vocab = parse_vocab(doc);
  const auto n = require(doc, "n").get<std::size_t>();
  auto probs = parse_sequence_table(vocab, require(doc, "table"), n, "tabular table");
  return std::make_shared<TabularJointModel>(std::move(vocab), n, std::move(probs));
}

ModelPtr parse_markov(const json& doc) {
  Vocab vocab = parse_vocab(doc);
  const auto order = require(doc, "order").get<std::size_t>();
  const auto n = require(doc, "n").get<std::size_t>();
  std::vector<double> initial;
  if (order == 0 && !doc.contains("initial")) {
    initial = {1.0};
  } else {
    initial = parse_sequence_table(vocab, require(doc, "initial"), order, "markov initial");
  }
  std::vector<std::optional<TokenDistribution>> rows(checked_space_size(vocab.size(), order));
  for (const auto& t : require(doc, "transitions")) {
    const std::size_t idx = sequence_index(vocab, require(t, "context"), order, "context");
    if (rows[idx]) throw ValidationError("markov transitions: duplicate context");
    auto probs = require(t, "probs").get<std::vector<double>>();
    if (probs.size() != vocab.size()) {
      throw ValidationError("markov transitions: row length differs from vocab size");
    }
    rows[idx] = TokenDistribution::from_probs(renormalized(std::move(probs), "markov row"));
  }
  return std::make_shared<MarkovModel>(std::move(vocab), order, n, std::move(initial),
                                       std::move(rows));
}

ModelPtr parse_perturbed(const json& doc, const std::filesystem::path& base_dir) {
  const json& base_doc = require(doc, "base");
  ModelPtr base = base_doc.is_string() ? load_model_file(base_dir / base_doc.get<std::string>())
                                       : model_from_json(base_doc, base_dir);
  const double delta = require(doc, "delta").get<double>();
  const auto seed = doc.value("seed", std::uint64_t{0});
  return std::make_shared<PerturbedModel>(std::move(base), delta, seed);
}

constexpr std::string_view kBuiltinPrefix = "builtin:";

}  // namespace

ModelPtr model_from_json(const json& doc, const std::filesystem::path& base_dir) {
  try {
    const auto type = require(doc, "type").get<std::string>();
    if (type == "tabular") return parse_tabular(doc);
    if (type == "markov") return parse_markov(doc);
    if (type == "perturbed") return parse_perturbed(doc, base_dir);
    throw ValidationError("model file: unknown type \"" + type + "\"");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model file: ") + e.what());
  } catch (const TooLargeToEnumerate& e) {
    throw ValidationError(std::string("model file: ") + e.what());
  }
}

ModelPtr load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError("cannot parse " + path.string() + ": " + e.what());
  }
  return model_from_json(doc, path.parent_path());
}

ModelPtr resolve_model(const std::string& spec) {
  if (spec.starts_with(kBuiltinPrefix)) return builtin_model(spec.substr(kBuiltinPrefix.size()));
  return load_model_file(spec);
}

std::string model_digest(const std::string& spec) {
  if (spec.starts_with(kBuiltinPrefix)) {
    builtin_model(spec.substr(kBuiltinPrefix.size()));
    return spec;
  }
  std::ifstream in(spec, std::ios::binary);
  if (!in) throw ValidationError("cannot open model file " + spec);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();

  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return "sha256:" + hex.str();
}

}  // namespace apd
