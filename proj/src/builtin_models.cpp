#include "apd/builtin_models.hpp"

#include <array>

namespace apd {
namespace {

TokenDistribution row(std::initializer_list<double> probs) {
  const std::vector<double> p(probs);
  return TokenDistribution::from_probs(p);
}

ModelPtr make_j1() {
  return std::make_shared<TabularJointModel>(Vocab({"A", "B"}), 2,
                                             std::vector<double>{0.4, 0.1, 0.1, 0.4});
}

ModelPtr make_indep3() {
  const std::array<TokenDistribution, 3> factors = {row({0.7, 0.3}), row({0.4, 0.6}),
                                                    row({0.5, 0.5})};
  return std::make_shared<TabularJointModel>(
      TabularJointModel::independent(Vocab({"A", "B"}), factors));
}

ModelPtr make_determ4() {
  return std::make_shared<TabularJointModel>(
      TabularJointModel::deterministic(Vocab({"A", "B", "C"}), {0, 2, 1, 0}));
}

ModelPtr make_dep4() {
  constexpr std::size_t V = 4;
  std::vector<std::optional<TokenDistribution>> rows;
  for (std::size_t c = 0; c < V; ++c) {
    std::vector<double> p(V, 0.02);
    p[(c + 1) % V] = 0.94;
    rows.emplace_back(TokenDistribution::from_probs(p));
  }
  return std::make_shared<MarkovModel>(Vocab({"A", "B", "C", "D"}), 1, 4,
                                       std::vector<double>{0.4, 0.3, 0.2, 0.1}, std::move(rows));
}

ModelPtr make_order2() {
  std::vector<std::optional<TokenDistribution>> rows;
  for (std::size_t c = 0; c < 4; ++c) {
    const std::size_t two_back = c / 2;
    rows.emplace_back(two_back == 0 ? row({0.9, 0.1}) : row({0.1, 0.9}));
  }
  return std::make_shared<MarkovModel>(Vocab({"A", "B"}), 2, 4,
                                       std::vector<double>{0.25, 0.25, 0.25, 0.25},
                                       std::move(rows));
}

ModelPtr make_eos5() {
  std::vector<std::optional<TokenDistribution>> rows;
  rows.emplace_back(row({0.6, 0.3, 0.1}));
  rows.emplace_back(row({0.3, 0.5, 0.2}));
  rows.emplace_back(row({0.0, 0.0, 1.0}));
  return std::make_shared<MarkovModel>(Vocab({"A", "B", "<eos>"}, 2), 1, 5,
                                       std::vector<double>{0.5, 0.5, 0.0}, std::move(rows));
}

ModelPtr make_chain8() {
  std::vector<std::optional<TokenDistribution>> rows;
  rows.emplace_back(row({0.8, 0.2}));
  rows.emplace_back(row({0.2, 0.8}));
  return std::make_shared<MarkovModel>(Vocab({"A", "B"}), 1, 8, std::vector<double>{0.5, 0.5},
                                       std::move(rows));
}

}  // namespace

ModelPtr builtin_model(const std::string& name) {
  if (name == "j1") return make_j1();
  if (name == "indep3") return make_indep3();
  if (name == "determ4") return make_determ4();
  if (name == "dep4") return make_dep4();
  if (name == "dep4-small") return std::make_shared<PerturbedModel>(make_dep4(), 0.5, 11);
  if (name == "order2") return make_order2();
  if (name == "eos5") return make_eos5();
  if (name == "chain8") return make_chain8();
  throw ValidationError("unknown built-in model '" + name + "'");
}

std::vector<std::string> builtin_model_names() {
  return {"j1", "indep3", "determ4", "dep4", "dep4-small", "order2", "eos5", "chain8"};
}

}  // namespace apd
