#include "apd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "apd/builtin_models.hpp"
#include "apd/coupler.hpp"
#include "apd/gumbel.hpp"
#include "apd/models.hpp"

namespace apd {
namespace {

constexpr double kExactSlack = 1e-12;

TokenDistribution dist(std::vector<double> p) { return TokenDistribution::from_probs(p); }

TokenDistribution geometric(std::size_t size, double ratio) {
  std::vector<double> raw(size);
  for (std::size_t i = 0; i < size; ++i) raw[i] = static_cast<double>(i) * std::log(ratio);
  return normalize_logits(raw);
}

CheckResult at_most(std::string name, double measured, double threshold) {
  return {std::move(name), measured <= threshold, measured, threshold, "<="};
}

CheckResult at_least(std::string name, double measured, double threshold) {
  return {std::move(name), measured >= threshold, measured, threshold, ">="};
}

// -- coupler ---------------------------------------------------------------

SuiteReport coupler_suite() {
  const std::vector<std::pair<std::string, TokenDistribution>> cases = {
      {"v2-(.3,.7)", dist({0.3, 0.7})},
      {"v2-(.95,.05)", dist({0.95, 0.05})},
      {"v5-mixed", dist({0.1, 0.2, 0.3, 0.25, 0.15})},
      {"v5-with-zero", dist({0.5, 0.0, 0.25, 0.125, 0.125})},
      {"v32-geometric", geometric(32, 0.85)},
  };
  SuiteReport report{"coupler", {}};
  std::uint64_t seed = 101;
  for (const auto& [name, p] : cases) {
    const Vocab vocab = Vocab::anonymous(p.size());
    std::vector<double> counts(p.size(), 0.0);
    for (unsigned s = 0; s < kCouplerSamples; ++s) {
      counts[coupled_sample(p, fresh_gumbel(seed, s, 1, vocab).row(0))] += 1.0;
    }
    double tv = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      tv += std::abs(counts[i] / kCouplerSamples - p.prob(static_cast<TokenId>(i)));
    }
    report.checks.push_back(at_most("marginal-law/" + name + " tv", 0.5 * tv, 0.01));
    ++seed;
  }
  return report;
}

// -- coupling bound ----------------------------------------------------------

SuiteReport coupling_suite() {
  struct Pair {
    std::string name;
    TokenDistribution p;
    TokenDistribution q;
  };
  const std::vector<Pair> pairs = {
      {"(.6,.4)-(.5,.5)", dist({0.6, 0.4}), dist({0.5, 0.5})},
      {"(.3,.7)-(.7,.3)", dist({0.3, 0.7}), dist({0.7, 0.3})},
      {"(1,0)-(.5,.5)", dist({1.0, 0.0}), dist({0.5, 0.5})},
      {"(.9,.1)-(.85,.15)", dist({0.9, 0.1}), dist({0.85, 0.15})},
      {"(1,0)-(0,1)", dist({1.0, 0.0}), dist({0.0, 1.0})},
      {"identical-v5", dist({0.1, 0.2, 0.3, 0.25, 0.15}), dist({0.1, 0.2, 0.3, 0.25, 0.15})},
      {"v5-shifted", dist({0.1, 0.2, 0.3, 0.25, 0.15}), dist({0.15, 0.1, 0.2, 0.3, 0.25})},
      {"v5-support-change", dist({0.5, 0.0, 0.25, 0.125, 0.125}), dist({0.4, 0.1, 0.2, 0.2, 0.1})},
      {"v32-geometric", geometric(32, 0.85), geometric(32, 0.8)},
      {"v32-geometric-vs-uniform", geometric(32, 0.9), TokenDistribution::uniform(32)},
  };
  SuiteReport report{"coupling", {}};
  std::uint64_t seed = 202;
  for (const auto& pr : pairs) {
    const double rate = coupling_disagreement_rate(pr.p, pr.q, kCouplerSamples, seed++);
    const double bound = std::min(1.0, 2.0 * total_variation(pr.p, pr.q));
    const double se = std::sqrt(bound * (1.0 - bound) / kCouplerSamples);
    report.checks.push_back(at_most("disagreement/" + pr.name, rate, bound + 3.0 * se));
  }
  return report;
}

// -- desiderata --------------------------------------------------------------

SuiteReport desiderata_suite() {
  SuiteReport report{"desiderata", {}};
  const std::vector<TokenDistribution> others = {
      dist({0.5, 0.5}), dist({0.999, 0.001}), dist({0.2, 0.3, 0.1, 0.4}),
      dist({0.01, 0.01, 0.98}), TokenDistribution::uniform(6)};
  for (double R : {0.25, 0.5, 0.75}) {
    for (std::size_t i = 0; i < others.size(); ++i) {
      const auto& other = others[i];
      const TokenId c = static_cast<TokenId>(other.size() - 1);
      const auto point = TokenDistribution::point_mass(other.size(), c);
      const std::string tag = "R=" + std::to_string(R).substr(0, 4) + "/case" + std::to_string(i);

      // measured is 1 iff the mixture is exactly a point mass on c.
      const auto t1 = mixture_logits(point, other, MixtureWeight(R));
      report.checks.push_back(
          at_least("marginal-point-mass/" + tag, t1.point_mass_token() == c ? 1.0 : 0.0, 1.0));
      const auto t2 = mixture_logits(other, point, MixtureWeight(R));
      report.checks.push_back(
          at_least("joint-point-mass/" + tag, t2.point_mass_token() == c ? 1.0 : 0.0, 1.0));
    }
  }
  return report;
}

// -- enumeration helpers -----------------------------------------------------

std::vector<Sequence> all_sequences(std::size_t vocab_size, std::size_t length) {
  std::vector<Sequence> out{{}};
  for (std::size_t i = 0; i < length; ++i) {
    std::vector<Sequence> next;
    for (const auto& s : out) {
      for (std::size_t v = 0; v < vocab_size; ++v) {
        Sequence e = s;
        e.push_back(static_cast<TokenId>(v));
        next.push_back(std::move(e));
      }
    }
    out = std::move(next);
  }
  return out;
}

/// Probability of every prefix, from the exact joint table.
std::map<Sequence, double> prefix_masses(const SequenceModel& model) {
  std::map<Sequence, double> mass;
  const SequenceTable table = model.exact_sequence_distribution();
  for (const auto& [seq, p] : table.entries()) {
    for (std::size_t len = 0; len <= seq.size(); ++len) {
      mass[Sequence(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(len))] += p;
    }
  }
  return mass;
}

// -- Bonferroni --------------------------------------------------------------

SuiteReport bonferroni_suite() {
  SuiteReport report{"bonferroni", {}};
  for (const auto& name : builtin_model_names()) {
    const ModelPtr model = builtin_model(name);
    const std::size_t V = model->vocab().size();
    const auto mass = prefix_masses(*model);
    double worst_margin = std::numeric_limits<double>::infinity();
    std::size_t checked = 0;
    for (std::size_t t = 0; t < model->horizon(); ++t) {
      for (const auto& prefix : all_sequences(V, t)) {
        auto it = mass.find(prefix);
        if (it == mass.end() || it->second <= 0.0) continue;
        const std::size_t kmax = std::min<std::size_t>(3, model->horizon() - t);
        const auto marginals = model->marginal_query(prefix, kmax);
        for (std::size_t k = 1; k <= kmax; ++k) {
          for (const auto& cont : all_sequences(V, k)) {
            const auto joint = model->joint_score(prefix, cont);
            double p_joint = 1.0;
            double bound = 1.0 - static_cast<double>(k);
            for (std::size_t i = 0; i < k; ++i) {
              p_joint *= joint[i].prob(cont[i]);
              bound += marginals[i].prob(cont[i]);
            }
            worst_margin = std::min(worst_margin, p_joint - bound);
            ++checked;
          }
        }
      }
    }
    report.checks.push_back(at_least("min(p_joint - bound)/" + name + " over " +
                                         std::to_string(checked) + " continuations",
                                     worst_margin, -kExactSlack));
  }
  return report;
}

// -- chain rule / consistency ------------------------------------------------

SuiteReport chain_rule_suite() {
  SuiteReport report{"chain-rule", {}};
  for (const auto& name : builtin_model_names()) {
    const ModelPtr model = builtin_model(name);
    const std::size_t V = model->vocab().size();
    const auto mass = prefix_masses(*model);
    double worst_rel = 0.0;
    double worst_consistency = 0.0;
    for (std::size_t t = 0; t < model->horizon(); ++t) {
      for (const auto& prefix : all_sequences(V, t)) {
        auto it = mass.find(prefix);
        if (it == mass.end() || it->second <= 0.0) continue;
        const auto m1 = model->marginal_query(prefix, 1)[0];
        const auto j1 = model->joint_score(prefix, Sequence{0})[0];
        for (std::size_t v = 0; v < V; ++v) {
          worst_consistency = std::max(worst_consistency,
                                       std::abs(m1.prob(static_cast<TokenId>(v)) -
                                                j1.prob(static_cast<TokenId>(v))));
        }
        for (const auto& cont : all_sequences(V, model->horizon() - t)) {
          const auto joint = model->joint_score(prefix, cont);
          double product = 1.0;
          for (std::size_t i = 0; i < cont.size(); ++i) product *= joint[i].prob(cont[i]);
          Sequence full = prefix;
          full.insert(full.end(), cont.begin(), cont.end());
          auto fit = mass.find(full);
          const double expected = (fit == mass.end() ? 0.0 : fit->second) / it->second;
          const double scale = std::max(expected, 1e-300);
          if (expected == 0.0 && product == 0.0) continue;
          worst_rel = std::max(worst_rel, std::abs(product - expected) / scale);
        }
      }
    }
    report.checks.push_back(at_most("chain-rule-rel-error/" + name, worst_rel, 1e-9));
    report.checks.push_back(at_most("marginal-vs-joint/" + name, worst_consistency, 1e-12));
  }
  return report;
}

// -- window exactness --------------------------------------------------------

SuiteReport window_suite() {
  SuiteReport report{"window", {}};
  for (const auto& name : {"dep4", "order2", "chain8"}) {
    const ModelPtr model = builtin_model(name);
    const auto& markov = dynamic_cast<const MarkovModel&>(*model);
    const std::size_t V = markov.vocab().size();
    const std::size_t n = std::min<std::size_t>(markov.horizon(), 5);
    for (std::size_t W = 1; W <= 4; ++W) {
      double worst = 0.0;
      for (const auto& seq : all_sequences(V, n)) {
        const auto exact = markov.joint_score({}, seq);
        const auto windowed = markov.windowed_joint_score({}, seq, W);
        for (std::size_t i = 0; i < seq.size(); ++i) {
          worst = std::max(worst, total_variation(exact[i], windowed[i]));
        }
      }
      const std::string tag = std::string(name) + "/W=" + std::to_string(W);
      if (W >= markov.order()) {
        report.checks.push_back(at_most("window-exact/" + tag, worst, 0.0));
      } else {
        report.checks.push_back(at_least("window-truncation-visible/" + tag, worst, 1e-6));
      }
    }
  }
  return report;
}

}  // namespace

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<std::string> verify_suite_names() {
  return {"coupler", "coupling", "desiderata", "bonferroni", "chain-rule", "window"};
}

SuiteReport run_verify_suite(const std::string& name) {
  if (name == "coupler") return coupler_suite();
  if (name == "coupling") return coupling_suite();
  if (name == "desiderata") return desiderata_suite();
  if (name == "bonferroni") return bonferroni_suite();
  if (name == "chain-rule") return chain_rule_suite();
  if (name == "window") return window_suite();
  throw ValidationError("unknown verify suite '" + name + "'");
}

}  // namespace apd
