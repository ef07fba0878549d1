#pragma once

#include <string>
#include <vector>

#include "apd/models.hpp"

namespace apd {

// Built-in demo models. JSON copies live under models/ in the repository.
//
//   j1          tabular, vocab {A,B}, n=2: AA .4, AB .1, BA .1, BB .4
//   indep3      tabular product of (.7,.3), (.4,.6), (.5,.5)
//   determ4     tabular point mass on A C B A over {A,B,C}
//   dep4        order-1 Markov, vocab {A,B,C,D}, n=4; each token is followed
//               by its cyclic successor with probability .94
//   dep4-small  dep4 perturbed with delta .5 (an imperfect verifier)
//   order2      order-2 Markov, vocab {A,B}, n=4; x_t copies x_{t-2} w.p. .9
//   eos5        order-1 Markov, vocab {A,B,<eos>}, n=5, with end-of-sequence
//   chain8      order-1 Markov, vocab {A,B}, n=8, stay probability .8

ModelPtr builtin_model(const std::string& name);
std::vector<std::string> builtin_model_names();

}  // namespace apd
