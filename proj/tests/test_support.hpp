#pragma once

#include <string>
#include <vector>

#include "eja/algebra.hpp"
#include "eja/linear_map.hpp"
#include "eja/random.hpp"

namespace eja::testing {

inline std::vector<AlgebraSpec> sample_algebras() {
    std::vector<AlgebraSpec> out;
    for (const char* s : {"rn:5", "sym:2", "sym:3", "sym:5", "spin:2", "spin:4", "spin:6",
                          "prod(sym:3,spin:4)", "prod(rn:2,sym:2)"})
        out.push_back(AlgebraSpec::parse(s));
    return out;
}

/// Two elements sharing one random Jordan frame: a = Σ α_i e_i, b = Σ β_i e_i.
struct SharedFramePair {
    Element a;
    Element b;
};

inline SharedFramePair shared_frame_pair(const AlgebraSpec& spec, Rng& rng) {
    const auto frame = spectral_decompose(random_element(spec, rng)).frame;
    return {assemble(frame, random_normal(spec.rank(), rng)),
            assemble(frame, random_normal(spec.rank(), rng))};
}

}  // namespace eja::testing
