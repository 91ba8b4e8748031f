#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rbl {

struct VerifyItem {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Algebraic identities, model invariants and oracle equivalences, each run at
// a fixed size from `seed`.
std::vector<VerifyItem> run_verification(std::uint64_t seed = 20160101);

}  // namespace rbl
