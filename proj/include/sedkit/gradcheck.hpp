#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sedkit {

struct GradCheckEntry {
    std::string name;
    int instances = 0;
    double max_rel_err = 0.0;
    bool pass = false;
};

// Names: conv, linear, activations, pool, se, tse, fwse, tfwse, c2datt, fdy,
// or "all". Each check compares every analytic gradient (input and all
// parameters) against central finite differences in 64-bit over `instances`
// seeded random instances; max relative error must stay below `tol`.
std::vector<GradCheckEntry> run_gradcheck(const std::string& which, std::uint64_t seed,
                                          int instances = 20, double tol = 1e-4);

const std::vector<std::string>& gradcheck_names();

}  // namespace sedkit
