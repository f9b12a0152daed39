#ifndef NIPSR_GRADCHECK_HPP
#define NIPSR_GRADCHECK_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace nipsr {

struct GradCheckResult {
    std::string name;
    double max_rel_err = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// Central finite-difference checks of every hand-derived gradient:
//   nip_penalty_grad      9x9 plane, responses bounded away from the kink
//   total_loss_grad       2-item batch, lambda = 1e-3
//   network_params        depth 3, width 8, 12x12 input, all parameters
//   map_objective_grad    9x9 HR plane, scale 3
// Each passes when the worst per-coordinate relative error is within its
// pinned tolerance. Deterministic for a given seed.
std::vector<GradCheckResult> run_gradient_checks(std::uint64_t seed = 1234);

}  // namespace nipsr

#endif
