#include "pcm/experiment.hpp"

#include "pcm/connections.hpp"
#include "pcm/errors.hpp"

namespace pcm {

GenericityReport genericity_experiment(const GenericityParams& params) {
  if (params.samples < 1 || params.horizon < 1)
    throw Error("FormatError", "genericity experiment needs samples >= 1 and horizon >= 1");
  GenericityReport rep;
  rep.samples = params.samples;
  rep.horizon = params.horizon;
  rep.seed = params.seed;

  for (int s = 0; s < params.samples; ++s) {
    std::uint64_t sub = params.seed + static_cast<std::uint64_t>(s) * 0x9e3779b97f4a7c15ull;
    PCMap f = random_map(params.gen, sub);
    if (check_connections(f, params.horizon).ok) {
      ++rep.pass_count;
      continue;
    }
    ++rep.fail_count;
    try {
      RepairResult r = repair_connections(f, params.horizon, params.repair_eps, sub);
      (void)r;  // post-verified by construction
      ++rep.repaired_ok;
    } catch (const Error& e) {
      if (e.code() == "NoRoomToMove")
        ++rep.repair_no_room;
      else if (e.code() == "VerificationFailed")
        ++rep.repair_verification_failed;
      else
        throw;
    }
  }
  rep.pass_fraction = static_cast<double>(rep.pass_count) / params.samples;
  rep.repair_success_fraction =
      rep.fail_count == 0 ? 1.0 : static_cast<double>(rep.repaired_ok) / rep.fail_count;
  return rep;
}

}  // namespace pcm
