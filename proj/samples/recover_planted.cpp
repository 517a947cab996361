// Samples a hypergraph stochastic block model, certifies the planted
// partition and recovers it with the swap local search.

#include <iostream>

#include "hyperpart/hyperpart.hpp"

int main() {
  using namespace hyperpart;
  const ModelParams params = preset("hsbm", {.n = {}, .m = 3, .r = 2, .k = 4, .p = 0.95, .q = 0.05});
  const ModelInstance inst = make_instance(params, 7);

  const CertificateReport cert = certificate(inst);
  std::cout << "certificate: " << (cert.passes ? "pass" : "fail") << "  margin " << cert.margin
            << "  lambda " << cert.lambda << "  spectral " << to_string(cert.spectral_method)
            << '\n';

  const SolveResult res = local_search(inst.adjacency, params.r, params.k, {.restarts = 8});
  std::cout << "local search objective " << res.objective << ", planted recovered: "
            << (exactness(res.partition, inst.truth) ? "yes" : "no") << '\n';
}
