// Generates one farm, plans it with every IP variant and prints the profits.
//
//   plan_demo [seed] [fields] [clusters]

#include <cstdio>
#include <cstdlib>

#include "harvest/harvest.hpp"

using namespace harvest;

int main(int argc, char** argv) {
  GenParams g;
  g.seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  g.fields = argc > 2 ? std::atoi(argv[2]) : 30;
  const int clusters = argc > 3 ? std::atoi(argv[3]) : 8;
  const Instance inst = generate_instance(g);

  std::printf("seed %llu, %d fields, %d clusters\n", static_cast<unsigned long long>(g.seed), g.fields, clusters);
  std::printf("%-8s %12s %6s %8s %9s %s\n", "method", "J [EUR]", "depot", "iter", "cpu [s]", "crops");
  for (int n = 1; n <= 8; ++n) {
    try {
      const HarvestPlan p = plan(inst, n, clusters, g.seed);
      std::string crops;
      for (int k : p.active_crops) crops += inst.crops.names[static_cast<std::size_t>(k)] + " ";
      std::printf("CApR-%-3d %12.2f %6d %8d %9.3f %s%s\n", n, p.profit, p.depot, p.metrics.iter_sec, p.metrics.cpu_s,
                  crops.c_str(), p.converged ? "" : "(not converged)");
    } catch (const HarvestError& e) {
      std::printf("CApR-%-3d failed: %s\n", n, e.what());
    }
  }
  return 0;
}
