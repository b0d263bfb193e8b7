// scratch: green-rate vs concentration (no training needed)
#include <cstdio>
#include <cstdlib>
#include "semamark/lm.hpp"
#include "semamark/pipeline.hpp"

using namespace semamark;

int main(int argc, char** argv) {
  const double conc = argc > 1 ? std::atof(argv[1]) : 2.0;
  const MockLM lm = build_mock_lm(11, 1000, 64, conc);
  WatermarkConfig cfg;
  GenerationParams params;
  params.n_sequences = 100;
  params.seed = 271828;
  params.threads = 8;
  // lefthash green rate needs no ring model and matches semamark's closely
  const auto wm = generate_batch(lm, nullptr, cfg, Policy::Lefthash, params);
  long green = 0, total = 0;
  for (const auto& s : wm) {
    green += s.provenance["gen_green_count"].get<long>();
    total += s.length() - s.prompt_len;
  }
  std::printf("conc %.1f entropy %.2f g=%.3f\n", conc, mean_next_token_entropy(lm),
              static_cast<double>(green) / total);
  return 0;
}
