#include <benchmark/benchmark.h>

#include "vgstar/error.hpp"

int main(int argc, char** argv) {
  vgs::set_warning_sink([](const std::string&) {});
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
