#include <benchmark/benchmark.h>

#include "rdis/elf/elf_image.hpp"
#include "rdis/elf/extract.hpp"
#include "rdis/pipeline/pipeline.hpp"

using namespace rdis;

namespace {

const elf::ElfImage& image() {
  static const elf::ElfImage img = elf::load_elf(RDIS_BENCH_INPUT);
  return img;
}

void decode_serial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(elf::decode_all_serial(image()));
}

void decode_parallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(elf::decode_all_parallel(image(), static_cast<int>(state.range(0))));
}

void scan_serial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(elf::scan_data_serial(image()));
}

void scan_parallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(elf::scan_data_parallel(image(), static_cast<int>(state.range(0))));
}

void pipeline_run(benchmark::State& state) {
  facts::FactBase f = elf::extract_facts(image());
  pipeline::PipelineConfig config;
  config.jobs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pipeline::run(f, config));
}

}  // namespace

BENCHMARK(decode_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(decode_parallel)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(scan_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(scan_parallel)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(pipeline_run)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
