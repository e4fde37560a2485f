#include <benchmark/benchmark.h>

#include "tactile_rom/mpm/sim.hpp"
#include "tactile_rom/mpm/transfer.hpp"

namespace {

using namespace trom;
using namespace trom::mpm;

// A mid-press configuration so F and C carry realistic values.
struct Fixture {
  SimConfig cfg;
  Simulation sim;

  explicit Fixture(long particles)
      : cfg(make_config(particles)), sim(cfg, Resolution::Coarse, 7) {
    sim.advance_to(0.02);
  }

  static SimConfig make_config(long particles) {
    SimConfig cfg;
    cfg.grid_dims = Vec3i(48, 48, 24);
    cfg.dx = 1e-3;
    cfg.n_coarse = particles;
    cfg.elastomer_origin = Vec3::Zero();
    cfg.elastomer_extents = Vec3(0.03, 0.03, 0.006);
    cfg.indenter.shape = SdfShape::Sphere;
    cfg.indenter.radius = 5e-3;
    cfg.indenter.motion.speed = 5e-3;
    cfg.indenter.motion.depth = 5e-4;
    cfg.indenter.motion.hold = 1.0;
    cfg.contact_stiffness = 1e8;
    set_press_start(cfg, 0.0, 0.0, 0.0);
    return cfg;
  }
};

Fixture& fixture(long particles) {
  static Fixture f16k(16000);
  static Fixture f64k(64000);
  return particles == 16000 ? f16k : f64k;
}

void BM_p2g(benchmark::State& state) {
  Fixture& f = fixture(state.range(0));
  ScatterWorkspace ws;
  for (auto _ : state) {
    p2g(f.sim.state, f.sim.grid, ws);
    benchmark::DoNotOptimize(f.sim.grid.mass.data());
  }
  state.SetItemsProcessed(state.iterations() * f.sim.state.size());
}

void BM_p2g_serial(benchmark::State& state) {
  Fixture& f = fixture(state.range(0));
  for (auto _ : state) {
    p2g_serial(f.sim.state, f.sim.grid);
    benchmark::DoNotOptimize(f.sim.grid.mass.data());
  }
  state.SetItemsProcessed(state.iterations() * f.sim.state.size());
}

void BM_forces(benchmark::State& state) {
  Fixture& f = fixture(state.range(0));
  ScatterWorkspace ws;
  std::vector<Vec3> force;
  for (auto _ : state) {
    internal_forces(f.sim.state, f.sim.grid, f.cfg.material, force, ws);
    benchmark::DoNotOptimize(force.data());
  }
  state.SetItemsProcessed(state.iterations() * f.sim.state.size());
}

void BM_forces_serial(benchmark::State& state) {
  Fixture& f = fixture(state.range(0));
  std::vector<Vec3> force;
  for (auto _ : state) {
    internal_forces_serial(f.sim.state, f.sim.grid, f.cfg.material, force);
    benchmark::DoNotOptimize(force.data());
  }
  state.SetItemsProcessed(state.iterations() * f.sim.state.size());
}

// dt = 0 keeps the gather arithmetic intact while leaving x and F fixed, so
// iterations do not drift the state.
void BM_g2p(benchmark::State& state) {
  Fixture& f = fixture(state.range(0));
  for (auto _ : state) {
    g2p(f.sim.grid, f.sim.state, 0.0);
    benchmark::DoNotOptimize(f.sim.state.particles.data());
  }
  state.SetItemsProcessed(state.iterations() * f.sim.state.size());
}

void BM_g2p_serial(benchmark::State& state) {
  Fixture& f = fixture(state.range(0));
  for (auto _ : state) {
    g2p_serial(f.sim.grid, f.sim.state, 0.0);
    benchmark::DoNotOptimize(f.sim.state.particles.data());
  }
  state.SetItemsProcessed(state.iterations() * f.sim.state.size());
}

}  // namespace

BENCHMARK(BM_p2g)->Arg(16000)->Arg(64000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_p2g_serial)->Arg(16000)->Arg(64000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_forces)->Arg(16000)->Arg(64000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_forces_serial)->Arg(16000)->Arg(64000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_g2p)->Arg(16000)->Arg(64000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_g2p_serial)->Arg(16000)->Arg(64000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
