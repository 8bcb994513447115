#include "fsi/grid.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace fsi;

namespace {

struct Setup {
    Grid g = make_grid(6.0, 96, 1.0);
    Masks m;
    MollifierKernel k;
    FaceVec u, a, out;
    CellVec div;
    AdvectionFluxes fl;

    explicit Setup(int n) {
        g = make_grid(6.0, n, 1.0);
        BodyGeometry b;
        m = build_masks(g, b);
        k = make_mollifier(2 * g.h, g.h, 0);
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> U(-1, 1);
        u.assign(g.nfaces(), 0.0);
        a.assign(g.nfaces(), 0.0);
        for (int f = 0; f < g.nfaces(); ++f) {
            if (m.face_free[f]) u[f] = U(rng);
            a[f] = U(rng);
        }
        build_advection_fluxes(g, a, fl);
    }
};

Setup& setup(int n) {
    static Setup s96(96), s192(192);
    return n == 96 ? s96 : s192;
}

void BM_mollify(benchmark::State& st) {
    Setup& s = setup((int)st.range(0));
    for (auto _ : st) mollify(s.g, s.k, s.u, s.out);
}
void BM_mollify_serial(benchmark::State& st) {
    Setup& s = setup((int)st.range(0));
    for (auto _ : st) mollify_serial(s.g, s.k, s.u, s.out);
}
void BM_advection(benchmark::State& st) {
    Setup& s = setup((int)st.range(0));
    for (auto _ : st) advection_apply(s.g, s.m, s.fl, 50.0, 0.1, s.u, s.out);
}
void BM_advection_serial(benchmark::State& st) {
    Setup& s = setup((int)st.range(0));
    for (auto _ : st) advection_apply_serial(s.g, s.m, s.fl, 50.0, 0.1, s.u, s.out);
}
void BM_helmholtz(benchmark::State& st) {
    Setup& s = setup((int)st.range(0));
    for (auto _ : st) helmholtz_apply(s.g, s.m, 1e-3, s.u, s.out);
}
void BM_helmholtz_serial(benchmark::State& st) {
    Setup& s = setup((int)st.range(0));
    for (auto _ : st) helmholtz_apply_serial(s.g, s.m, 1e-3, s.u, s.out);
}
void BM_divergence(benchmark::State& st) {
    Setup& s = setup((int)st.range(0));
    for (auto _ : st) divergence(s.g, s.u, s.div);
}
void BM_divergence_serial(benchmark::State& st) {
    Setup& s = setup((int)st.range(0));
    for (auto _ : st) divergence_serial(s.g, s.u, s.div);
}
void BM_gradient_norms(benchmark::State& st) {
    Setup& s = setup((int)st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(gradient_norms(s.g, s.m, s.u));
}
void BM_gradient_norms_serial(benchmark::State& st) {
    Setup& s = setup((int)st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(gradient_norms_serial(s.g, s.m, s.u));
}

}  // namespace

BENCHMARK(BM_mollify)->Arg(96)->Arg(192);
BENCHMARK(BM_mollify_serial)->Arg(96)->Arg(192);
BENCHMARK(BM_advection)->Arg(96)->Arg(192);
BENCHMARK(BM_advection_serial)->Arg(96)->Arg(192);
BENCHMARK(BM_helmholtz)->Arg(96)->Arg(192);
BENCHMARK(BM_helmholtz_serial)->Arg(96)->Arg(192);
BENCHMARK(BM_divergence)->Arg(96)->Arg(192);
BENCHMARK(BM_divergence_serial)->Arg(96)->Arg(192);
BENCHMARK(BM_gradient_norms)->Arg(96)->Arg(192);
BENCHMARK(BM_gradient_norms_serial)->Arg(96)->Arg(192);

BENCHMARK_MAIN();
