"""Benchmark the compiled CSR kernels against the numpy fallback.

Times the neighbor-mean forward/adjoint on a corpus-scale graph (2596 regions,
1669 features, ~78k undirected edges) and one full training step through the
whole model with each backend.

Usage: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from ecorec import kernels
from ecorec.data import GenConfig, split_interactions
from ecorec.graph import build_graph, prune_graph
from ecorec.model import ModelContext, loss_and_grads
from ecorec.params import TrainConfig, VariantSpec, init_params
from ecorec.synth import gen_synthetic


def timeit(fn, repeat=10):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    print("available backends:", ", ".join(kernels.available_backends()))
    cfg = GenConfig(n_regions=2596, n_patterns=94, n_features=1669,
                    n_clusters=58, p_in=0.3, p_out=0.01, feature_noise=0.1,
                    text_dim=768, image_dim=2048, seed=0)
    synth = gen_synthetic(cfg)
    ds = synth.dataset()
    kg = prune_graph(build_graph(ds.triples, 2596, 1669, ds.n_relations), 2)
    d = 64
    rng = np.random.default_rng(0)
    x = np.ascontiguousarray(rng.normal(size=(kg.n_nodes, d)))
    g = np.ascontiguousarray(rng.normal(size=(kg.n_nodes, d)))
    print(f"graph: {kg.n_nodes} nodes, {kg.n_edges} undirected edges, d={d}")

    results = {}
    for backend in kernels.available_backends():
        kernels.set_backend(backend)
        fwd = timeit(lambda: kernels.mean_neighbors(kg.indptr, kg.indices, x))
        adj = timeit(lambda: kernels.mean_neighbors_adjoint(kg.indptr, kg.indices, g))
        results[backend] = (fwd, adj)

    tc = TrainConfig(embedding_dim=d, layers=3, seed=0)
    ctx = ModelContext.build(ds, kg, tc, VariantSpec())
    params = init_params(tc, ctx.shapes())
    train_pairs = [(r, sorted(p)[0]) for r, p in
                   split_interactions(ds.positives, 0).train.items()][:128]
    batch = np.array([[r, p, (p + 1) % 94] for r, p in train_pairs])
    for backend in kernels.available_backends():
        kernels.set_backend(backend)
        step = timeit(lambda: loss_and_grads(batch, params, ctx), repeat=5)
        results[backend] += (step,)

    print(f"\n{'backend':<10}{'mean_neighbors':>16}{'adjoint':>12}{'full step':>12}")
    for backend, (fwd, adj, step) in results.items():
        print(f"{backend:<10}{fwd * 1e3:>14.2f}ms{adj * 1e3:>10.2f}ms{step * 1e3:>10.2f}ms")
    if len(results) == 2:
        f_np, a_np, s_np = results["numpy"]
        f_cy, a_cy, s_cy = results["cython"]
        print(f"\nspeedup (cython over numpy): forward {f_np / f_cy:.1f}x, "
              f"adjoint {a_np / a_cy:.1f}x, full step {s_np / s_cy:.2f}x")


if __name__ == "__main__":
    main()
