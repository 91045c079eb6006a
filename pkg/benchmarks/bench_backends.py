"""Compare the compiled kernel core against the numpy fallback.

Times the dense-network kernels on the exact shapes the desk-profile
learner uses (single-state inference and batch-100 updates), plus one full
critic+actor update step per backend.

Usage: python benchmarks/bench_backends.py [--repeats 200]
"""

import argparse
import time

import numpy as np

from hrisac.config import ExperimentConfig
from hrisac.nn import available_backends, get_backend
from hrisac.nn.mlp import Adam, Mlp


def timeit(fn, repeats):
    fn()  # warm up
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_kernels(kernels, repeats):
    cfg = ExperimentConfig.desk()
    d_state, d_action = cfg.state_dim, cfg.action_dim
    rng = np.random.default_rng(0)
    results = {}

    w1 = np.ascontiguousarray(rng.normal(size=(64, d_state)))
    b1 = np.ascontiguousarray(rng.normal(size=64))
    single = np.ascontiguousarray(rng.normal(size=(1, d_state)))
    batch = np.ascontiguousarray(rng.normal(size=(100, d_state)))
    results["dense_forward 1x432->64"] = timeit(
        lambda: kernels.dense_forward(single, w1, b1), repeats)
    results["dense_forward 100x432->64"] = timeit(
        lambda: kernels.dense_forward(batch, w1, b1), repeats)

    dout = np.ascontiguousarray(rng.normal(size=(100, 64)))
    results["dense_backward_params 100x432x64"] = timeit(
        lambda: kernels.dense_backward_params(batch, dout), repeats)
    results["dense_backward_input 100x64->432"] = timeit(
        lambda: kernels.dense_backward_input(dout, w1), repeats)

    z = np.ascontiguousarray(rng.normal(size=(100, 64)))
    results["relu 100x64"] = timeit(lambda: kernels.relu(z), repeats)
    results["tanh 100x80"] = timeit(
        lambda: kernels.tanh_act(
            np.ascontiguousarray(rng.normal(size=(100, d_action)))), repeats)

    p = np.ascontiguousarray(rng.normal(size=(64, d_state)))
    g = np.ascontiguousarray(rng.normal(size=(64, d_state)))
    m = np.zeros_like(p)
    v = np.zeros_like(p)
    counter = [0]

    def adam_step():
        counter[0] += 1
        kernels.adam_update(p, g, m, v, counter[0], 1e-3, 0.9, 0.999, 1e-8)

    results["adam_update 64x432"] = timeit(adam_step, repeats)

    dst = np.ascontiguousarray(rng.normal(size=64 * d_state))
    src = np.ascontiguousarray(rng.normal(size=64 * d_state))
    results["soft_update 64x432"] = timeit(
        lambda: kernels.blend(dst, src, 0.005), repeats)
    return results


def bench_update_step(backend_name, repeats):
    """One critic + one actor batch update on desk-profile shapes."""
    import hrisac.nn._backend as backend_mod
    saved = backend_mod.kernels
    backend_mod.kernels = get_backend(backend_name)
    try:
        cfg = ExperimentConfig.desk()
        rng = np.random.default_rng(1)
        hidden = list(cfg.hidden_sizes)
        actor = Mlp([cfg.state_dim] + hidden + [cfg.action_dim],
                    out_act="tanh", rng=rng)
        critic = Mlp([cfg.state_dim + cfg.action_dim] + hidden + [1],
                     out_act="linear", rng=rng)
        actor_opt = Adam(actor.parameters, lr=1e-3)
        critic_opt = Adam(critic.parameters, lr=1e-3)
        states = rng.normal(size=(100, cfg.state_dim))
        targets = rng.normal(size=100)

        def step():
            actions, a_cache = actor.forward_cached(states)
            q, c_cache = critic.forward_cached(np.hstack([states, actions]))
            err = q[:, 0] - targets
            grads, _ = critic.backward(c_cache, (2.0 / 100.0) * err[:, None])
            critic_opt.step(critic.parameters, grads)
            q2, c2 = critic.forward_cached(np.hstack([states, actions]))
            _, d_in = critic.backward(c2, np.full_like(q2, 1.0 / 100.0))
            a_grads, _ = actor.backward(a_cache, d_in[:, cfg.state_dim:])
            actor_opt.step(actor.parameters, [-g for g in a_grads])

        return timeit(step, max(repeats // 10, 5))
    finally:
        backend_mod.kernels = saved


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    names = available_backends()
    print(f"backends available: {', '.join(names)}")
    tables = {name: bench_kernels(get_backend(name), args.repeats)
              for name in names}
    steps = {name: bench_update_step(name, args.repeats) for name in names}

    rows = list(next(iter(tables.values())).keys())
    width = max(len(r) for r in rows) + 2
    header = "kernel".ljust(width) + "".join(f"{n:>14}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for row in rows:
        line = row.ljust(width)
        for name in names:
            line += f"{tables[name][row] * 1e6:>12.2f}us"
        if len(names) == 2:
            line += f"{tables[names[1]][row] / tables[names[0]][row]:>9.2f}x"
        print(line)
    line = "full critic+actor update".ljust(width)
    for name in names:
        line += f"{steps[name] * 1e6:>12.2f}us"
    if len(names) == 2:
        line += f"{steps[names[1]] / steps[names[0]]:>9.2f}x"
    print(line)


if __name__ == "__main__":
    main()
