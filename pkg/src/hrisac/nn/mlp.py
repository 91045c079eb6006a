"""Dense feed-forward network with manual reverse-mode gradients and Adam.

Rectifier hidden layers; tanh or linear output.  All arithmetic is double
precision and deterministic given the seed, with no hidden RNG anywhere in
forward/backward.
"""

from __future__ import annotations

import numpy as np

from ._backend import kernels


class Mlp:
    """Layer sizes ``[d_in, h1, ..., d_out]``; at least one affine layer."""

    def __init__(self, sizes, out_act: str = "linear",
                 rng: np.random.Generator | None = None):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if out_act not in ("linear", "tanh"):
            raise ValueError("out_act must be 'linear' or 'tanh'")
        if rng is None:
            rng = np.random.default_rng()
        self.sizes = [int(s) for s in sizes]
        self.out_act = out_act
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            self.biases.append(rng.uniform(-bound, bound, size=fan_out))

    @property
    def parameters(self) -> list:
        """Flat parameter list, weights and biases interleaved per layer."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    def copy(self) -> "Mlp":
        clone = Mlp.__new__(Mlp)
        clone.sizes = list(self.sizes)
        clone.out_act = self.out_act
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        return clone

    # -- forward -----------------------------------------------------------
    def _check_input(self, x: np.ndarray) -> tuple[np.ndarray, bool]:
        x = np.ascontiguousarray(x, dtype=float)
        single = x.ndim == 1
        if single:
            x = x.reshape(1, -1)
        if x.ndim != 2 or x.shape[1] != self.sizes[0]:
            raise ValueError(f"input must have {self.sizes[0]} features")
        return x, single

    def forward(self, x: np.ndarray) -> np.ndarray:
        y, _ = self.forward_cached(np.atleast_2d(np.ascontiguousarray(x, dtype=float)))
        return y[0] if np.asarray(x).ndim == 1 else y

    def forward_cached(self, x: np.ndarray) -> tuple[np.ndarray, dict]:
        """Batched forward returning the cache needed by :meth:`backward`."""
        a, _ = self._check_input(x)
        inputs = []
        preacts = []
        last = self.num_layers - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            inputs.append(a)
            z = kernels.dense_forward(a, w, b)
            preacts.append(z)
            if i < last:
                a = kernels.relu(z)
            elif self.out_act == "tanh":
                a = kernels.tanh_act(z)
            else:
                a = z
        if not np.all(np.isfinite(a)):
            raise FloatingPointError("network output is not finite")
        return a, {"inputs": inputs, "preacts": preacts, "output": a}

    # -- backward ----------------------------------------------------------
    def backward(self, cache: dict, grad_out: np.ndarray
                 ) -> tuple[list, np.ndarray]:
        """Gradients for one cached forward pass.

        Returns (parameter gradients in ``parameters`` order, gradient with
        respect to the input batch).
        """
        grad = np.ascontiguousarray(grad_out, dtype=float)
        if grad.shape != cache["output"].shape:
            raise ValueError("upstream gradient shape mismatch")
        last = self.num_layers - 1
        grads_w: list = [None] * self.num_layers
        grads_b: list = [None] * self.num_layers
        for i in range(last, -1, -1):
            if i == last:
                if self.out_act == "tanh":
                    dz = kernels.tanh_backward(grad, cache["output"])
                else:
                    dz = grad
            else:
                dz = kernels.relu_backward(grad, cache["preacts"][i])
            dw, db = kernels.dense_backward_params(cache["inputs"][i], dz)
            grads_w[i] = dw
            grads_b[i] = db
            grad = kernels.dense_backward_input(dz, self.weights[i])
        flat = []
        for dw, db in zip(grads_w, grads_b):
            flat.append(dw)
            flat.append(db)
        return flat, grad


class Adam:
    """Bias-corrected first/second-moment optimizer over a parameter list."""

    def __init__(self, params: list, lr: float = 1e-4, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params: list, grads: list) -> None:
        if len(params) != len(self.m) or len(grads) != len(self.m):
            raise ValueError("parameter/gradient list length mismatch")
        self.step_count += 1
        for p, g, m, v in zip(params, grads, self.m, self.v):
            if p.shape != g.shape:
                raise ValueError("parameter/gradient shape mismatch")
            kernels.adam_update(p, np.ascontiguousarray(g, dtype=float), m, v,
                                self.step_count, self.lr, self.beta1,
                                self.beta2, self.eps)


def soft_update(target_params: list, online_params: list, tau: float) -> None:
    """target <- (1 - tau) * target + tau * online, elementwise in place."""
    if len(target_params) != len(online_params):
        raise ValueError("parameter list length mismatch")
    for dst, src in zip(target_params, online_params):
        if dst.shape != src.shape:
            raise ValueError("parameter shape mismatch")
        kernels.blend(dst, np.ascontiguousarray(src, dtype=float), tau)


def save_mlp(path, net: Mlp) -> None:
    """Bit-exact checkpoint: layer-size header plus raw float64 arrays."""
    payload = {"sizes": np.asarray(net.sizes, dtype=np.int64),
               "out_act": np.asarray(net.out_act)}
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        payload[f"w{i}"] = w
        payload[f"b{i}"] = b
    np.savez(path, **payload)


def load_mlp(path) -> Mlp:
    with np.load(path, allow_pickle=False) as data:
        sizes = [int(s) for s in data["sizes"]]
        net = Mlp.__new__(Mlp)
        net.sizes = sizes
        net.out_act = str(data["out_act"])
        net.weights = [np.ascontiguousarray(data[f"w{i}"]) for i in range(len(sizes) - 1)]
        net.biases = [np.ascontiguousarray(data[f"b{i}"]) for i in range(len(sizes) - 1)]
    return net
