"""Reference values for the C++ test suite, computed independently with numpy.

Mirrors the counter-based generator so that the same random tensors can be
rebuilt here. Run: python3 scripts/oracles.py
"""
import itertools
import math

import numpy as np

M64 = (1 << 64) - 1


def splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & M64
    return x ^ (x >> 31)


class CounterRng:
    def __init__(self, key):
        self.key, self.counter = key, 0

    def next(self):
        v = splitmix64(self.key ^ splitmix64(self.counter))
        self.counter += 1
        return v

    def uniform(self):
        return (self.next() >> 11) * 2.0**-53


def random_tensor(order, n, seed):
    rng = CounterRng(seed)
    return np.array([2 * rng.uniform() - 1 for _ in range(n**order)]).reshape((n,) * order)


def random_symmetric(order, n, seed):
    rng = CounterRng(seed)
    t = np.zeros((n,) * order)
    for ms in itertools.combinations_with_replacement(range(n), order):
        v = 2 * rng.uniform() - 1
        for perm in set(itertools.permutations(ms)):
            t[perm] = v
    return t


def agreement(labels, order):
    n = len(labels)
    y = np.zeros((n,) * order)
    for idx in itertools.product(range(n), repeat=order):
        c = {labels[i] for i in idx}
        if len(c) == 1 and labels[idx[0]] >= 0:
            y[idx] = 1
    return y


def span_projector(a, mode):
    unf = np.moveaxis(a, mode, 0).reshape(a.shape[0], -1)
    u, s, _ = np.linalg.svd(unf, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((a.shape[0],) * 2)
    r = int(np.sum(s > 1e-10 * s[0]))
    return u[:, :r] @ u[:, :r].T


def apply_modes(x, mats):
    for mode, p in enumerate(mats):
        x = np.moveaxis(np.tensordot(p, x, axes=([1], [mode])), 0, mode)
    return x


def q_project(ref, x):
    m = ref.ndim
    ps = [span_projector(ref, j) for j in range(m)]
    total = apply_modes(x, ps)
    for i in range(m):
        ops = list(ps)
        ops[i] = np.eye(ref.shape[0]) - ops[i]
        total = total + apply_modes(x, ops)
    return total


def spectral(a, starts=4000, seed=0):
    rng = np.random.default_rng(seed)
    n, m = a.shape[0], a.ndim
    best = 0.0
    for _ in range(starts):
        u = rng.normal(size=n)
        u /= np.linalg.norm(u)
        for _ in range(400):
            g = a
            for _ in range(m - 1):
                g = g @ u
            f = g @ u
            v = np.sign(f) * g + abs(f) * u
            v /= np.linalg.norm(v)
            if np.linalg.norm(v - u) < 1e-15:
                break
            u = v
        g = a
        for _ in range(m):
            g = g @ u
        best = max(best, abs(g))
    return best


if __name__ == "__main__":
    a, b = random_tensor(3, 3, 11), random_tensor(3, 3, 12)
    print("inner(random_tensor(3,3,11), random_tensor(3,3,12)) =", repr(float(np.sum(a * b))))

    s = random_symmetric(3, 4, 5)
    print("spectral(random_symmetric(3,4,5)) =", repr(float(spectral(s))))
    s4 = random_symmetric(4, 3, 6)
    print("spectral(random_symmetric(4,3,6)) =", repr(float(spectral(s4))))

    labels = [0, 0, 1, 1, -1]
    y = agreement(labels, 3)
    x = random_symmetric(3, 5, 21)
    q = q_project(y, x)
    print("q_project(Y*[0,0,1,1,-1], random_symmetric(3,5,21))(0,1,4) =", repr(float(q[0, 1, 4])))
    print("  (2,3,3) =", repr(float(q[2, 3, 3])), " linf =", repr(float(np.abs(q).max())))

    print("constant lambda n=8 m=3 p=.9 q=.1 C=1 =", repr(3 * math.sqrt(0.9 * (1 - 0.1) * 24 * math.log(3))))
    print("bernstein threshold n=8 m=3 k=4 p=.5 q=.3 =",
          repr(math.sqrt(2 * 4 * 16 * 0.5 * 0.7 * math.log(8)) + 2 / 3 * 4 * math.log(8)))
    print("threshold lhs p=1 q=0 m=2 C=1 =", repr(1 / math.sqrt(32 * math.log(2))))
