"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both modules are imported directly, so the comparison does not depend on
``QGEOM_PURE_PYTHON``. Results are also checked for agreement.
"""
import argparse
import time

import numpy as np

from qgeom import _fallback
from qgeom.capacity import channel_from_affine, identity_channel, image_states
from qgeom.distances import neg_entropy, stack, stack_eigen
from qgeom.voronoi import fibonacci_points

try:
    from qgeom import _kernels
except ImportError:
    _kernels = None


def random_hermitian(n, d, rng):
    A = rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))
    return 0.5 * (A + A.conj().transpose(0, 2, 1))


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def image_problem(channel, n):
    pts = image_states(channel, fibonacci_points(n))
    lam, _ = stack_eigen(pts)
    return stack(pts), neg_entropy(np.clip(lam, 0, None))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled kernels not built; only the fallback is available")
        return

    rng = np.random.default_rng(0)
    cases = []
    for n, d in ((2000, 2), (2000, 4), (500, 8)):
        H = random_hermitian(n, d, rng)
        cases.append((f"eigh n={n} d={d}", lambda m, H=H: m.eigh(H), lambda a, b: np.abs(a[0] - b[0]).max()))
    damping = channel_from_affine(np.diag([np.sqrt(0.7), np.sqrt(0.7), 0.7]), [0.0, 0.0, 0.3])
    for name, ch in (("identity", identity_channel()), ("amplitude damping 0.3", damping)):
        P, ns = image_problem(ch, 1000)
        cases.append((f"seb {name}", lambda m, P=P, ns=ns: m.seb_frank_wolfe(P, ns, 100_000, 1e-5),
                      lambda a, b: abs(a[3] - b[3])))
        cases.append((f"ba {name}", lambda m, P=P, ns=ns: m.blahut_arimoto(P, ns, 1_000_000, 1e-5),
                      lambda a, b: abs(a[4] - b[4])))

    print(f"{'case':28s} {'cython s':>10s} {'python s':>10s} {'speedup':>8s} {'max diff':>10s}")
    for name, run, diff in cases:
        tc, rc = best_of(lambda: run(_kernels), args.repeat)
        tp, rp = best_of(lambda: run(_fallback), args.repeat)
        print(f"{name:28s} {tc:10.4f} {tp:10.4f} {tp / tc:8.1f} {diff(rc, rp):10.2e}")


if __name__ == "__main__":
    main()
