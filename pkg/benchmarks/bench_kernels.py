"""Compare the numba and numpy backends of the hot kernels.

Times the SMO dual solver, the rescaled-range (Hurst) kernel and one
decision-loop tick (online FASTER + range40 features + voting prediction).

    python3 benchmarks/bench_kernels.py --repeat 5
"""

import argparse
import time

import numpy as np

from mindrace._accel import use_numba
from mindrace._kernels import rs_mean, smo_solve
from mindrace.svm import KernelSpec, kernel_matrix, scale_gamma


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def smo_case(n, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 16))
    y = np.where(X[:, 0] + 0.5 * rng.normal(size=n) > 0, 1.0, -1.0)
    K = kernel_matrix(KernelSpec("rbf", scale_gamma(X)), X, X)
    return K, y


def tick_case():
    from mindrace.core import TWO_CLASS
    from mindrace.faster import faster_offline
    from mindrace.features import BandSpec, band_features, fft_abs_array, window_array
    from mindrace.io import epochs_from_events, synthesize, two_class_config
    from mindrace.svm import train_voting_svm
    from mindrace.control import LoopConfig, make_classifier

    rec, _ = synthesize(two_class_config(seed=0, montage="standard63", fs=500.0, epochs_per_class=10))
    ep = epochs_from_events(rec, TWO_CLASS)
    clean, model, _ = faster_offline(ep)
    win, _, _, lab = window_array(clean, 1.0, 0.5)
    band = BandSpec.named("range40")
    clf = train_voting_svm(band_features(fft_abs_array(win), 1.0, band), lab, band_edges=band.edges())
    classify = make_classifier(model, clf, rec.fs, LoopConfig())
    window = rec.data[:, 1000:1500]
    return lambda: classify(window)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 400, 800])
    ap.add_argument("--skip-tick", action="store_true", help="skip the end-to-end tick timing")
    args = ap.parse_args(argv)

    backends = ["numba", "numpy"] if use_numba() else ["numpy"]
    if not use_numba():
        print("numba unavailable or disabled; timing the numpy backend only")

    print(f"{'kernel':<22}{'backend':<8}{'seconds':>12}")
    for n in args.sizes:
        K, y = smo_case(n)
        for b in backends:
            smo_solve(K, y, 1.0, backend=b)  # compile / warm up
            t = best_of(lambda: smo_solve(K, y, 1.0, backend=b), args.repeat)
            print(f"{'smo n=' + str(n):<22}{b:<8}{t:>12.5f}")

    x = np.cumsum(np.random.default_rng(1).normal(size=4000))
    sizes = [8 * 2**k for k in range(8)]
    for b in backends:
        rs_mean(x, 8, backend=b)
        t = best_of(lambda: [rs_mean(x, n, backend=b) for n in sizes], args.repeat * 20)
        print(f"{'hurst R/S len=4000':<22}{b:<8}{t:>12.5f}")

    if not args.skip_tick:
        tick = tick_case()
        tick()
        t = best_of(tick, args.repeat * 4)
        print(f"{'tick 63ch fs=500':<22}{'active':<8}{t:>12.5f}  (budget 0.8 s)")


if __name__ == "__main__":
    main()
