"""Small-set mass defect of h, sin and the spike train.

On a finite range every defect shrinks with the set mass; what separates h
and the spike train from sin is the size of the constant (the peak mass
density), which grows without bound as the range or the spike index grows."""

import argparse

from stepanov.corpus import levitan, spike_train
from stepanov.functions import Trig, sample
from stepanov.grid import GridWindow
from stepanov.metrics import mp_prime_defect


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dt", type=float, default=1e-4)
    ap.add_argument("--p", type=float, default=1.0)
    args = ap.parse_args(argv)

    w = GridWindow(0.0, 200.0, args.dt)
    for mass in (1e-2, 1e-3, 1e-4):
        d_h = mp_prime_defect(sample(levitan("h"), w), args.p, mass)
        d_s = mp_prime_defect(sample(Trig(((1.0, 1.0, 0.0),)), w), args.p, mass)
        print(f"mass {mass:g}: defect(h) = {d_h:.4g}, defect(sin) = {d_s:.4g}")
    for n in range(3, 7):
        path = sample(spike_train(n), GridWindow(0.0, 4.0 * n, 1e-5))
        print(f"spike train n_max={n} on [0,{4 * n}]: defect {mp_prime_defect(path, args.p, 1e-3, xi_step=0.01):.4g}")


if __name__ == "__main__":
    main()
