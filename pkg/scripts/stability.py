"""Distance between solutions of the periodic SDE with drift perturbed by
eta sin t and the unperturbed solution, against eta."""

import argparse

from stepanov.corpus import stability_experiment


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--etas", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025, 0.0125])
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--seed", type=int, default=17)
    args = ap.parse_args(argv)

    res = stability_experiment(tuple(args.etas), n=args.n, seed=args.seed)
    for e, d in zip(res.etas, res.distances):
        print(f"eta={e:<8g} sup_t (E|X_eta - X|^2)^(1/2) = {d:.6f}  ratio {d / e:.4f}")
    print(f"slope {res.slope:.5f}, intercept {res.intercept:.2e}, R^2 {res.r_squared:.6f}")


if __name__ == "__main__":
    main()
