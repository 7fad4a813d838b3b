"""Profile of sup_t W2(law X(t), law X(t + tau)) against tau for the
periodic SDE: near zero at multiples of 2 pi, large in between."""

import argparse
import math
from pathlib import Path

import numpy as np

from stepanov import io
from stepanov.corpus import scenario
from stepanov.laws import apd_test
from stepanov.sde import picard_solve


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--out", default="out/periodic_apd")
    args = ap.parse_args(argv)

    scn = scenario("periodic_sde").with_overrides(n=args.n, seed=args.seed)
    ens = picard_solve(scn.problem, scn.config)
    taus = np.arange(0.25, 4 * math.pi + 0.3, 0.25)
    taus = np.sort(np.concatenate([taus, [2 * math.pi, 4 * math.pi]]))
    rows = apd_test(ens, taus, 0.05, dbl_subsample=100)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_csv(out / "apd_profile.csv", ["tau", "supDistance", "supDBL", "accepted"],
                 ((r.tau, r.sup_distance, r.sup_dbl, r.accepted) for r in rows))
    for r in rows:
        bar = "#" * int(60 * min(r.sup_distance, 1.0))
        print(f"tau={r.tau:7.3f}  W2={r.sup_distance:.4f} {'*' if r.accepted else ' '} {bar}")


if __name__ == "__main__":
    main()
