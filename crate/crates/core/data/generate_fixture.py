"""Simulate a short-tail claims portfolio and write its run-off triangles.

Each claim is reported with a short delay, makes one or two payments and
settles within the horizon. Upper triangles (i + j <= J) go to the
fixture directory in long `i,j,value` format; the lower-triangle payments
are kept in `actual_payments.csv` for back-testing.
"""

import csv
import os

import numpy as np

J = 9
SEED = 20240
OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixture")


def main():
    rng = np.random.default_rng(SEED)
    shape = (J + 1, J + 1)
    paid = np.zeros(shape)
    counts = np.zeros(shape, dtype=np.int64)
    open_ = np.zeros(shape, dtype=np.int64)
    reported = np.zeros(J + 1, dtype=np.int64)
    case = np.zeros(shape)
    sizes = [[] for _ in range(J + 1)]

    for i in range(J + 1):
        n_claims = rng.poisson(2500 * 1.03 ** i)
        for _ in range(n_claims):
            rep = min(rng.choice(3, p=[0.7, 0.25, 0.05]), J)
            settle = min(rep + rng.geometric(0.35) - 1, J)
            n_pay = 1 if settle == rep or rng.random() < 0.6 else 2
            pay_at = [settle] if n_pay == 1 else [rng.integers(rep, settle), settle]
            ultimate = rng.lognormal(np.log(8000.0) + 0.12 * settle, 0.6)
            share = [1.0] if n_pay == 1 else [0.3, 0.7]
            if i + rep <= J:
                reported[i] += 1
            for j, w in zip(pay_at, share):
                amount = ultimate * w
                paid[i, j] += amount
                counts[i, j] += 1
                sizes[j].append(amount)
            for j in range(rep, settle):
                open_[i, j] += 1
                case[i, j] += ultimate * rng.lognormal(0.0, 0.1)

    os.makedirs(OUT, exist_ok=True)
    upper = [(i, j) for i in range(J + 1) for j in range(J + 1 - i)]
    lower = [(i, j) for i in range(J + 1) for j in range(J + 1 - i, J + 1)]

    def write(name, cells, tri, fmt):
        with open(os.path.join(OUT, name), "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["i", "j", "value"])
            for i, j in cells:
                w.writerow([i, j, fmt(tri[i, j])])

    money = lambda v: f"{v:.2f}"
    write("incremental_payments.csv", upper, paid, money)
    write("payments_number.csv", upper, counts, str)
    write("open_claims_number.csv", upper, open_, str)
    write("cased_payments.csv", upper, case, money)
    write("actual_payments.csv", lower, paid, money)
    with open(os.path.join(OUT, "reported_claims.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["i", "value"])
        for i in range(J + 1):
            w.writerow([i, reported[i]])
    with open(os.path.join(OUT, "czj.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["j", "value"])
        for j in range(J + 1):
            s = np.asarray(sizes[j])
            w.writerow([j, f"{s.std() / s.mean():.6f}"])


if __name__ == "__main__":
    main()
