"""Arbitrary-precision reference values for the gain certificate.

Draws 20 parameter tuples (alpha, p, omega_max, k) with a fixed seed, rounds
the inputs to binary64 and evaluates every certificate constant with mpmath at
50 significant digits. Output: certificate_oracle.json next to this script.

    python3 certificate_oracle.py
"""
import json
import os
import random

from mpmath import mp, mpf, sqrt, log

mp.dps = 50


def certificate(alpha, p, omega_max, k):
    alpha, p, omega_max, k = map(mpf, (alpha, p, omega_max, k))
    q = alpha / (2 * sqrt(1 - p))
    big_k = sqrt((1 + q) / (1 - q))
    ln_k = log(big_k)
    a_m = max(sqrt(2 + 2 * alpha**2), sqrt(3 + alpha**2))
    l = sqrt(2) * omega_max
    gamma = k * alpha / 2 - sqrt(big_k * k * l * ln_k)
    k_star = (sqrt(ln_k) + sqrt(ln_k + 2 * alpha * big_k)) ** 2 / alpha**2 * sqrt(2) * big_k * omega_max
    r_k = (1 - big_k**2 * sqrt(2) * omega_max / gamma) * (gamma / k) ** mpf(1.5) / (sqrt(a_m) * big_k**3)
    r_limit = (alpha / 2) ** mpf(1.5) / (sqrt(a_m) * big_k**3)
    return {
        "K": big_k,
        "L": l,
        "A_m": a_m,
        "gamma_k": gamma,
        "gamma_threshold": 4 * big_k * ln_k * l / alpha**2,
        "k_star": k_star,
        "r_k": r_k,
        "r_limit": r_limit,
    }


def main():
    rng = random.Random(20240611)
    cases = []
    while len(cases) < 20:
        p = rng.uniform(0.0, 0.95)
        alpha = rng.uniform(0.05, 0.95) * 2 * (1 - p) ** 0.5
        omega_max = 10 ** rng.uniform(-2, 1)
        ks = float(certificate(alpha, p, omega_max, 1.0)["k_star"])
        k = ks * 10 ** rng.uniform(0.0212, 1.301)  # k / k* in [1.05, 20]
        out = certificate(alpha, p, omega_max, k)
        cases.append(
            {
                "alpha": alpha,
                "p": p,
                "omega_max": omega_max,
                "k": k,
                "expected": {key: mp.nstr(v, 30) for key, v in out.items()},
            }
        )
    path = os.path.join(os.path.dirname(os.path.abspath(__file__)), "certificate_oracle.json")
    with open(path, "w") as f:
        json.dump(cases, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
