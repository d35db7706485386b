#!/usr/bin/env python3
"""Independent oracle for the hand-derived reference values.

Each value is recomputed here from first principles (direct formulas, exhaustive
enumeration, brute-force pair counting) without using the C++ library, then
checked against the frozen table in derived_values.json. The C++ acceptance
suite asserts the library against the same table.

    python3 derived_values.py            # verify the frozen table
    python3 derived_values.py --write    # regenerate it
"""

import itertools
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

TABLE = Path(__file__).with_name("derived_values.json")
TOLERANCE = 1e-12


def geometric(gamma, rank):
    return gamma * (1 - gamma) ** (rank - 1)


def logarithmic(rank):
    return 1 / math.log2(max(rank, 2))


def exposure(groups_of_docs, weights, n_groups):
    eps = [0.0] * n_groups
    for g, w in zip(groups_of_docs, weights):
        eps[g] += w
    return eps


def ideal_exposure_bruteforce(grades, groups, weight, n_groups):
    """Mean group exposure over every ordering that is non-increasing in grade."""
    total = [0.0] * n_groups
    count = 0
    for perm in itertools.permutations(range(len(grades))):
        if any(grades[perm[i]] < grades[perm[i + 1]] for i in range(len(perm) - 1)):
            continue
        count += 1
        for pos, d in enumerate(perm, start=1):
            total[groups[d]] += weight(pos)
    return [t / count for t in total]


def prefix_raw(mask, p_hat, step):
    n = len(mask)
    cuts = list(range(step, n + 1, step))
    if n % step:
        cuts.append(n)
    raw = 0.0
    for i in cuts:
        share = sum(mask[:i]) / i
        raw += abs(share - p_hat) / math.log2(i)
    return raw


def prefix_normalizer_exhaustive(n, n_protected, p_hat, step):
    best = 0.0
    for pos in itertools.combinations(range(n), n_protected):
        mask = [0] * n
        for p in pos:
            mask[p] = 1
        best = max(best, prefix_raw(mask, p_hat, step))
    return best


def binom_cdf(k, c, p, first=0):
    return sum(math.comb(k, j) * p**j * (1 - p) ** (k - j) for j in range(first, min(c, k) + 1))


def fair(mask, p_hat, first=0):
    terms = []
    count = 0
    for k in range(1, len(mask) + 1):
        count += mask[k - 1]
        terms.append(binom_cdf(k, count, p_hat, first))
    return sum(terms) / len(terms)


def kl_bits(obs, tgt):
    return sum(o * math.log2(o / t) for o, t in zip(obs, tgt) if o > 0)


def tau_c_bruteforce(x, y):
    n = len(x)
    conc = disc = 0
    for i in range(n):
        for j in range(i + 1, n):
            s = (x[i] - x[j]) * (y[i] - y[j])
            conc += s > 0
            disc += s < 0
    m = min(len(set(x)), len(set(y)))
    return float(Fraction(2 * (conc - disc) * m, n * n * (m - 1)))


def compute():
    v = {}
    for r in (1, 2, 3):
        v[f"geometric_weight_rank{r}"] = geometric(0.5, r)
    for r in (1, 2, 4):
        v[f"logarithmic_weight_rank{r}"] = logarithmic(r)

    eps = exposure([0, 1], [geometric(0.5, 1), geometric(0.5, 2)], 2)
    v["group_exposure_raw_a"], v["group_exposure_raw_b"] = eps
    v["group_exposure_norm_a"], v["group_exposure_norm_b"] = [e / sum(eps) for e in eps]

    rho = (0.25, 0.75)
    per_request = ([1.0, 0.0], [0.0, 1.0])
    v["system_exposure_rho_a"] = sum(r * e[0] for r, e in zip(rho, per_request))
    v["system_exposure_rho_b"] = sum(r * e[1] for r, e in zip(rho, per_request))

    star = ideal_exposure_bruteforce([1, 1, 0], [0, 0, 1], lambda r: geometric(0.5, r), 2)
    v["target_exposure_a"], v["target_exposure_b"] = star

    v["delta_nd_3_of_10"] = 3 / 10 - 0.5
    v["delta_nd_all_protected"] = 1.0 - 0.5
    v["delta_rd_2_of_10"] = 2 / 8 - 0.5 / (1 - 0.5)
    v["delta_kl_point_mass"] = kl_bits([1.0, 0.0], [0.5, 0.5])
    v["delta_kl_75_25"] = kl_bits([0.75, 0.25], [0.5, 0.5])

    block = [1] * 10 + [0] * 10
    raw = prefix_raw(block, 0.5, 10)
    z20 = prefix_normalizer_exhaustive(20, 10, 0.5, 10)
    v["prefix_raw_block_20"] = raw
    v["prefix_normalizer_20_10"] = z20
    v["prefix_value_block_20"] = raw / z20
    v["prefix_normalizer_10_5"] = prefix_normalizer_exhaustive(10, 5, 0.5, 10)

    v["fair_single_protected_full"] = fair([1], 0.5)
    v["fair_single_protected_from_one"] = fair([1], 0.5, first=1)
    v["fair_two_protected"] = fair([1, 1], 0.5)
    v["fair_two_unprotected"] = fair([0, 0], 0.5)

    norm = [e / sum(eps) for e in eps]
    v["awrf_two_docs"] = abs(norm[0] - 0.5)
    v["awrf_single_group"] = abs(1.0 - 0.5)

    v["dp_ratio_25_75"] = 0.25 / 0.75
    v["eed_uniform"] = 0.5**2 + 0.5**2
    v["eed_point_mass"] = 1.0**2 + 0.0**2

    v["upsilon_protected"] = (1 + 0) / 2
    v["upsilon_unprotected"] = (1 + 1) / 2
    v["gamma_disc_rank1"] = geometric(0.5, 1) * 1
    v["gamma_disc_two_draws"] = (geometric(0.5, 1) + geometric(0.5, 2)) / 2

    v["eur_proportional"] = (0.3 / 0.3) / (0.7 / 0.7)
    v["eur_over_exposed"] = (0.5 / 0.25) / (0.5 / 0.75)
    v["rur_balanced"] = (0.2 / 0.4) / (0.3 / 0.6)
    v["rur_double"] = (0.2 / 0.4) / (0.1 / 0.4)

    v["iaa_small"] = abs(0.6 - 0.5) + abs(0.4 - 0.5)
    v["iaa_max"] = abs(1 - 0) + abs(0 - 1)

    e, s = [0.6, 0.4], [0.5, 0.5]
    v["eel_small"] = sum((a - b) ** 2 for a, b in zip(e, s))
    v["eer_small"] = 2 * sum(a * b for a, b in zip(e, s))
    v["eed_raw_small"] = sum(a * a for a in e)
    v["eel_max"] = sum((a - b) ** 2 for a, b in zip([1, 0], [0, 1]))

    pairs = [(2.0, 1.0), (3.0, 0.5), (1.0, 1.0)]
    v["pairwise_accuracy_tie"] = sum(1.0 if h > l else 0.5 if h == l else 0.0 for h, l in pairs) / len(pairs)
    v["intra_acc"] = 0.9 - 0.7
    v["inter_acc"] = 0.8 - 0.8

    grades = {"r": 1, "a": 0, "b": 0}
    v["sample_pairs_count"] = float(sum(1 for h in grades for l in grades if grades[h] > 0 and grades[l] < grades[h]))

    v["tau_c_reversed"] = tau_c_bruteforce([1, 2, 3, 4], [4, 3, 2, 1])
    v["tau_c_one_swap"] = tau_c_bruteforce([1, 2, 3, 4], [1, 3, 2, 4])
    return v


def main():
    values = compute()
    if "--write" in sys.argv:
        TABLE.write_text(json.dumps(values, indent=2, sort_keys=True) + "\n")
        print(f"wrote {len(values)} values to {TABLE}")
        return 0
    frozen = json.loads(TABLE.read_text())
    failures = 0
    for key in sorted(set(values) | set(frozen)):
        if key not in frozen or key not in values:
            print(f"FAIL {key}: present on one side only")
            failures += 1
            continue
        if abs(values[key] - frozen[key]) > TOLERANCE:
            print(f"FAIL {key}: oracle {values[key]!r} vs frozen {frozen[key]!r}")
            failures += 1
    print(f"{len(frozen) - failures}/{len(frozen)} frozen values confirmed by the oracle")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
