#!/usr/bin/env python3
"""Independent high-precision oracles for frozen constants in the C++ tests.

Run: python3 tests/oracles/compute_oracles.py
Values printed here are copied verbatim into tests/*.cpp.
"""
from fractions import Fraction
from itertools import product

import mpmath

mpmath.mp.prec = 200


def lse(xs):
    m = max(xs)
    return m + mpmath.log(sum(mpmath.exp(x - m) for x in xs))


def normalize_123():
    raw = [mpmath.mpf(1), mpmath.mpf(2), mpmath.mpf(3)]
    z = lse(raw)
    return [x - z for x in raw]


def kl(p, q):
    return sum(pi * mpmath.log(pi / qi) for pi, qi in zip(p, q) if pi > 0)


def j1_mutual_info():
    joint = {"AA": mpmath.mpf("0.4"), "AB": mpmath.mpf("0.1"),
             "BA": mpmath.mpf("0.1"), "BB": mpmath.mpf("0.4")}
    m1 = {a: sum(v for k, v in joint.items() if k[0] == a) for a in "AB"}
    m2 = {a: sum(v for k, v in joint.items() if k[1] == a) for a in "AB"}
    p = [joint[a + b] for a, b in product("AB", repeat=2)]
    q = [m1[a] * m2[b] for a, b in product("AB", repeat=2)]
    tv = sum(abs(x - y) for x, y in zip(p, q)) / 2
    return kl(p, q), tv


def temperature_example():
    probs = [Fraction(7, 10), Fraction(2, 10), Fraction(1, 10)]
    sq = [p * p for p in probs]
    z = sum(sq)
    return [s / z for s in sq]


def markov_chain_rule():
    init = {"A": Fraction(1, 2), "B": Fraction(1, 2)}
    trans = {("A", "A"): Fraction(9, 10), ("A", "B"): Fraction(1, 10),
             ("B", "A"): Fraction(1, 10), ("B", "B"): Fraction(9, 10)}
    return {a + b: init[a] * trans[(a, b)] for a, b in product("AB", repeat=2)}


def dep4_gap():
    init = [Fraction(4, 10), Fraction(3, 10), Fraction(2, 10), Fraction(1, 10)]

    def trans(a, b):
        return Fraction(94, 100) if b == (a + 1) % 4 else Fraction(2, 100)

    joint = {}
    for s in product(range(4), repeat=4):
        p = init[s[0]]
        for a, b in zip(s, s[1:]):
            p *= trans(a, b)
        joint[s] = p
    marg = [[sum(v for k, v in joint.items() if k[i] == a) for a in range(4)] for i in range(4)]
    prod = {s: marg[0][s[0]] * marg[1][s[1]] * marg[2][s[2]] * marg[3][s[3]] for s in joint}
    mi = sum(mpmath.mpf(p.numerator) / p.denominator
             * mpmath.log(mpmath.mpf(p.numerator * prod[s].denominator)
                          / (p.denominator * prod[s].numerator))
             for s, p in joint.items() if p > 0)
    tv = sum(abs(joint[s] - prod[s]) for s in joint) / 2
    return mi, tv


def eos5_ar_law():
    # A/B/<eos>, stop at eos or length 5.
    init = {"A": Fraction(1, 2), "B": Fraction(1, 2)}
    rows = {"A": [Fraction(6, 10), Fraction(3, 10), Fraction(1, 10)],
            "B": [Fraction(3, 10), Fraction(5, 10), Fraction(2, 10)]}
    law = {}

    def walk(seq, p):
        if seq and (seq[-1] == "E" or len(seq) == 5):
            law[seq] = law.get(seq, 0) + p
            return
        if not seq:
            for a, q in init.items():
                walk(a, p * q)
            return
        for tok, q in zip("ABE", rows[seq[-1]]):
            if q:
                walk(seq + tok, p * q)

    walk("", Fraction(1))
    return law


M32 = 0xFFFFFFFF


def philox4x32_10(ctr, key):
    c = list(ctr)
    k = list(key)
    for r in range(10):
        if r:
            k = [(k[0] + 0x9E3779B9) & M32, (k[1] + 0xBB67AE85) & M32]
        p0 = 0xD2511F53 * c[0]
        p1 = 0xCD9E8D57 * c[2]
        c = [((p1 >> 32) ^ c[1] ^ k[0]) & M32, p1 & M32,
             ((p0 >> 32) ^ c[3] ^ k[1]) & M32, p0 & M32]
    return c


if __name__ == "__main__":
    print("normalize(1,2,3):", [mpmath.nstr(v, 25) for v in normalize_123()])
    mi, tv = j1_mutual_info()
    print("J1 mutual information (nats):", mpmath.nstr(mi, 25))
    print("J1 TV(joint, marginal product):", mpmath.nstr(tv, 25))
    print("temperature 0.5 on (0.7,0.2,0.1):", temperature_example(),
          [float(x) for x in temperature_example()])
    print("order-1 Markov n=2 chain rule:", markov_chain_rule())
    mi, tv = dep4_gap()
    print("dep4 mutual information (nats):", mpmath.nstr(mi, 25), "TV:", float(tv), tv)
    law = eos5_ar_law()
    for k in ["AE", "BE", "AAAAA", "BBBBB", "ABE"]:
        print("eos5 AR law", k, law.get(k), float(law.get(k, 0)))
    print("eos5 AR law total:", sum(law.values()), "support:", len(law))
    for ctr, key in [((0, 0, 0, 0), (0, 0)),
                     ((M32,) * 4, (M32, M32)),
                     ((0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344), (0xa4093822, 0x299f31d0))]:
        print("philox", [hex(x) for x in philox4x32_10(ctr, key)])
