#!/usr/bin/env python3
"""Generate Chebyshev tables for sqrt(x) * scaled K0, K1, I0, I1 on [2, 17].

Writes include/welltest/detail/bessel_tables.hpp. Reference values come from
mpmath at 40 significant digits.
"""
import pathlib
import sys

import mpmath as mp

mp.mp.dps = 40

INTERVALS = [(2.0, 2.6), (2.6, 3.3), (3.3, 4.2), (4.2, 5.4), (5.4, 7.0), (7.0, 9.2), (9.2, 12.5), (12.5, 17.0)]
DEGREE = 17
CUTOFF = mp.mpf("1e-18")


def functions(x):
    x = mp.mpf(x)
    r = mp.sqrt(x)
    return [
        r * mp.besselk(0, x) * mp.exp(x),
        r * mp.besselk(1, x) * mp.exp(x),
        r * mp.besseli(0, x) * mp.exp(-x),
        r * mp.besseli(1, x) * mp.exp(-x),
    ]


def chebyshev(lo, hi):
    n = DEGREE + 1
    nodes = [mp.cos(mp.pi * (k + mp.mpf(0.5)) / n) for k in range(n)]
    values = [functions((hi - lo) / 2 * t + (hi + lo) / 2) for t in nodes]
    coeffs = []
    for f in range(4):
        cs = []
        for j in range(n):
            s = mp.fsum(values[k][f] * mp.cos(mp.pi * j * (k + mp.mpf(0.5)) / n) for k in range(n))
            cs.append(2 * s / n)
        cs[0] /= 2
        scale = max(abs(c) for c in cs)
        assert abs(cs[-1]) < CUTOFF * scale, "raise DEGREE: tail coefficient too large"
        coeffs.append(cs)
    return coeffs


def main():
    out = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else (
        pathlib.Path(__file__).resolve().parent.parent / "include/welltest/detail/bessel_tables.hpp")
    lines = [
        "#pragma once",
        "",
        "// Generated by tools/gen_bessel_tables.py. Do not edit.",
        "// Chebyshev coefficients of sqrt(x)*e^x K0, sqrt(x)*e^x K1, sqrt(x)*e^-x I0,",
        "// sqrt(x)*e^-x I1 on consecutive subintervals of [2, 17].",
        "",
        "#include <array>",
        "#include <cstddef>",
        "",
        "namespace welltest::bessel::detail {",
        "",
        "inline constexpr std::size_t kChebyshevTerms = %d;" % (DEGREE + 1),
        "",
        "struct ChebyshevPiece {",
        "    double lo, hi;",
        "    std::array<std::array<double, kChebyshevTerms>, 4> coeffs;",
        "};",
        "",
        "inline const std::array<ChebyshevPiece, %d>& chebyshev_pieces() {" % len(INTERVALS),
        "    static const std::array<ChebyshevPiece, %d> pieces{{" % len(INTERVALS),
    ]
    for lo, hi in INTERVALS:
        coeffs = chebyshev(mp.mpf(lo), mp.mpf(hi))
        lines.append("        {%r, %r, {{" % (lo, hi))
        for cs in coeffs:
            body = ", ".join(mp.nstr(c, 17, min_fixed=1, max_fixed=0) for c in cs)
            lines.append("            {{%s}}," % body)
        lines.append("        }}},")
    lines += ["    }};", "    return pieces;", "}", "", "}  // namespace welltest::bessel::detail", ""]
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines))


if __name__ == "__main__":
    main()
