"""Exact-arithmetic engine for weighted double Hurwitz numbers.

Two independent computation routes -- brute-force symmetric-group
enumeration and Eynard-Orantin topological recursion on a rational
spectral curve -- plus the connecting integrable-systems apparatus
(tau function, Baker functions, Christoffel-Darboux kernel, quantum
curve, folded ODE systems), all over exact rationals.
"""

__version__ = "0.1.0"
