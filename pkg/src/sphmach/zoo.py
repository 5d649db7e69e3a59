"""Named fixture machines and bisets used across the test suite and docs."""

from __future__ import annotations

from .machfile import MachineFile, parse_machine_file, mcb_from_json
from .mcbiset import MappingClassBiset


Z2_TEXT = """\
group: a,b
a=<,a>(1,2)
b=<b,>(1,2)
"""

# degree-5 recursion of the blown-up torus endomorphism, over the four-
# punctured sphere with relator d*c*b*a; s, t, u drag the free marked
# point around the three critical values
PILGRIM_TEXT = """\
group: a,b,c,d
relator: d*c*b*a
a=<a,,,,a^-1>(1,3,5)(2,4)
b=<b^-1,,,b,>(1,4)(2,5,3)
c=<,,c,c^-1,>(1,2)(3,4)
d=<a,b,d,c,>
auto s = d^-1*b^-1*c^-1,b,c,c*b*d*b^-1*c^-1
auto t = b^-1*c^-1*d^-1,b^-1*d^-1*b*d*b,b^-1*d^-1*b*d*c*d^-1*b^-1*d*b,b^-1*d*b
auto u = b^-1*c^-1*d^-1,b,c^-1*d^-1*c*d*c,c^-1*d*c
"""

# degree-5 cyclic recursion marking a fixed point of z^5 (punctures
# 0, 1, -1, infinity)
Z5_TEXT = """\
group: a,b,c,d
a=<,,,,a>(1,2,3,4,5)
b=<b,,,,>
c=<,,c,,>
d=<b^-1*a^-1,,c^-1,,>(1,5,4,3,2)
"""

CENTRALIZER7_TEXT = """\
group: x1,x2,x3,x4,x5,x6,x7
relator: x1*x2*x3*x4*x5*x6*x7
x1=<,x3*x4,x4^-1*x3^-1,x2*x3*x4*x5,x5^-1*x4^-1*x3^-1*x2^-1,x1>(2,3)(4,5)
x2=<,,x4^-1*x3^-1,x2*x3*x4,x5^-1*x4^-1*x3^-1*x2^-1,x2*x3*x4*x5>(1,2)(3,4)(5,6)
x3=<x3,,,,,>
x4=<x4,,,,,>
x5=<,,x5,,,>(1,2)(3,4)(5,6)
x6=<,,,,,x6>(2,3)
x7=<,,,,,x7>(4,5)
curves: x3*x4, x2*x3*x4*x5
auto sigma = x1,x2,x3^(x3*x4),x4^(x3*x4),x5,x6,x7
auto tau = x1,x2^(x2*x3*x4*x5),x3^(x2*x3*x4*x5),x4^(x2*x3*x4*x5),x5^(x2*x3*x4*x5),x6,x7
auto alpha = x1^(x2*x3*x4*x5*x6*x5^-1*x4^-1*x3^-1*x2^-1),x2,x3,x4,x5,x6^(x5^-1*x4^-1*x3^-1*x2^-1*x1*x2*x3*x4*x5*x6),x7
auto beta = x1,x2,x3,x4,x5,x6^(x6*x7),x7^(x6*x7)
"""

RABBIT_MCB = {
    "alphabet": ["s", "t", "u"],
    "basis": ["f_R", "f_R.t"],
    "base": "f_R",
    "table": [
        {"gen": "t", "from": "f_R", "knitting": "", "to": "f_R.t"},
        {"gen": "t", "from": "f_R.t", "knitting": "u", "to": "f_R"},
        {"gen": "s", "from": "f_R", "knitting": "t", "to": "f_R"},
        {"gen": "s", "from": "f_R.t", "knitting": "", "to": "f_R.t"},
        {"gen": "u", "from": "f_R", "knitting": "s", "to": "f_R.t"},
        {"gen": "u", "from": "f_R.t", "knitting": "", "to": "f_R"},
    ],
}


def z2() -> MachineFile:
    """The degree-2 cyclic cover machine over <a,b | ab>."""
    return parse_machine_file(Z2_TEXT)


def pilgrim() -> MachineFile:
    """The degree-5 blown-up torus endomorphism over <a,b,c,d | dcba>."""
    return parse_machine_file(PILGRIM_TEXT)


def z5_marked() -> MachineFile:
    """z^5 with the fixed point -1 marked: degree-5 cyclic monodromy over a
    four-punctured sphere."""
    return parse_machine_file(Z5_TEXT)


def centralizer7() -> MachineFile:
    """The degree-6 seven-puncture machine with the rank-(1+infinity)
    centralizer, its obstruction multicurve {s, t} and the four twists
    sigma, tau, alpha, beta."""
    return parse_machine_file(CENTRALIZER7_TEXT)


def rabbit_mcb() -> MappingClassBiset:
    """The degree-2 twist recursion of the rabbit polynomial in basis
    {f_R, f_R.t} over the twist alphabet s, t, u."""
    return mcb_from_json(RABBIT_MCB)
