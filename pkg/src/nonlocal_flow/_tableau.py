"""Butcher tableau of the Cash-Karp 5(4) embedded pair and classic RK4.

Both kernel backends import these constants so the arithmetic is
literal-for-literal identical between them.
"""

# Cash-Karp stage nodes (needed only for nonautonomous scalar solves).
C2 = 1.0 / 5.0
C3 = 3.0 / 10.0
C4 = 3.0 / 5.0
C5 = 1.0
C6 = 7.0 / 8.0

# Stage coupling coefficients.
A21 = 1.0 / 5.0
A31 = 3.0 / 40.0
A32 = 9.0 / 40.0
A41 = 3.0 / 10.0
A42 = -9.0 / 10.0
A43 = 6.0 / 5.0
A51 = -11.0 / 54.0
A52 = 5.0 / 2.0
A53 = -70.0 / 27.0
A54 = 35.0 / 27.0
A61 = 1631.0 / 55296.0
A62 = 175.0 / 512.0
A63 = 575.0 / 13824.0
A64 = 44275.0 / 110592.0
A65 = 253.0 / 4096.0

# 5th-order propagating weights (B2 = B5 = 0).
B1 = 37.0 / 378.0
B3 = 250.0 / 621.0
B4 = 125.0 / 594.0
B6 = 512.0 / 1771.0

# Error-estimate weights: difference between the 5th- and 4th-order rows
# (E2 = 0).
E1 = -277.0 / 64512.0
E3 = 6925.0 / 370944.0
E4 = -6925.0 / 202752.0
E5 = -277.0 / 14336.0
E6 = 277.0 / 7084.0
