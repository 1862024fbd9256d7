"""
Rational approximants of an irrational flux
===========================================

Continued fractions turn an irrational flux into a ladder of periodic
problems. Everything here is exact integer arithmetic.
"""

from aahspec import convergents_of, cf_expand, diophantine_error_bound

# the golden mean (sqrt(5) - 1)/2 has all partial quotients after the first equal to one
cf = cf_expand("golden", 12)
print("golden terms:", cf.terms)

# convergents p/q; denominators are the Fibonacci numbers
for c in convergents_of("golden", q_max=100):
    print(f"  {c.p}/{c.q}")

# sqrt(2) = [1; 2, 2, 2, ...]
print("sqrt2 terms:", cf_expand("sqrt2", 8).terms)

# a rational input terminates
print("7/5 terms:", cf_expand("7/5", 10).terms)

# q^2 |alpha - p/q| stays bounded; compare with 1/sqrt(5), the golden worst case
import math
alpha = math.sqrt(2)
for c in convergents_of("sqrt2", q_max=200):
    scaled = c.q ** 2 * abs(alpha - c.p / c.q)
    print(f"  q={c.q:4d}  q^2 error={scaled:.4f}  1/sqrt5={diophantine_error_bound(c.q) * c.q ** 2:.4f}")
