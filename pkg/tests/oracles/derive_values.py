"""Independent symbolic derivation of the reference values frozen in the tests.

Run with ``python3 tests/oracles/derive_values.py`` (needs sympy).  Nothing
here imports the package; the bracket is re-derived from its definition.
"""

import sympy as sp


def bracket(pi, coords, f, g):
    n = len(coords)
    total = 0
    for i in range(n):
        for j in range(i + 1, n):
            pij = pi.get((i, j), 0)
            total += pij * (sp.diff(f, coords[i]) * sp.diff(g, coords[j]) - sp.diff(f, coords[j]) * sp.diff(g, coords[i]))
    return sp.expand(total)


def jacobiator(pi, coords, f, g, h):
    return sp.expand(
        bracket(pi, coords, f, bracket(pi, coords, g, h))
        + bracket(pi, coords, h, bracket(pi, coords, f, g))
        + bracket(pi, coords, g, bracket(pi, coords, h, f))
    )


def flow(pi, coords, H):
    return [bracket(pi, coords, c, H) for c in coords]


x, y, z = sp.symbols("x y z")

# rigid body, from the component form of Euler's equations
L1, L2, L3 = sp.symbols("L1 L2 L3")
I1, I2, I3 = 1, 2, 3
euler = [
    sp.Rational(I2 - I3, I2 * I3) * L2 * L3,
    sp.Rational(I3 - I1, I3 * I1) * L3 * L1,
    sp.Rational(I1 - I2, I1 * I2) * L1 * L2,
]
print("euler rhs at (1,1,1):", [e.subs({L1: 1, L2: 1, L3: 1}) for e in euler])
# the so(3) sign that reproduces them: pi^{ij} = s * eps_ijk L_k
s = sp.Symbol("s")
pi_so3 = {(0, 1): s * L3, (0, 2): -s * L2, (1, 2): s * L1}
H_top = L1**2 / (2 * I1) + L2**2 / (2 * I2) + L3**2 / (2 * I3)
sol = sp.solve([sp.expand(a - b) for a, b in zip(flow(pi_so3, (L1, L2, L3), H_top), euler)], s)
print("so(3) sign reproducing Euler's equations:", sol)
print("{L1,L2} at (1,1,5) with eps:", bracket({k: v.subs(s, 1) for k, v in pi_so3.items()}, (L1, L2, L3), L1, L2).subs(L3, 5))
C = (L1**2 + L2**2 + L3**2) / 2
print("so(3) Casimir flow:", flow(pi_so3, (L1, L2, L3), C))

# helicity counterexample
pi_hel = {(0, 1): y, (0, 2): -x, (1, 2): z}
J = jacobiator(pi_hel, (x, y, z), x, y, z)
print("helicity jacobiator(x,y,z):", J, " at (1,1,1):", J.subs({x: 1, y: 1, z: 1}))
W = sp.Matrix([z, x, y])
curl = sp.Matrix([sp.diff(W[2], y) - sp.diff(W[1], z), sp.diff(W[0], z) - sp.diff(W[2], x), sp.diff(W[1], x) - sp.diff(W[0], y)])
print("helicity W.curl W:", sp.expand(W.dot(curl)))

# hyperboloid
pi_hyp = {(0, 1): z, (0, 2): -2 * x, (1, 2): 2 * y}
print("hyperboloid jacobiator(x,y,z):", jacobiator(pi_hyp, (x, y, z), x, y, z))
print("hyperboloid Casimir flow:", flow(pi_hyp, (x, y, z), 4 * x * y + z**2))
print("hyperboloid flow of H=x:", flow(pi_hyp, (x, y, z), x))

# cylinder
r, th = sp.symbols("r theta")
print("cylinder flow of C=r:", flow({(1, 2): r}, (r, th, z), r))

# Lotka-Volterra equilibrium for a12 = 1, eps = (-1, 2)
q1, q2 = sp.symbols("q1 q2")
A = sp.Matrix([[0, 1], [-1, 0]])
print("LV equilibrium:", sp.solve(list(sp.Matrix([-1, 2]) + A * sp.Matrix([q1, q2])), [q1, q2]))
x1, x2 = sp.symbols("x1 x2", positive=True)
h_lv = x1 - 2 * sp.log(x1) + x2 - sp.log(x2)
pi_lv = {(0, 1): x1 * x2}
print("LV flow at equilibrium:", [sp.simplify(e.subs({x1: 2, x2: 1})) for e in flow(pi_lv, (x1, x2), h_lv)])

# canonical R^4 fixtures, coordinates (q1, q2, p1, p2), Omega = [[0, I], [-I, 0]]
Om = sp.Matrix([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]])
e = sp.eye(4)
for name, cols in (("span{e_q1}", [0]), ("span{e_q1,e_q2}", [0, 1]), ("span{e_q1,e_q2,e_p1}", [0, 1, 2])):
    Wm = sp.Matrix.hstack(*[e[:, c] for c in cols])
    perp = (Om * Wm).T.nullspace()
    print(name, "perp basis:", [list(v) for v in perp])

# pendulum: the energy that is conserved by theta'' = -(g/L) sin(theta)
th, om, g, Ll = sp.symbols("theta omega g L")
dth, dom = om, -(g / Ll) * sp.sin(th)
for label, E in (("plus", om**2 * Ll**2 / 2 + g * Ll * sp.cos(th)), ("minus", om**2 * Ll**2 / 2 - g * Ll * sp.cos(th))):
    print("pendulum dE/dt", label, sp.simplify(sp.diff(E, th) * dth + sp.diff(E, om) * dom))

# spherical pendulum involution
ps, pt, pp = sp.symbols("psi p_theta p_psi")
Hsp = pp**2 / 2 + pt**2 / sp.sin(ps) ** 2 - g * sp.cos(ps)
print("spherical {H, p_theta}:", bracket({(0, 2): 1, (1, 3): 1}, (th, ps, pt, pp), Hsp, pt))

# harmonic action-angle at (q, p) = (0, sqrt 2), w = 1
q, p, w = sp.symbols("q p w", positive=True)
E = p**2 / 2 + w**2 * q**2 / 2
psi_v = (E / w).subs({q: 0, p: sp.sqrt(2), w: 1})
phi_v = (w * sp.atan(q / sp.sqrt(2 * E / w - q**2))).subs({q: 0, p: sp.sqrt(2), w: 1})
print("action-angle at (0, sqrt2):", "E =", E.subs({q: 0, p: sp.sqrt(2), w: 1}), "psi =", psi_v, "phi =", phi_v)
qq, pp2 = sp.symbols("qq pp2", real=True)
phi_w1 = sp.atan2(qq, pp2)
psi_w1 = (pp2**2 + qq**2) / 2
print("{phi, psi} at w=1:", sp.simplify(sp.diff(phi_w1, qq) * sp.diff(psi_w1, pp2) - sp.diff(phi_w1, pp2) * sp.diff(psi_w1, qq)))
