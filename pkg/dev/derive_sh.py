import sympy as sp

x, y, z = sp.symbols('x y z', real=True)
r2 = x*x + y*y + z*z

# seed harmonic polynomials, degree 4, real SH m-structure
seeds = {
    -4: x**3*y - x*y**3,
    -3: z*(3*x**2*y - y**3),
    -2: x*y*(7*z**2 - r2),
    -1: y*z*(7*z**2 - 3*r2),
     0: 35*z**4 - 30*z**2*r2 + 3*r2**2,
     1: x*z*(7*z**2 - 3*r2),
     2: (x**2 - y**2)*(7*z**2 - r2),
     3: z*(x**3 - 3*x*y**2),
     4: x**4 - 6*x**2*y**2 + y**4,
}

# check harmonicity
for m, p in seeds.items():
    lap = sp.diff(p, x, 2) + sp.diff(p, y, 2) + sp.diff(p, z, 2)
    assert sp.simplify(lap) == 0, m

# sphere integral of monomial x^a y^b z^c
def sphere_int(expr):
    expr = sp.expand(expr)
    total = 0
    for term in sp.Add.make_args(expr):
        c = term
        a = sp.degree(term, x); b = sp.degree(term, y); cc = sp.degree(term, z)
        coef = term / (x**a * y**b * z**cc)
        if a % 2 or b % 2 or cc % 2:
            continue
        num = sp.factorial2(a-1)*sp.factorial2(b-1)*sp.factorial2(cc-1)
        den = sp.factorial2(a+b+cc+1)
        total += coef * 4*sp.pi * num/den
    return sp.simplify(total)

# normalize
Y = {}
for m, p in seeds.items():
    nrm = sp.sqrt(sphere_int(p*p))
    Y[m] = sp.simplify(p / nrm)

# orthonormality check
ms = list(range(-4,5))
for i in ms:
    for j in ms:
        v = sphere_int(Y[i]*Y[j])
        assert sp.simplify(v - (1 if i==j else 0)) == 0, (i,j)
print("orthonormal ok")

def Dmat(R):
    # (rho(R) f)(v) = f(R^T v); coefficient transform c -> D c with D_ji = <Y_j, rho(R) Y_i>
    subs = {x: R[0,0]*x + R[1,0]*y + R[2,0]*z,
            y: R[0,1]*x + R[1,1]*y + R[2,1]*z,
            z: R[0,2]*x + R[1,2]*y + R[2,2]*z}
    D = sp.zeros(9,9)
    for i, mi in enumerate(ms):
        rot = sp.expand(Y[mi].subs(subs, simultaneous=True))
        for j, mj in enumerate(ms):
            D[j,i] = sp.nsimplify(sp.simplify(sphere_int(Y[mj]*rot)), [sp.sqrt(2),sp.sqrt(3),sp.sqrt(5),sp.sqrt(7),sp.sqrt(35),sp.sqrt(70),sp.sqrt(14),sp.sqrt(10),sp.sqrt(21)])
    return D

c, s = sp.symbols('c s')  # cos t, sin t
Rx90 = sp.Matrix([[1,0,0],[0,0,-1],[0,1,0]])
D90 = Dmat(Rx90)
print("X90 =")
sp.pprint(D90)
print(sp.srepr(D90) if False else "")
print("python:")
print([[sp.simplify(D90[i,j]) for j in range(9)] for i in range(9)])

# z-rotation block structure check
a = sp.symbols('alpha', real=True)
Rz = sp.Matrix([[sp.cos(a),-sp.sin(a),0],[sp.sin(a),sp.cos(a),0],[0,0,1]])
Dz = Dmat(Rz)
Dz = Dz.applyfunc(lambda e: sp.simplify(sp.trigsimp(e)))
sp.pprint(Dz)

# octahedral invariance of h = sqrt(7/12) e0 + sqrt(5/12) e4c
h = sp.Matrix([0,0,0,0,sp.sqrt(sp.Rational(7,12)),0,0,0,sp.sqrt(sp.Rational(5,12))])
Rz90 = sp.Matrix([[0,-1,0],[1,0,0],[0,0,1]])
for nm, R in [("Rz90",Rz90),("Rx90",Rx90)]:
    v = Dmat(R)*h
    print(nm, "invariant:", sp.simplify((v-h).norm()) == 0)
